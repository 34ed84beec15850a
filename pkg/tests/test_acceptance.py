"""Acceptance criteria A1-A13. Each test prints one PASS line on success;
pytest reports the FAIL side. Run with `pytest tests/test_acceptance.py -v -s`."""

import math
import os
import signal
import subprocess
import sys
import time

from webgym.actions import ActionSetConfig, ParseError, ParsedAction, catalog, parse_action
from webgym.agents import GenericAgentArgs, ObsFlags, OracleModelArgs, RandomModelArgs
from webgym.agents.flags import ReasoningFlags
from webgym.agents.generic import HistoryStep, build_generic_prompt
from webgym.agents.prompt import fit_tokens
from webgym.agents.base import ProcessedObs
from webgym.env import EnvConfig, make_env
from webgym.llm import ScriptedModelArgs
from webgym.observation import compute_extra_props, derive_axtree, flatten_axtree, flatten_html, snapshot_dom
from webgym.rng import DetRng
from webgym.study import bernoulli_metrics, make_study, replay_study, run_pool
from webgym.study.scheduler import WorkItem
from webgym.tasks import benchmark_episodes, benchmark_from_dict, is_registered, load_benchmark, register_task
from webgym.tokens import count_tokens

from conftest import VOTE_AXTREE_GOLDEN, VOTE_HTML_FIRST_LINE, occluded_button_page, vote_widget_page


def report(criterion: str, detail: str) -> None:
    print(f"PASS {criterion}: {detail}")


def oracle_args():
    return GenericAgentArgs(agent_name="generic-oracle", model=OracleModelArgs())


def episode_fingerprint(study):
    out = {}
    for spec in study.base_specs():
        result = study.final_result(spec)
        assert result is not None, f"{spec} unfinished"
        out[(spec.agent_index, spec.task_id, spec.seed)] = (
            result.status,
            result.reward,
            result.n_steps,
            result.usage.prompt_tokens,
            result.usage.completion_tokens,
        )
    return out


def test_A01_episode_count_arithmetic():
    start = time.perf_counter()
    wide = load_benchmark("synthetic-wide")
    assert len(wide.tasks) == 125
    assert len(benchmark_episodes(wide, seeds_per_task=5)) == 625
    synthetic = load_benchmark("synthetic")
    assert len(benchmark_episodes(synthetic, seeds_per_task=5)) == 50
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    report("A1", f"125x5=625 and 10x5=50 episode specs in {elapsed:.3f}s")


def test_A02_oracle_solves_suite_and_random_does_not(tmp_path):
    start = time.perf_counter()
    bench = load_benchmark("synthetic")

    oracle_study = make_study(bench, [oracle_args()], root=tmp_path / "oracle")
    oracle_study.run(n_jobs=1)
    oracle = oracle_study.aggregate()["generic-oracle"]
    assert oracle.success_rate == 1.0
    assert oracle.n == 50

    random_study = make_study(
        bench,
        [GenericAgentArgs(agent_name="generic-random", model=RandomModelArgs())],
        root=tmp_path / "random",
    )
    random_study.run(n_jobs=1)
    random = random_study.aggregate()["generic-random"]
    assert random.success_rate <= 0.20

    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    report("A2", f"oracle 1.00, random {random.success_rate:.2f} over 50 episodes in {elapsed:.1f}s")


def test_A03_parallel_determinism(tmp_path):
    bench = load_benchmark("synthetic")
    parallel = make_study(bench, [oracle_args()], root=tmp_path / "par")
    parallel.run(n_jobs=8)
    serial = make_study(bench, [oracle_args()], root=tmp_path / "ser")
    serial.run(n_jobs=1)

    assert episode_fingerprint(parallel) == episode_fingerprint(serial)
    mp = parallel.aggregate()["generic-oracle"]
    ms = serial.aggregate()["generic-oracle"]
    assert (mp.success_rate, mp.std_error, mp.n) == (ms.success_rate, ms.std_error, ms.n)
    assert {k: (v.success_rate, v.std_error, v.n) for k, v in mp.per_category.items()} == {
        k: (v.success_rate, v.std_error, v.n) for k, v in ms.per_category.items()
    }
    report("A3", "n_jobs=8 and n_jobs=1 agree on all 50 episode results and aggregates")


def test_A04_dag_scheduling_1000_randomized_runs():
    items = [WorkItem(key=(t, 0), task_id=t, seed=0) for t in ("a", "b", "c", "d")]
    edges = [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")]
    violations = 0
    for trial in range(1000):
        rng = DetRng(f"a4-trial:{trial}")

        def execute(item, rng=rng):
            time.sleep(rng.randint(0, 2) / 1000.0)

        _, timings = run_pool(items, edges, n_jobs=rng.randint(1, 4), execute=execute)
        ok = (
            timings[("a", 0)].end <= timings[("b", 0)].start
            and timings[("a", 0)].end <= timings[("c", 0)].start
            and timings[("d", 0)].start >= timings[("b", 0)].end
            and timings[("d", 0)].start >= timings[("c", 0)].end
        )
        violations += 0 if ok else 1
    assert violations == 0
    report("A4", "diamond partial order held in 1000/1000 randomized scheduler runs")


class InjectedFaultTask:
    """Setup raises on the first two attempts of every (task, seed)."""

    attempts: dict = {}

    def __init__(self, task_id):
        from webgym.tasks.synthetic import EnterTextTask

        self.task_id = task_id
        self.inner = EnterTextTask(task_id)

    def setup(self, backend, seed):
        n = InjectedFaultTask.attempts.get((self.task_id, seed), 0)
        InjectedFaultTask.attempts[(self.task_id, seed)] = n + 1
        if n < 2:
            raise RuntimeError(f"injected backend fault (attempt {n})")
        return self.inner.setup(backend, seed)

    def validate(self, backend, chat):
        return self.inner.validate(backend, chat)


def test_A05_relaunch_policy(tmp_path):
    InjectedFaultTask.attempts = {}
    if not is_registered("accept.flaky"):
        register_task("accept.flaky", InjectedFaultTask)
    bench = benchmark_from_dict(
        {
            "name": "flaky-accept",
            "version": "1",
            "suggested": {"action_categories": ["bid", "tab", "nav", "misc"], "seeds_per_task": 4, "max_steps": 10},
            "tasks": [{"id": "accept.flaky", "template": "enter-text", "split": "test"}],
        }
    )
    bench.validate()
    study = make_study(bench, [oracle_args()], root=tmp_path)
    study.run(n_jobs=2)

    for spec in study.base_specs():
        attempt, result, _ = study.latest_state(spec)
        assert result.status == "success"
        assert attempt == 2  # two injected faults, success on the third attempt
        assert attempt + 1 <= 4
    assert all(n == 3 for n in InjectedFaultTask.attempts.values())
    assert study.aggregate()["generic-oracle"].success_rate == 1.0
    report("A5", "all episodes recovered from two injected faults; <= 4 attempts each")


def test_A06_parse_retry_policy(tmp_path):
    garbage = "thinking without any tags"
    valid = "<think>ok</think>\n<action>\nsend_msg_to_user('1879')\n</action>"

    env = make_env("qa.einstein")
    obs, _ = env.reset(seed=0)
    agent = GenericAgentArgs(model=ScriptedModelArgs(queue=(garbage, garbage, garbage, valid))).make_agent()
    action, info = agent.get_action(obs)
    assert action == "send_msg_to_user('1879')"
    assert info.stats["n_retries"] == 3

    env2 = make_env("qa.einstein")
    obs2, _ = env2.reset(seed=0)
    agent2 = GenericAgentArgs(model=ScriptedModelArgs(queue=(garbage,) * 4)).make_agent()
    action2, info2 = agent2.get_action(obs2)
    assert action2 is None
    assert info2.stats["terminal_parse_failure"] == 1

    # end to end: the terminal marker becomes a final, non-relaunched failure
    bench = benchmark_from_dict(
        {
            "name": "retry-accept",
            "version": "1",
            "suggested": {"action_categories": ["bid", "tab", "nav", "misc"], "seeds_per_task": 1, "max_steps": 10},
            "tasks": [{"id": "synth.click-button", "template": "click-button", "split": "test"}],
        }
    )
    bench.validate()
    study = make_study(
        bench,
        [GenericAgentArgs(agent_name="generic-garbage", model=ScriptedModelArgs(rules=(("# Instructions", garbage),)))],
        root=tmp_path,
    )
    study.run()
    spec = study.base_specs()[0]
    attempt, result, _ = study.latest_state(spec)
    assert (attempt, result.status) == (0, "failure")
    report("A6", "3 garbage completions recovered with 3 retries; 4 terminated the episode as failure")


def _fuzz_corpus(n: int) -> list[str]:
    rng = DetRng("a7-fuzz")
    seeds = [p.usage_examples[0] for p in catalog() if p.usage_examples]
    alphabet = "abcdefXYZ0123456789()[]'\",=._-\\ \n\té中"
    corpus = []
    for i in range(n):
        mode = i % 3
        if mode == 0:
            corpus.append("".join(rng.choice(alphabet) for _ in range(rng.randint(0, 80))))
        elif mode == 1:
            base = list(rng.choice(seeds))
            for _ in range(rng.randint(1, 6)):
                op = rng.randint(0, 2)
                pos = rng.randint(0, max(0, len(base) - 1))
                if op == 0 and base:
                    del base[pos]
                elif op == 1:
                    base.insert(pos, rng.choice(alphabet))
                elif base:
                    base[pos] = rng.choice(alphabet)
            corpus.append("".join(base))
        else:
            corpus.append(bytes(rng.randint(0, 255) for _ in range(rng.randint(0, 60))).decode("latin-1"))
    return corpus


def test_A07_action_dsl_fuzz_examples_and_round_trip():
    config = ActionSetConfig()
    for text in _fuzz_corpus(10000):
        result = parse_action(text, config)
        assert isinstance(result, (ParsedAction, ParseError))

    documented = {
        "click('169')": ("click", ("169", "left", ())),
        'press("169", "Enter")': ("press", ("169", "Enter")),
        "mouse_click(x=121, y=197)": ("mouse_click", (121.0, 197.0, "left")),
        'send_msg_to_user("The \\"Upvote\\" button has been clicked")': (
            "send_msg_to_user",
            ('The "Upvote" button has been clicked',),
        ),
        "click('a51')": ("click", ("a51", "left", ())),
        "click('b22', button='right')": ("click", ("b22", "right", ())),
        "click('48', button='middle', modifiers=['Shift'])": ("click", ("48", "middle", ("Shift",))),
        "fill('237', 'example value')": ("fill", ("237", "example value")),
        "fill('45', 'multi-line\\nexample')": ("fill", ("45", "multi-line\nexample")),
        "fill('a12', 'example with \"quotes\"')": ("fill", ("a12", 'example with "quotes"')),
        "scroll(0, 200)": ("scroll", (0.0, 200.0)),
        "scroll(-50.2, -100.5)": ("scroll", (-50.2, -100.5)),
        "send_msg_to_user('Based on the results of my search, the city was built in 1751.')": (
            "send_msg_to_user",
            ("Based on the results of my search, the city was built in 1751.",),
        ),
        "report_infeasible('I cannot follow these instructions because there is no email field in this form.')": (
            "report_infeasible",
            ("I cannot follow these instructions because there is no email field in this form.",),
        ),
    }
    for text, (name, args) in documented.items():
        action = parse_action(text, config)
        assert isinstance(action, ParsedAction), f"{text} -> {action}"
        assert action.primitive.name == name
        assert action.args == args
        canon = action.canonical()
        again = parse_action(canon, config)
        assert isinstance(again, ParsedAction)
        assert again == action
        assert again.canonical() == canon
    report("A7", "10000 fuzz inputs crash-free; documented examples parse; canonical form is a fixed point")


def test_A08_intercepted_click_error_feedback():
    if not is_registered("accept.occluded"):

        class OccludedTask:
            def setup(self, backend, seed):
                backend.register_page("local://occluded", occluded_button_page)
                backend.goto("local://occluded")
                return "Click the search button."

            def validate(self, backend, chat):
                return 0.0, False, None

        register_task("accept.occluded", OccludedTask)

    env = make_env("accept.occluded", EnvConfig(task_id="accept.occluded", action_timeout_ms=500))
    env.reset(seed=0)
    result = env.step("click('241')")
    error = result.observation.last_action_error
    assert "Timeout 500ms exceeded" in error
    assert "intercepts pointer events" in error
    assert result.reward == 0.0
    assert result.info["action_error_kind"] == "intercepted"
    report("A8", "intercepted click produced the 500ms timeout feedback")


def test_A09_observation_goldens():
    page = vote_widget_page()
    dom = snapshot_dom(page)
    props = compute_extra_props(page)
    ax = derive_axtree(dom, props)
    flat = flatten_axtree(ax)
    assert flat == VOTE_AXTREE_GOLDEN
    assert len(flat.splitlines()) == 4
    html = flatten_html(dom)
    assert html.splitlines()[0] == VOTE_HTML_FIRST_LINE
    report("A9", "four-line AXTree and HTML first line are byte-exact")


def _reference_components():
    axtree_txt = "\n".join(f"[{i}] link 'item {i} with labels'" for i in range(260))
    html_txt = "\n".join(f'<div bid="{i}" class="row">item text {i}</div>' for i in range(400))
    obs = ProcessedObs(
        goal_text="Collect every invoice from the archive page.",
        chat=[{"role": "user", "parts": [{"kind": "text", "text": "Collect every invoice from the archive page."}]}],
        open_pages_urls=["local://archive"],
        open_pages_titles=["Archive"],
        active_page_index=0,
        axtree_txt=axtree_txt,
        html_txt=html_txt,
        focused_element_bid=None,
        last_action_error="",
    )
    history = [HistoryStep(think=f"step {i} reasoning text", action=f"click('{i}')") for i in range(6)]
    return build_generic_prompt(
        obs,
        history,
        ObsFlags(use_html=True),
        ActionSetConfig(enabled_categories=frozenset({"bid", "tab", "nav", "misc"})),
        ReasoningFlags(),
    )


def _grouped(events: list[str], order: list[str]) -> bool:
    ranks = [order.index(e) for e in events if e in order]
    return ranks == sorted(ranks)


def test_A10_fit_tokens_budgets_and_shrink_order():
    full_text = fit_tokens(_reference_components(), 10**9)
    full = count_tokens(full_text)
    goal = "Collect every invoice from the archive page."
    stages = ["history", "html", "axtree"]

    seen_stages = set()
    for fraction in (1.0, 0.5, 0.25):
        budget = int(full * fraction)
        stats = {}
        out = fit_tokens(_reference_components(), budget, stats=stats)
        assert count_tokens(out) <= budget
        assert goal in out
        assert _grouped(stats["shrink_events"], stages)
        seen_stages |= set(stats["shrink_events"])
        if fraction == 1.0:
            assert out == full_text
            assert stats["n_shrinks"] == 0
    assert seen_stages == {"history", "html", "axtree"}
    report("A10", f"budgets {full}/{full // 2}/{full // 4} tokens met with history->HTML->AXTree shrinking")


def test_A11_metrics_formula_against_brute_force():
    metrics = bernoulli_metrics([1.0, 1.0, 1.0, 0.0])
    assert metrics.success_rate == 0.75
    assert abs(metrics.std_error - math.sqrt(0.75 * 0.25 / 4)) < 1e-12

    rng = DetRng("a11-bernoulli")
    for trial in range(100):
        n = rng.randint(1, 400)
        p = rng.random()
        sample = [1.0 if rng.random() < p else 0.0 for _ in range(n)]
        metrics = bernoulli_metrics(sample)
        # independent brute force: population sigma from squared deviations
        mean = sum(sample) / n
        sigma = math.sqrt(sum((x - mean) ** 2 for x in sample) / n)
        expected = sigma / math.sqrt(n)
        assert abs(metrics.std_error - expected) < 1e-12
        assert abs(metrics.success_rate - mean) < 1e-12
        assert 0.0 <= metrics.success_rate <= 1.0
    report("A11", "sigma/sqrt(n) verified on {1,1,1,0} and 100 random Bernoulli samples")


def test_A12_replay_full_study_clean(tmp_path):
    start = time.perf_counter()
    study = make_study(load_benchmark("synthetic"), [oracle_args()], root=tmp_path)
    study.run(n_jobs=4)
    report_obj = replay_study(study)
    assert len(report_obj.episodes) == 50
    assert report_obj.verified
    for episode in report_obj.episodes:
        assert episode.diverged_at is None
        for step in episode.steps:
            assert step.prompt_diff == "" and step.obs_diff == ""
    elapsed = time.perf_counter() - start
    assert elapsed < 120.0
    report("A12", f"50 episodes replayed with empty diffs in {elapsed:.1f}s")


def test_A13_crash_resumability_subprocess_kill(tmp_path):
    from webgym.study import Study

    bench = load_benchmark("synthetic")
    interrupted = make_study(bench, [oracle_args()], root=tmp_path / "killed", study_id="killed")

    proc = subprocess.Popen(
        [
            sys.executable,
            "-m",
            "webgym.cli",
            "study",
            "run",
            str(interrupted.dir),
            "--n-jobs",
            "2",
            "--throttle-ms",
            "60",
        ],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )

    def finished_count() -> int:
        return len(list((interrupted.dir).glob("agent_*/*/result.json")))

    deadline = time.monotonic() + 60
    while time.monotonic() < deadline:
        if finished_count() >= 25 or proc.poll() is not None:
            break
        time.sleep(0.02)
    killed_mid_run = proc.poll() is None
    if killed_mid_run:
        os.kill(proc.pid, signal.SIGKILL)
    proc.wait()

    resumed = Study.load(interrupted.dir)
    pending = resumed.find_incomplete(include_errors=True)
    assert killed_mid_run and pending, "runner was not interrupted mid-run; raise throttle"
    resumed.run(n_jobs=2)
    assert resumed.find_incomplete() == []

    reference = make_study(bench, [oracle_args()], root=tmp_path / "ref", study_id="ref")
    reference.run(n_jobs=1)

    assert episode_fingerprint(resumed) == episode_fingerprint(reference)
    resumed_metrics = resumed.aggregate()["generic-oracle"]
    reference_metrics = reference.aggregate()["generic-oracle"]
    assert (resumed_metrics.success_rate, resumed_metrics.std_error, resumed_metrics.n) == (
        reference_metrics.success_rate,
        reference_metrics.std_error,
        reference_metrics.n,
    )
    report("A13", f"SIGKILL at {len(pending)} pending episodes; resume matched the uninterrupted run exactly")
