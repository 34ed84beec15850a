import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from webgym.actions import ActionSetConfig
from webgym.agents import (
    GenericAgentArgs,
    HistoryStep,
    ObsFlags,
    ProcessedObs,
    build_generic_prompt,
    default_obs_preprocessor,
    fit_tokens,
    parse_answer,
)
from webgym.agents.flags import ReasoningFlags
from webgym.agents.generic import AnswerFormatError, CONCRETE_EXAMPLE
from webgym.agents.prompt import (
    SHRINK_DROP_OLDEST,
    SHRINK_ELIDE_MIDDLE,
    SHRINK_TRUNCATE_BOTTOM,
    PromptComponent,
)
from webgym.env import make_env
from webgym.errors import ConfigurationError
from webgym.tokens import count_tokens


def test_count_tokens_words_and_punctuation():
    assert count_tokens("click the button") == 3
    assert count_tokens("click('a12')") == 6
    assert count_tokens("") == 0


# -- parse_answer ------------------------------------------------------------


def test_parse_answer_concrete_example():
    think, action = parse_answer(CONCRETE_EXAMPLE)
    assert think.startswith("From previous action I tried")
    assert action == "click('a324')"


def test_parse_answer_action_only():
    think, action = parse_answer("<action>noop()</action>")
    assert think == ""
    assert action == "noop()"


def test_parse_answer_last_blocks_win():
    completion = (
        "<think>first</think><action>click('1')</action>\n"
        "<think>second</think><action>click('2')</action>"
    )
    think, action = parse_answer(completion)
    assert think == "second"
    assert action == "click('2')"


def test_parse_answer_missing_action_fails():
    with pytest.raises(AnswerFormatError):
        parse_answer("<think>only thoughts</think>")
    with pytest.raises(AnswerFormatError):
        parse_answer("free text")
    with pytest.raises(AnswerFormatError):
        parse_answer("<action>   </action>")


# -- fit_tokens ---------------------------------------------------------------


def components_fixture():
    goal = PromptComponent(label="instructions", text="# Instructions\n\nGoal: reach the target page")
    history = PromptComponent(
        label="history",
        header="# History:",
        items=[f"## step {i}\n\naction {i} with some words" for i in range(5)],
        shrink=SHRINK_DROP_OLDEST,
        shrink_priority=0,
    )
    html = PromptComponent(
        label="html",
        header="## HTML:",
        text="\n".join(f"<div>html row {i} alpha beta gamma</div>" for i in range(30)),
        shrink=SHRINK_TRUNCATE_BOTTOM,
        shrink_priority=10,
    )
    axtree = PromptComponent(
        label="axtree",
        header="## AXTree:",
        text="\n".join(f"[{i}] link 'row {i} delta epsilon'" for i in range(30)),
        shrink=SHRINK_TRUNCATE_BOTTOM,
        shrink_priority=20,
    )
    return [goal, history, html, axtree]


def test_fit_under_budget_is_plain_concatenation():
    components = components_fixture()
    full = "\n\n".join(c.render() for c in components)
    stats = {}
    assert fit_tokens(components_fixture(), count_tokens(full), stats=stats) == full
    assert stats["n_shrinks"] == 0


def test_fit_drops_oldest_history_first():
    components = components_fixture()
    full_tokens = count_tokens("\n\n".join(c.render() for c in components))
    stats = {}
    text = fit_tokens(components, full_tokens - 5, stats=stats)
    assert stats["shrink_events"][0] == "history"
    assert "## step 0" not in text
    assert "## step 4" in text


def test_fit_shrink_order_history_html_axtree():
    components = components_fixture()
    stats = {}
    fit_tokens(components, 60, stats=stats)
    events = stats["shrink_events"]
    assert set(events) >= {"history", "html"}
    # once a later stage starts, earlier stages never shrink again
    first_html = events.index("html")
    assert all(e != "history" for e in events[first_html:])
    if "axtree" in events:
        first_ax = events.index("axtree")
        assert all(e == "axtree" for e in events[first_ax:])


def test_fit_budget_met_and_goal_survives():
    components = components_fixture()
    full = count_tokens("\n\n".join(c.render() for c in components))
    for budget in (full, full // 2, full // 4):
        out = fit_tokens(components_fixture(), budget)
        assert count_tokens(out) <= budget
        assert "Goal: reach the target page" in out


def test_fit_floor_error():
    components = [PromptComponent(label="instructions", text="words " * 50)]
    with pytest.raises(ConfigurationError):
        fit_tokens(components, 10)


def test_fit_overflow_flagged_when_nothing_left_to_shrink():
    components = [
        PromptComponent(label="instructions", text="goal text"),
        PromptComponent(
            label="axtree",
            text="one line only",
            shrink=SHRINK_TRUNCATE_BOTTOM,
            shrink_priority=20,
        ),
    ]
    stats = {}
    fit_tokens(components, count_tokens("goal text") + 1, stats=stats)
    assert stats["overflow"] == 1


def test_elide_middle_keeps_head_and_tail():
    component = PromptComponent(
        label="log",
        text="\n".join(f"line {i}" for i in range(20)),
        shrink=SHRINK_ELIDE_MIDDLE,
        shrink_priority=5,
    )
    before = count_tokens(component.render())
    component.shrink_once(count_tokens)
    out = component.render()
    assert count_tokens(out) < before
    assert "line 0" in out and "line 19" in out and "..." in out


@settings(max_examples=60, deadline=None)
@given(budget_fraction=st.floats(0.2, 1.0))
def test_fit_monotone_under_any_budget(budget_fraction):
    components = components_fixture()
    full = count_tokens("\n\n".join(c.render() for c in components))
    floor = count_tokens(components[0].render())
    budget = max(floor + 1, int(full * budget_fraction))
    out = fit_tokens(components, budget)
    assert count_tokens(out) <= max(budget, floor + 1)


# -- generic prompt assembly ---------------------------------------------------


def processed_fixture(**overrides) -> ProcessedObs:
    defaults = dict(
        goal_text="Reach the target page.",
        chat=[{"role": "user", "parts": [{"kind": "text", "text": "Reach the target page."}]}],
        open_pages_urls=["local://a", "local://b"],
        open_pages_titles=["A", "B"],
        active_page_index=1,
        axtree_txt="[1] button 'Go', clickable, visible",
        html_txt="<button bid=\"1\">Go</button>",
        focused_element_bid="1",
        last_action_error="",
    )
    defaults.update(overrides)
    return ProcessedObs(**defaults)


def assemble(obs, history=(), flags=None, reasoning=None):
    flags = flags or ObsFlags(use_html=True)
    components = build_generic_prompt(
        obs,
        list(history),
        flags,
        ActionSetConfig(enabled_categories=frozenset({"bid", "tab", "nav", "misc"})),
        reasoning or ReasoningFlags(),
    )
    return fit_tokens(components, 40000)


def test_prompt_section_order_matches_contract():
    history = [HistoryStep(think="I looked around.", action="click('79')")]
    text = assemble(processed_fixture(), history)
    order = [
        "# Instructions",
        "## Goal:",
        "# Observation of current step:",
        "## Currently open tabs:",
        "## AXTree:",
        "## HTML:",
        "## Focused element:",
        "# History of interaction with the task:",
        "## step 0",
        "# Action space:",
        "20 different types of actions are available.",
        "# Abstract Example",
        "# Concrete Example",
    ]
    positions = [text.index(marker) for marker in order]
    assert positions == sorted(positions)


def test_tabs_render_active_marker():
    text = assemble(processed_fixture())
    assert "Tab 0:" in text
    assert "Tab 1 (active tab):" in text
    assert "    Title: B" in text
    assert "    URL: local://b" in text


def test_error_section_only_when_error_present():
    assert "## Error from previous action:" not in assemble(processed_fixture())
    text = assemble(processed_fixture(last_action_error="TimeoutError: click: Timeout 500ms exceeded."))
    assert "## Error from previous action:" in text
    assert "Timeout 500ms exceeded" in text


def test_error_section_suppressed_by_flag():
    flags = ObsFlags(use_error_logs=False)
    text = assemble(processed_fixture(last_action_error="boom"), flags=flags)
    assert "boom" not in text


def test_html_excluded_unless_flagged():
    text = assemble(processed_fixture(), flags=ObsFlags())  # default: axtree only
    assert "## HTML:" not in text
    assert "## AXTree:" in text


def test_history_contents_follow_flags():
    history = [HistoryStep(think="hidden thought", action="click('1')", error="past failure")]
    base = processed_fixture()

    no_think = assemble(base, history, flags=ObsFlags(use_think_history=False))
    assert "hidden thought" not in no_think and "click('1')" in no_think

    no_actions = assemble(base, history, flags=ObsFlags(use_action_history=False))
    assert "<action>" not in no_actions.split("# Action space:")[0].split("# History")[1]

    with_past_errors = assemble(base, history, flags=ObsFlags(use_past_error_logs=True))
    assert "past failure" in with_past_errors

    without_history = assemble(base, history, flags=ObsFlags(use_history=False))
    assert "# History of interaction with the task:" not in without_history


def test_chat_section_lists_messages_beyond_goal():
    obs = processed_fixture(
        chat=[
            {"role": "user", "parts": [{"kind": "text", "text": "Reach the target page."}]},
            {"role": "user", "parts": [{"kind": "text", "text": "please hurry"}]},
        ]
    )
    text = assemble(obs)
    assert "## Chat messages:" in text
    assert "- user: please hurry" in text
    assert "## Chat messages:" not in assemble(processed_fixture())


def test_extra_instructions_added():
    text = assemble(processed_fixture(), reasoning=ReasoningFlags(extra_instructions="Prefer keyboard actions."))
    assert "Prefer keyboard actions." in text


def test_examples_toggle():
    reasoning = ReasoningFlags(use_abstract_example=False, use_concrete_example=False)
    text = assemble(processed_fixture(), reasoning=reasoning)
    assert "# Abstract Example" not in text
    assert "# Concrete Example" not in text


# -- obs preprocessor --------------------------------------------------------------


def test_default_preprocessor_drops_unflagged_texts():
    env = make_env("synth.click-button")
    obs, _ = env.reset(seed=0)
    axtree_only = default_obs_preprocessor(obs, ObsFlags())
    assert axtree_only.html_txt is None
    assert axtree_only.axtree_txt
    both = default_obs_preprocessor(obs, ObsFlags(use_html=True))
    assert both.html_txt and both.html_txt.startswith("<body")


def test_preprocessor_filters_hidden_elements():
    env = make_env("qa.einstein")
    obs, _ = env.reset(seed=0)
    flags = ObsFlags(filter_visible_elements_only=True)
    processed = default_obs_preprocessor(obs, flags)
    for line in processed.axtree_txt.splitlines():
        assert "visible" in line or line.strip().startswith("StaticText")


def test_prompt_determinism_for_fixed_inputs():
    env = make_env("synth.enter-text")
    obs, _ = env.reset(seed=1)
    args = GenericAgentArgs()
    one = default_obs_preprocessor(obs, args.obs)
    two = default_obs_preprocessor(obs, args.obs)
    a = assemble(one)
    b = assemble(two)
    assert a == b


def test_screenshot_flags_rejected():
    with pytest.raises(ConfigurationError):
        ObsFlags(use_screenshot=True).validate()
    with pytest.raises(ConfigurationError):
        ObsFlags(use_som=True).validate()
    with pytest.raises(ConfigurationError):
        ReasoningFlags(use_plan=True).validate()
    with pytest.raises(ConfigurationError):
        ReasoningFlags(use_criticize=True).validate()
