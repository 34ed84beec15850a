"""Study lifecycle: enumeration, materialization on disk, parallel execution
with bounded relaunch, resumability, and aggregation.

Directory layout (append-friendly, crash-tolerant):

    <root>/<study_id>/
      study.json                       # manifest + repro info
      agent_0/<task_id>.<seed>.<attempt>/
        spec.json                      # written when the attempt starts
        steps.jsonl                    # one record per step, appended live
        result.json                    # written last, atomically; its absence
                                       # marks the attempt incomplete

Relaunch policy: an attempt that ends in status ``error`` is retried with
attempt+1, up to 3 relaunches (4 attempts total). ``failure`` is final.
"""

from __future__ import annotations

import datetime as _dt
import json
import logging
import os
import platform
import re
import subprocess
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .. import __version__
from ..agents.base import AgentArgs, agent_args_from_dict
from ..errors import ConfigurationError
from ..llm import Usage
from ..tasks import Benchmark, benchmark_episodes, benchmark_from_dict, dependency_order, prepare_backend
from .metrics import AggregationError, Metrics, bernoulli_metrics
from .runner import run_episode
from .scheduler import WorkItem, run_pool

logger = logging.getLogger(__name__)

MAX_RELAUNCHES = 3

STATUS_SUCCESS = "success"
STATUS_FAILURE = "failure"
STATUS_ERROR = "error"
STATUS_INCOMPLETE = "incomplete"


class StudyAborted(Exception):
    """The pool stopped before finishing; the study directory is resumable."""


@dataclass(frozen=True)
class EpisodeSpec:
    agent_index: int
    task_id: str
    seed: int
    max_steps: int
    attempt: int = 0

    def __post_init__(self):
        if not 0 <= self.attempt <= MAX_RELAUNCHES:
            raise ValueError(f"attempt must be within [0, {MAX_RELAUNCHES}]")

    @property
    def episode_id(self) -> str:
        return f"{self.agent_index}:{self.task_id}:{self.seed}:{self.attempt}"

    def dirname(self) -> str:
        return f"{self.task_id}.{self.seed}.{self.attempt}"

    def to_dict(self) -> dict:
        return {
            "agent_index": self.agent_index,
            "task_id": self.task_id,
            "seed": self.seed,
            "max_steps": self.max_steps,
            "attempt": self.attempt,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EpisodeSpec":
        return cls(**{k: d[k] for k in ("agent_index", "task_id", "seed", "max_steps", "attempt")})


@dataclass
class EpisodeResult:
    status: str
    reward: float
    n_steps: int
    usage: Usage = field(default_factory=Usage)
    elapsed_ms: float = 0.0
    error_message: str | None = None

    def __post_init__(self):
        if self.status == STATUS_ERROR and not self.error_message:
            raise ValueError("error results must carry an error message")

    @property
    def success(self) -> bool:
        return self.reward >= 1.0

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "reward": self.reward,
            "n_steps": self.n_steps,
            "usage": self.usage.to_dict(),
            "elapsed_ms": self.elapsed_ms,
            "error_message": self.error_message,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EpisodeResult":
        return cls(
            status=d["status"],
            reward=float(d["reward"]),
            n_steps=int(d["n_steps"]),
            usage=Usage.from_dict(d.get("usage", {})),
            elapsed_ms=float(d.get("elapsed_ms", 0.0)),
            error_message=d.get("error_message"),
        )


def collect_repro_info(benchmark: Benchmark) -> dict[str, str]:
    return {
        "benchmark_version": benchmark.version,
        "package_version": __version__,
        "commit_hash": _git_commit(),
        "os_version": platform.platform(),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def _git_commit() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"],
            capture_output=True,
            text=True,
            timeout=5,
            cwd=os.path.dirname(os.path.abspath(__file__)),
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return "unknown"


def _atomic_write_json(path: Path, data: dict) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(data, indent=2, sort_keys=True))
    os.replace(tmp, path)


def read_steps(path: Path) -> list[dict]:
    """Tolerant JSONL reader: a torn trailing line (crash mid-append) is
    dropped with a warning instead of poisoning the episode."""
    if not path.exists():
        return []
    records = []
    for line in path.read_text().splitlines():
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError:
            logger.warning("dropping torn step record in %s", path)
    return records


class Study:
    def __init__(
        self,
        study_id: str,
        benchmark: Benchmark,
        agent_args_list: list[AgentArgs],
        comment: str,
        episodes: list[EpisodeSpec],
        repro_info: dict[str, str],
        directory: Path,
    ):
        self.id = study_id
        self.benchmark = benchmark
        self.agent_args_list = list(agent_args_list)
        self.comment = comment
        self.episodes = list(episodes)
        self.repro_info = dict(repro_info)
        self.dir = Path(directory)

    # -- construction / persistence --------------------------------------

    @classmethod
    def make(
        cls,
        benchmark: Benchmark,
        agent_args_list: list[AgentArgs],
        comment: str = "",
        root: str | Path = "studies",
        seeds_per_task: int | None = None,
        study_id: str | None = None,
    ) -> "Study":
        benchmark.validate()
        if study_id is None:
            stamp = _dt.datetime.now().strftime("%Y-%m-%d_%H-%M-%S")
            study_id = f"{stamp}_{benchmark.name}_{uuid.uuid4().hex[:6]}"
        directory = Path(root) / study_id
        if directory.exists():
            raise ConfigurationError(f"study directory {directory} already exists")
        episodes = []
        for agent_index in range(len(agent_args_list)):
            for ep in benchmark_episodes(benchmark, seeds_per_task):
                episodes.append(
                    EpisodeSpec(
                        agent_index=agent_index,
                        task_id=ep.task_id,
                        seed=ep.seed,
                        max_steps=ep.max_steps,
                    )
                )
        study = cls(
            study_id=study_id,
            benchmark=benchmark,
            agent_args_list=agent_args_list,
            comment=comment,
            episodes=episodes,
            repro_info=collect_repro_info(benchmark),
            directory=directory,
        )
        directory.mkdir(parents=True)
        study.save()
        return study

    def save(self) -> None:
        _atomic_write_json(
            self.dir / "study.json",
            {
                "id": self.id,
                "comment": self.comment,
                "benchmark": self.benchmark.to_dict(),
                "agent_args": [a.to_dict() for a in self.agent_args_list],
                "episodes": [e.to_dict() for e in self.episodes],
                "repro_info": self.repro_info,
            },
        )

    @classmethod
    def load(cls, directory: str | Path) -> "Study":
        directory = Path(directory)
        manifest_path = directory / "study.json"
        if not manifest_path.exists():
            raise ConfigurationError(f"{directory} is not a study directory (no study.json)")
        data = json.loads(manifest_path.read_text())
        benchmark = benchmark_from_dict(data["benchmark"])
        from ..tasks import ensure_synthetic_registered, ensure_wide_registered

        ensure_synthetic_registered()
        ensure_wide_registered()
        benchmark.validate()
        return cls(
            study_id=data["id"],
            benchmark=benchmark,
            agent_args_list=[agent_args_from_dict(a) for a in data["agent_args"]],
            comment=data.get("comment", ""),
            episodes=[EpisodeSpec.from_dict(e) for e in data["episodes"]],
            repro_info=data.get("repro_info", {}),
            directory=directory,
        )

    # -- directory helpers -------------------------------------------------

    def agent_name(self, agent_index: int) -> str:
        return self.agent_args_list[agent_index].agent_name

    def episode_dir(self, spec: EpisodeSpec) -> Path:
        return self.dir / f"agent_{spec.agent_index}" / spec.dirname()

    def base_specs(self, agent_index: int | None = None) -> list[EpisodeSpec]:
        return [e for e in self.episodes if agent_index is None or e.agent_index == agent_index]

    def latest_state(self, spec: EpisodeSpec) -> tuple[int, EpisodeResult | None, bool]:
        """(attempt, result, started) for the highest attempt on disk."""
        latest = 0
        result = None
        started = False
        for attempt in range(MAX_RELAUNCHES + 1):
            candidate = self.episode_dir(_with_attempt(spec, attempt))
            if not candidate.exists():
                break
            latest = attempt
            started = True
            result_path = candidate / "result.json"
            result = None
            if result_path.exists():
                try:
                    result = EpisodeResult.from_dict(json.loads(result_path.read_text()))
                except (json.JSONDecodeError, KeyError, ValueError):
                    logger.warning("corrupt result record in %s; treating episode as incomplete", candidate)
                    result = None
        return latest, result, started

    def final_result(self, spec: EpisodeSpec) -> EpisodeResult | None:
        """The episode's settled result, or None while it can still run."""
        attempt, result, _ = self.latest_state(spec)
        if result is None:
            return None
        if result.status == STATUS_ERROR and attempt < MAX_RELAUNCHES:
            return None
        return result

    # -- lifecycle ----------------------------------------------------------

    def find_incomplete(self, include_errors: bool = True) -> list[EpisodeSpec]:
        """Episodes still pending: never finished, torn by a crash, or (when
        requested) finished with a relaunchable error."""
        pending = []
        for spec in self.base_specs():
            attempt, result, _ = self.latest_state(spec)
            if result is None:
                pending.append(_with_attempt(spec, attempt))
            elif include_errors and result.status == STATUS_ERROR and attempt < MAX_RELAUNCHES:
                pending.append(_with_attempt(spec, attempt + 1))
        return pending

    def run(
        self,
        n_jobs: int = 1,
        throttle_ms: float = 0.0,
        abort_after: int | None = None,
    ) -> None:
        """Execute every pending episode; agents run strictly sequentially with
        a backend preparation in between; errors relaunch up to 3 times.

        ``throttle_ms`` delays each episode start (a crash-window hook for
        resumability tests); ``abort_after`` hard-stops the pool after that
        many episode completions, simulating an interrupted runner.
        """
        abort_event = threading.Event()
        completed = 0
        counter_lock = threading.Lock()

        def on_result(item, result) -> None:
            nonlocal completed
            with counter_lock:
                completed += 1
                if abort_after is not None and completed >= abort_after:
                    abort_event.set()

        edges = dependency_order(self.benchmark)
        for agent_index, agent_args in enumerate(self.agent_args_list):
            prepare_backend(self.benchmark)
            agent_args.set_benchmark(self.benchmark)
            agent_args.prepare()
            for _pass in range(MAX_RELAUNCHES + 1):
                if abort_event.is_set():
                    raise StudyAborted(f"study aborted after {completed} episode completions")
                todo = self._pending_for(agent_index)
                if not todo:
                    break
                items = [
                    WorkItem(key=spec.episode_id, task_id=spec.task_id, seed=spec.seed, payload=spec)
                    for spec in todo
                ]
                run_pool(
                    items,
                    edges,
                    n_jobs,
                    lambda item: self._execute(item.payload, throttle_ms),
                    abort_event=abort_event,
                    on_result=on_result,
                )
        if abort_event.is_set() and self.find_incomplete(include_errors=True):
            raise StudyAborted(f"study aborted after {completed} episode completions")

    def _pending_for(self, agent_index: int) -> list[EpisodeSpec]:
        todo = []
        for spec in self.base_specs(agent_index):
            attempt, result, _ = self.latest_state(spec)
            if result is None:
                todo.append(_with_attempt(spec, attempt))
            elif result.status == STATUS_ERROR and attempt < MAX_RELAUNCHES:
                todo.append(_with_attempt(spec, attempt + 1))
        return todo

    def _execute(self, spec: EpisodeSpec, throttle_ms: float) -> EpisodeResult:
        if throttle_ms:
            time.sleep(throttle_ms / 1000.0)
        directory = self.episode_dir(spec)
        directory.mkdir(parents=True, exist_ok=True)
        steps_path = directory / "steps.jsonl"
        if steps_path.exists():
            steps_path.unlink()  # a torn previous run of this same attempt
        _atomic_write_json(directory / "spec.json", spec.to_dict())

        with steps_path.open("a") as steps_file:

            def write_step(record: dict) -> None:
                steps_file.write(json.dumps(record) + "\n")
                steps_file.flush()

            outcome = run_episode(
                task_id=spec.task_id,
                seed=spec.seed,
                max_steps=spec.max_steps,
                agent_args=self.agent_args_list[spec.agent_index],
                action_categories=self.benchmark.suggested_action_categories,
                write_step=write_step,
            )
        result = EpisodeResult(
            status=outcome.status,
            reward=outcome.reward,
            n_steps=outcome.n_steps,
            usage=outcome.usage,
            elapsed_ms=outcome.elapsed_ms,
            error_message=outcome.error_message,
        )
        _atomic_write_json(directory / "result.json", result.to_dict())
        return result

    # -- reporting -----------------------------------------------------------

    def results(self, agent_index: int) -> dict[EpisodeSpec, EpisodeResult]:
        out = {}
        for spec in self.base_specs(agent_index):
            attempt, result, _ = self.latest_state(spec)
            if result is not None:
                out[_with_attempt(spec, attempt)] = result
        return out

    def aggregate(self) -> dict[str, Metrics]:
        """Metrics per agent over finished episodes, with per-category
        breakdowns from task metadata. Raises when nothing finished."""
        aggregates: dict[str, Metrics] = {}
        for agent_index in range(len(self.agent_args_list)):
            finished = self.results(agent_index)
            if not finished:
                continue
            indicators = [1.0 if r.success else 0.0 for r in finished.values()]
            metrics = bernoulli_metrics(indicators)
            by_category: dict[str, list[float]] = {}
            for spec, result in finished.items():
                category = self.benchmark.task_by_id(spec.task_id).metadata.get("category", "uncategorized")
                by_category.setdefault(category, []).append(1.0 if result.success else 0.0)
            metrics.per_category = {
                category: bernoulli_metrics(values) for category, values in sorted(by_category.items())
            }
            aggregates[self.agent_name(agent_index)] = metrics
        if not aggregates:
            raise AggregationError(f"study {self.id} has no finished episodes to aggregate")
        return aggregates

    def total_usage(self) -> Usage:
        total = Usage()
        for agent_index in range(len(self.agent_args_list)):
            for result in self.results(agent_index).values():
                total = total + result.usage
        return total


def _with_attempt(spec: EpisodeSpec, attempt: int) -> EpisodeSpec:
    if spec.attempt == attempt:
        return spec
    return EpisodeSpec(
        agent_index=spec.agent_index,
        task_id=spec.task_id,
        seed=spec.seed,
        max_steps=spec.max_steps,
        attempt=attempt,
    )


def make_study(
    benchmark: Benchmark,
    agent_args_list: list[AgentArgs],
    comment: str = "",
    root: str | Path = "studies",
    seeds_per_task: int | None = None,
    study_id: str | None = None,
) -> Study:
    return Study.make(
        benchmark,
        agent_args_list,
        comment=comment,
        root=root,
        seeds_per_task=seeds_per_task,
        study_id=study_id,
    )


def parse_episode_id(episode_id: str) -> tuple[int, str, int, int]:
    match = re.fullmatch(r"(\d+):(.+):(\d+):(\d+)", episode_id)
    if match is None:
        raise ConfigurationError(f"malformed episode id {episode_id!r}")
    return int(match.group(1)), match.group(2), int(match.group(3)), int(match.group(4))
