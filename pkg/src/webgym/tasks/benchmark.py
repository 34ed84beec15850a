"""Benchmark descriptors: metadata, splits, dependency DAG, and suggested
evaluation parameters, loaded from declarative JSON manifests."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..errors import ConfigurationError
from .registry import TaskSpec, fixtures, is_registered
from .synthetic import ensure_synthetic_registered, ensure_wide_registered


@dataclass(frozen=True)
class EpisodeSeed:
    task_id: str
    seed: int
    max_steps: int


@dataclass
class Benchmark:
    name: str
    version: str
    tasks: list[TaskSpec]
    dependency_edges: list[tuple[str, str]] = field(default_factory=list)
    suggested_action_categories: frozenset[str] = frozenset({"bid", "tab", "nav", "misc"})
    suggested_seeds_per_task: int = 5
    suggested_max_steps: int = 10
    split_assignment: dict[str, str] = field(default_factory=dict)
    # curriculum-style override: exact (task_id, seed) pairs instead of the
    # tasks x seeds product
    episode_list: list[tuple[str, int]] | None = None

    def validate(self) -> None:
        ids = [t.id for t in self.tasks]
        if len(set(ids)) != len(ids):
            raise ConfigurationError(f"benchmark {self.name!r} has duplicate task ids")
        known = set(ids)
        for task_id in ids:
            if not is_registered(task_id):
                raise ConfigurationError(
                    f"benchmark {self.name!r} references unregistered task {task_id!r}"
                )
        for before, after in self.dependency_edges:
            if before not in known or after not in known:
                raise ConfigurationError(
                    f"dependency edge ({before!r}, {after!r}) references a task outside the benchmark"
                )
        for task_id in ids:
            split = self.split_assignment.get(task_id)
            if split not in ("train", "test"):
                raise ConfigurationError(f"task {task_id!r} is missing a train/test split")
        if self.episode_list is not None:
            for task_id, _seed in self.episode_list:
                if task_id not in known:
                    raise ConfigurationError(
                        f"episode list references a task outside the benchmark: {task_id!r}"
                    )
        cycle = _find_cycle(known, self.dependency_edges)
        if cycle:
            raise ConfigurationError(
                f"benchmark {self.name!r} dependency graph has a cycle: {' -> '.join(cycle)}"
            )

    def task_by_id(self, task_id: str) -> TaskSpec:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise KeyError(task_id)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "version": self.version,
            "suggested": {
                "action_categories": sorted(self.suggested_action_categories),
                "seeds_per_task": self.suggested_seeds_per_task,
                "max_steps": self.suggested_max_steps,
            },
            "dependency_edges": [list(e) for e in self.dependency_edges],
            **({"episode_list": [list(e) for e in self.episode_list]} if self.episode_list is not None else {}),
            "tasks": [
                {
                    "id": t.id,
                    "template": t.template,
                    "seed_diversity": t.seed_diversity,
                    "default_max_steps": t.default_max_steps,
                    "metadata": dict(t.metadata),
                    "split": self.split_assignment[t.id],
                }
                for t in self.tasks
            ],
        }


def _find_cycle(nodes: set[str], edges: list[tuple[str, str]]) -> list[str] | None:
    adjacency: dict[str, list[str]] = {n: [] for n in nodes}
    for before, after in edges:
        adjacency[before].append(after)
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n: WHITE for n in nodes}
    stack: list[str] = []

    def visit(node: str) -> list[str] | None:
        color[node] = GRAY
        stack.append(node)
        for nxt in adjacency[node]:
            if color[nxt] == GRAY:
                return stack[stack.index(nxt):] + [nxt]
            if color[nxt] == WHITE:
                found = visit(nxt)
                if found:
                    return found
        stack.pop()
        color[node] = BLACK
        return None

    for n in sorted(nodes):
        if color[n] == WHITE:
            found = visit(n)
            if found:
                return found
    return None


def benchmark_from_dict(data: dict) -> Benchmark:
    tasks = []
    splits = {}
    for entry in data["tasks"]:
        spec = TaskSpec(
            id=entry["id"],
            template=entry.get("template", entry["id"]),
            seed_diversity=entry.get("seed_diversity", "high"),
            default_max_steps=int(entry.get("default_max_steps", data.get("suggested", {}).get("max_steps", 10))),
            metadata=dict(entry.get("metadata", {})),
        )
        tasks.append(spec)
        splits[spec.id] = entry.get("split", spec.metadata.get("split", "test"))
    suggested = data.get("suggested", {})
    episode_list = data.get("episode_list")
    benchmark = Benchmark(
        name=data["name"],
        version=str(data.get("version", "0")),
        tasks=tasks,
        dependency_edges=[tuple(e) for e in data.get("dependency_edges", [])],
        suggested_action_categories=frozenset(suggested.get("action_categories", ["bid", "tab", "nav", "misc"])),
        suggested_seeds_per_task=int(suggested.get("seeds_per_task", 5)),
        suggested_max_steps=int(suggested.get("max_steps", 10)),
        split_assignment=splits,
        episode_list=[(t, int(s)) for t, s in episode_list] if episode_list is not None else None,
    )
    return benchmark


def load_benchmark(name_or_path: str) -> Benchmark:
    """Load a benchmark by built-in name or manifest path, register its
    built-in tasks, and validate it."""
    ensure_synthetic_registered()
    ensure_wide_registered()
    path = Path(name_or_path)
    if path.suffix == ".json" and path.exists():
        data = json.loads(path.read_text())
    else:
        try:
            text = resources.files("webgym.tasks").joinpath(f"manifests/{name_or_path}.json").read_text()
        except FileNotFoundError:
            raise ConfigurationError(f"unknown benchmark {name_or_path!r}") from None
        data = json.loads(text)
    benchmark = benchmark_from_dict(data)
    benchmark.validate()
    return benchmark


def benchmark_episodes(benchmark: Benchmark, seeds_per_task: int | None = None) -> list[EpisodeSeed]:
    """Tasks x seeds, honoring seed diversity: a task with no seed diversity
    contributes a single episode regardless of the requested seed count. A
    benchmark with an explicit episode list enumerates exactly that list."""
    if benchmark.episode_list is not None:
        return [
            EpisodeSeed(task_id=task_id, seed=seed, max_steps=benchmark.task_by_id(task_id).default_max_steps)
            for task_id, seed in benchmark.episode_list
        ]
    seeds_per_task = seeds_per_task if seeds_per_task is not None else benchmark.suggested_seeds_per_task
    if seeds_per_task < 1:
        raise ConfigurationError("seeds_per_task must be >= 1")
    episodes: list[EpisodeSeed] = []
    for task in benchmark.tasks:
        n = 1 if task.seed_diversity == "none" else seeds_per_task
        for seed in range(n):
            episodes.append(EpisodeSeed(task_id=task.id, seed=seed, max_steps=task.default_max_steps))
    return episodes


def dependency_order(benchmark: Benchmark) -> list[tuple[str, str]]:
    """The scheduler's constraint set; cycles were rejected at load time."""
    return list(benchmark.dependency_edges)


def prepare_backend(benchmark: Benchmark) -> None:
    """Reset shared state between agent evaluations.

    Clears the fixture store and re-verifies task registration so every agent
    starts from pristine fixtures. Idempotent.
    """
    fixtures.verify()
    fixtures.reset()
    benchmark.validate()
