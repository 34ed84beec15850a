"""Task registry and the shared fixture store.

Tasks register a factory (typically a class) under a globally unique id;
environments instantiate one task object per episode. The registry is
populated at import time for the built-in suites and is immutable from the
scheduler's perspective once a study starts.
"""

from __future__ import annotations

import inspect
import os
import threading
from dataclasses import dataclass, field
from typing import Callable, Protocol, runtime_checkable

from ..errors import ConfigurationError


@runtime_checkable
class Task(Protocol):
    def setup(self, backend, seed: int):
        """Bring the backend to the task's starting point; returns the goal."""
        ...

    def validate(self, backend, chat) -> tuple[float, bool, str | None]:
        """Pure read of page/chat state: (reward, done, optional chat message)."""
        ...


@dataclass(frozen=True)
class TaskSpec:
    id: str
    template: str
    seed_diversity: str = "high"  # none | medium | high
    default_max_steps: int = 10
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.seed_diversity not in ("none", "medium", "high"):
            raise ConfigurationError(f"invalid seed_diversity {self.seed_diversity!r}")
        if self.default_max_steps < 1:
            raise ConfigurationError("default_max_steps must be >= 1")


_registry: dict[str, tuple[Callable, TaskSpec]] = {}
_lock = threading.Lock()


def register_task(task_id: str, factory: Callable, spec: TaskSpec | None = None) -> None:
    """Make a task constructible via make_env. The factory is called with the
    task id if it accepts an argument, else with no arguments."""
    with _lock:
        if task_id in _registry:
            raise ConfigurationError(f"task id {task_id!r} is already registered")
        _registry[task_id] = (factory, spec or TaskSpec(id=task_id, template=task_id))


def is_registered(task_id: str) -> bool:
    return task_id in _registry


def registered_task_ids() -> list[str]:
    return sorted(_registry)


def get_task_spec(task_id: str) -> TaskSpec:
    try:
        return _registry[task_id][1]
    except KeyError:
        raise ConfigurationError(f"unknown task {task_id!r}; register it first") from None


def create_task(task_id: str) -> Task:
    try:
        factory, _ = _registry[task_id]
    except KeyError:
        raise ConfigurationError(f"unknown task {task_id!r}; register it first") from None
    try:
        params = inspect.signature(factory).parameters
    except (TypeError, ValueError):
        params = {}
    if len([p for p in params.values() if p.default is inspect.Parameter.empty and p.kind in (p.POSITIONAL_ONLY, p.POSITIONAL_OR_KEYWORD)]) >= 1:
        return factory(task_id)
    return factory()


def clear_registry_for_tests() -> None:
    """Test hook; never used by the runtime."""
    with _lock:
        _registry.clear()


class FixtureStore:
    """Cross-episode key-value store for task fixtures.

    The synthetic suite does not need shared state, but external suites may;
    backend preparation wipes it so every agent starts from pristine fixtures.
    """

    def __init__(self):
        self._data: dict[str, object] = {}
        self._path: str | None = None
        self._lock = threading.Lock()

    def configure_path(self, path: str | None) -> None:
        self._path = path

    def verify(self) -> None:
        if self._path is not None and not os.path.isdir(self._path):
            raise ConfigurationError(f"fixture path {self._path!r} does not exist")

    def get(self, key: str, default=None):
        with self._lock:
            return self._data.get(key, default)

    def put(self, key: str, value) -> None:
        with self._lock:
            self._data[key] = value

    def reset(self) -> None:
        with self._lock:
            self._data.clear()


fixtures = FixtureStore()
