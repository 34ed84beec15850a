from .benchmark import (
    Benchmark,
    EpisodeSeed,
    benchmark_episodes,
    benchmark_from_dict,
    dependency_order,
    load_benchmark,
    prepare_backend,
)
from .registry import (
    FixtureStore,
    Task,
    TaskSpec,
    create_task,
    fixtures,
    get_task_spec,
    is_registered,
    register_task,
    registered_task_ids,
)
from .synthetic import (
    SYNTHETIC_TASK_IDS,
    TEMPLATES,
    TaskInstance,
    ensure_synthetic_registered,
    ensure_wide_registered,
)

__all__ = [
    "Benchmark",
    "EpisodeSeed",
    "FixtureStore",
    "SYNTHETIC_TASK_IDS",
    "TEMPLATES",
    "Task",
    "TaskInstance",
    "TaskSpec",
    "benchmark_episodes",
    "benchmark_from_dict",
    "create_task",
    "dependency_order",
    "ensure_synthetic_registered",
    "ensure_wide_registered",
    "fixtures",
    "get_task_spec",
    "is_registered",
    "load_benchmark",
    "prepare_backend",
    "register_task",
    "registered_task_ids",
]
