"""Ready-queue scheduler over the task dependency DAG.

Episodes are handed to a pool of worker threads. An episode becomes ready
only once every episode of every predecessor task has finished; assignment
order among ready episodes is FIFO by (task_id, seed) so work distribution is
deterministic even though completion order is not. Episode state is never
shared between workers; the scheduler only passes specs out and results back.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Callable, Hashable, Sequence


@dataclass(frozen=True)
class WorkItem:
    key: Hashable
    task_id: str
    seed: int
    payload: object = None


@dataclass
class Timing:
    start: float
    end: float


def run_pool(
    items: Sequence[WorkItem],
    dependency_edges: Sequence[tuple[str, str]],
    n_jobs: int,
    execute: Callable[[WorkItem], object],
    abort_event: threading.Event | None = None,
    on_result: Callable[[WorkItem, object], None] | None = None,
) -> tuple[dict, dict]:
    """Run all items on at most n_jobs workers; returns (results, timings).

    ``execute`` must not raise; episode-level failures belong in its return
    value. A set abort_event stops new assignments but lets running items
    finish, leaving the remainder untouched.
    """
    if n_jobs < 1:
        raise ValueError("n_jobs must be >= 1")
    ordered = sorted(items, key=lambda item: (item.task_id, item.seed))
    tasks_present = {item.task_id for item in ordered}
    predecessors: dict[str, set[str]] = {t: set() for t in tasks_present}
    for before, after in dependency_edges:
        if after in predecessors and before in tasks_present:
            predecessors[after].add(before)

    remaining_per_task: dict[str, int] = {}
    for item in ordered:
        remaining_per_task[item.task_id] = remaining_per_task.get(item.task_id, 0) + 1

    lock = threading.Lock()
    cond = threading.Condition(lock)
    pending = list(ordered)
    completed_tasks: set[str] = set()
    results: dict = {}
    timings: dict = {}
    in_flight = 0

    def ready(item: WorkItem) -> bool:
        return predecessors[item.task_id] <= completed_tasks

    def next_item() -> WorkItem | None:
        for i, item in enumerate(pending):
            if ready(item):
                return pending.pop(i)
        return None

    def aborted() -> bool:
        return abort_event is not None and abort_event.is_set()

    def worker() -> None:
        nonlocal in_flight
        while True:
            with cond:
                while True:
                    if aborted() or (not pending and in_flight == 0):
                        return
                    item = next_item()
                    if item is not None:
                        in_flight += 1
                        break
                    # nothing ready: either blocked on deps or queue drained
                    cond.wait(timeout=0.05)
            start = time.perf_counter()
            result = execute(item)
            end = time.perf_counter()
            with cond:
                results[item.key] = result
                timings[item.key] = Timing(start=start, end=end)
                remaining_per_task[item.task_id] -= 1
                if remaining_per_task[item.task_id] == 0:
                    completed_tasks.add(item.task_id)
                in_flight -= 1
                if on_result is not None:
                    on_result(item, result)
                cond.notify_all()

    threads = [threading.Thread(target=worker, name=f"episode-worker-{i}") for i in range(min(n_jobs, max(1, len(ordered))))]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    return results, timings
