"""Append-only reproducibility journal.

One CSV row per (agent, benchmark) aggregate, carrying the study's version
fingerprints. Concurrent appends are serialized with an advisory file lock;
re-appending the same study is allowed but flagged in the duplicate column.
The column order below is frozen."""

from __future__ import annotations

import csv
import datetime as _dt
from pathlib import Path

JOURNAL_COLUMNS = [
    "study_id",
    "agent",
    "benchmark",
    "n_episodes",
    "success_rate",
    "std_error",
    "benchmark_version",
    "package_version",
    "commit_hash",
    "os_version",
    "timestamp",
    "duplicate",
]

try:
    import fcntl

    def _lock(handle):
        fcntl.flock(handle.fileno(), fcntl.LOCK_EX)

    def _unlock(handle):
        fcntl.flock(handle.fileno(), fcntl.LOCK_UN)

except ImportError:  # non-POSIX fallback: single-process best effort

    def _lock(handle):
        pass

    def _unlock(handle):
        pass


def append_to_journal(study, journal_path: str | Path) -> list[dict]:
    """Append one row per agent aggregate; returns the rows written."""
    journal_path = Path(journal_path)
    journal_path.parent.mkdir(parents=True, exist_ok=True)
    aggregates = study.aggregate()

    rows = []
    with journal_path.open("a+", newline="") as handle:
        _lock(handle)
        try:
            handle.seek(0)
            existing = list(csv.DictReader(handle))
            seen = {(r["study_id"], r["agent"], r["benchmark"]) for r in existing}
            handle.seek(0, 2)
            writer = csv.DictWriter(handle, fieldnames=JOURNAL_COLUMNS)
            if handle.tell() == 0:
                writer.writeheader()
            for agent_name, metrics in aggregates.items():
                key = (study.id, agent_name, study.benchmark.name)
                row = {
                    "study_id": study.id,
                    "agent": agent_name,
                    "benchmark": study.benchmark.name,
                    "n_episodes": metrics.n,
                    "success_rate": repr(metrics.success_rate),
                    "std_error": repr(metrics.std_error),
                    "benchmark_version": study.repro_info.get("benchmark_version", "unknown"),
                    "package_version": study.repro_info.get("package_version", "unknown"),
                    "commit_hash": study.repro_info.get("commit_hash", "unknown"),
                    "os_version": study.repro_info.get("os_version", "unknown"),
                    "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
                    "duplicate": "true" if key in seen else "false",
                }
                writer.writerow(row)
                rows.append(row)
        finally:
            _unlock(handle)
    return rows


def read_journal(journal_path: str | Path) -> list[dict]:
    journal_path = Path(journal_path)
    if not journal_path.exists():
        return []
    with journal_path.open(newline="") as handle:
        return list(csv.DictReader(handle))
