from .journal import JOURNAL_COLUMNS, append_to_journal, read_journal
from .metrics import AggregationError, Metrics, bernoulli_metrics
from .replay import EpisodeReplay, ReplayError, ReplayReport, replay_episode, replay_study
from .runner import EpisodeOutcome, run_episode
from .scheduler import Timing, WorkItem, run_pool
from .study import (
    MAX_RELAUNCHES,
    EpisodeResult,
    EpisodeSpec,
    Study,
    StudyAborted,
    collect_repro_info,
    make_study,
    parse_episode_id,
    read_steps,
)

__all__ = [
    "AggregationError",
    "EpisodeOutcome",
    "EpisodeReplay",
    "EpisodeResult",
    "EpisodeSpec",
    "JOURNAL_COLUMNS",
    "MAX_RELAUNCHES",
    "Metrics",
    "ReplayError",
    "ReplayReport",
    "Study",
    "StudyAborted",
    "Timing",
    "WorkItem",
    "append_to_journal",
    "bernoulli_metrics",
    "collect_repro_info",
    "make_study",
    "parse_episode_id",
    "read_journal",
    "read_steps",
    "replay_episode",
    "replay_study",
    "run_episode",
    "run_pool",
]
