"""Replay with prompt and observation diffing.

Re-runs a recorded episode on the same task seed with a playback model that
re-emits the recorded think/action pairs, rebuilding prompts through the
original agent flags. Empty diffs at every step mean the run reproduced
exactly; the first non-empty diff localizes what drifted.
"""

from __future__ import annotations

import difflib
import json
from dataclasses import dataclass, field, replace

from ..agents.generic import GenericAgentArgs
from ..agents.replay import PlaybackModel
from ..env import EnvConfig, make_env
from ..errors import ConfigurationError
from ..llm import AbstractChatModel, ModelArgs
from .study import EpisodeSpec, Study, read_steps


class ReplayError(Exception):
    pass


@dataclass
class StepReplay:
    index: int
    action: str
    prompt_diff: str
    obs_diff: str
    outcome_mismatch: str = ""

    @property
    def clean(self) -> bool:
        return not (self.prompt_diff or self.obs_diff or self.outcome_mismatch)

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "action": self.action,
            "prompt_diff": self.prompt_diff,
            "obs_diff": self.obs_diff,
            "outcome_mismatch": self.outcome_mismatch,
            "clean": self.clean,
        }


@dataclass
class EpisodeReplay:
    episode_id: str
    steps: list[StepReplay] = field(default_factory=list)
    diverged_at: int | None = None

    @property
    def verified(self) -> bool:
        return self.diverged_at is None and all(s.clean for s in self.steps)

    def to_dict(self) -> dict:
        return {
            "episode_id": self.episode_id,
            "diverged_at": self.diverged_at,
            "verified": self.verified,
            "steps": [s.to_dict() for s in self.steps],
        }


@dataclass
class ReplayReport:
    episodes: list[EpisodeReplay] = field(default_factory=list)

    @property
    def verified(self) -> bool:
        return all(e.verified for e in self.episodes)

    def to_dict(self) -> dict:
        return {"verified": self.verified, "episodes": [e.to_dict() for e in self.episodes]}


@dataclass
class _PlaybackArgs(ModelArgs):
    model_name: str = "playback"
    _model: AbstractChatModel | None = None

    def make_model(self) -> AbstractChatModel:
        return self._model


def _unified(recorded: str, replayed: str) -> str:
    if recorded == replayed:
        return ""
    return "\n".join(
        difflib.unified_diff(
            recorded.splitlines(), replayed.splitlines(), fromfile="recorded", tofile="replayed", lineterm=""
        )
    )


def _obs_text(obs: dict) -> str:
    return json.dumps(obs, indent=1, sort_keys=True)


def replay_episode(study: Study, spec: EpisodeSpec) -> EpisodeReplay:
    directory = study.episode_dir(spec)
    records = read_steps(directory / "steps.jsonl")
    if not records:
        raise ReplayError(f"episode {spec.episode_id} has no step log at {directory}")

    agent_args = study.agent_args_list[spec.agent_index]
    if not isinstance(agent_args, GenericAgentArgs):
        raise ReplayError(f"episode {spec.episode_id} was not run by a replayable agent")
    playback = PlaybackModel([(r.get("think", ""), r["action"]) for r in records])
    agent = replace(agent_args, model=_PlaybackArgs(_model=playback)).make_agent()

    config = EnvConfig(
        task_id=spec.task_id,
        seed=spec.seed,
        max_steps=spec.max_steps,
        action_subset=frozenset(study.benchmark.suggested_action_categories),
        record_traces=False,
    )
    env = make_env(spec.task_id, config)
    out = EpisodeReplay(episode_id=spec.episode_id)

    obs, _ = env.reset(spec.seed)
    for index, record in enumerate(records):
        processed = agent.obs_preprocessor(obs)
        action_text, info = agent.get_action(processed)
        prompt = info.chat_messages[0]["content"] if info.chat_messages else ""
        step = StepReplay(
            index=index,
            action=action_text,
            prompt_diff=_unified(record.get("prompt", ""), prompt),
            obs_diff=_unified(_obs_text(record.get("obs", {})), _obs_text(processed.to_dict())),
        )
        result = env.step(action_text)
        mismatches = []
        if action_text != record["action"]:
            mismatches.append(f"action: recorded {record['action']!r}, replayed {action_text!r}")
        if result.reward != record.get("reward"):
            mismatches.append(f"reward: recorded {record.get('reward')}, replayed {result.reward}")
        if result.terminated != record.get("terminated") or result.truncated != record.get("truncated"):
            mismatches.append("termination flags differ")
        new_error = result.observation.last_action_error
        if new_error != record.get("last_action_error", ""):
            mismatches.append(
                f"action error: recorded {record.get('last_action_error', '')!r}, replayed {new_error!r}"
            )
        step.outcome_mismatch = "; ".join(mismatches)
        out.steps.append(step)
        if not step.clean:
            out.diverged_at = index
            break
        obs = result.observation
        if result.terminated or result.truncated:
            break
    return out


def replay_study(study: Study, episode_id: str | None = None) -> ReplayReport:
    """Replay one episode by id, or every finished episode when id is None."""
    report = ReplayReport()
    if episode_id is not None:
        spec = _find_spec(study, episode_id)
        report.episodes.append(replay_episode(study, spec))
        return report
    for agent_index in range(len(study.agent_args_list)):
        for spec in sorted(study.results(agent_index), key=lambda s: (s.task_id, s.seed)):
            report.episodes.append(replay_episode(study, spec))
    return report


def _find_spec(study: Study, episode_id: str) -> EpisodeSpec:
    from .study import parse_episode_id

    agent_index, task_id, seed, attempt = parse_episode_id(episode_id)
    for spec in study.base_specs(agent_index):
        if spec.task_id == task_id and spec.seed == seed:
            return EpisodeSpec(
                agent_index=agent_index,
                task_id=task_id,
                seed=seed,
                max_steps=spec.max_steps,
                attempt=attempt,
            )
    raise ConfigurationError(f"episode {episode_id!r} not found in study {study.id}")
