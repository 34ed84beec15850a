"""Single-episode execution: wires an environment to an agent, merges the
environment's trace record with the agent's prompt/think/usage into one step
log line, and classifies the outcome.

Status taxonomy: exceptions anywhere (task setup, transport, worker bugs) are
``error`` and relaunchable; exhausted answer parsing and zero-reward
completions are ``failure`` and final.
"""

from __future__ import annotations

import time
import traceback
from dataclasses import dataclass, field
from typing import Callable

from ..agents.base import AgentArgs
from ..env import EnvConfig, make_env
from ..llm import Usage

SUCCESS_REWARD = 1.0


@dataclass
class EpisodeOutcome:
    status: str  # success | failure | error
    reward: float
    n_steps: int
    usage: Usage = field(default_factory=Usage)
    elapsed_ms: float = 0.0
    error_message: str | None = None


def run_episode(
    task_id: str,
    seed: int,
    max_steps: int,
    agent_args: AgentArgs,
    action_categories: frozenset[str],
    write_step: Callable[[dict], None] | None = None,
    action_timeout_ms: int = 500,
) -> EpisodeOutcome:
    start = time.perf_counter()
    env_record: list[dict] = []

    def outcome(status: str, reward: float, n_steps: int, usage: Usage, error: str | None = None) -> EpisodeOutcome:
        return EpisodeOutcome(
            status=status,
            reward=reward,
            n_steps=n_steps,
            usage=usage,
            elapsed_ms=(time.perf_counter() - start) * 1000.0,
            error_message=error,
        )

    def agent_usage(agent) -> Usage:
        tracker = getattr(agent, "tracker", None)
        return tracker.totals() if tracker is not None else Usage()

    try:
        config = EnvConfig(
            task_id=task_id,
            seed=seed,
            max_steps=max_steps,
            action_subset=frozenset(action_categories),
            action_timeout_ms=action_timeout_ms,
            record_traces=True,
        )
        env = make_env(task_id, config)
        env.trace_sink = env_record.append
        agent = agent_args.make_agent()
    except Exception:
        return outcome("error", 0.0, 0, Usage(), traceback.format_exc())

    steps = 0
    try:
        obs, _ = env.reset(seed)
        while True:
            processed = agent.obs_preprocessor(obs)
            action_text, info = agent.get_action(processed)
            if action_text is None:
                retries = int(info.stats.get("n_retries", 0))
                return outcome(
                    "failure",
                    env.episode.cumulative_reward,
                    steps,
                    agent_usage(agent),
                    f"agent failed to produce a parsable answer after {retries} attempts",
                )
            result = env.step(action_text)
            steps += 1
            if write_step is not None:
                record = env_record.pop() if env_record else {"step": steps - 1, "action": action_text}
                record["obs"] = processed.to_dict()
                record["think"] = info.think
                record["prompt"] = info.chat_messages[0]["content"] if info.chat_messages else ""
                record["n_prompt_messages"] = len(info.chat_messages)
                record["stats"] = dict(info.stats)
                record["tokens"] = info.tokens.to_dict()
                write_step(record)
            obs = result.observation
            if result.terminated or result.truncated:
                break
    except Exception:
        return outcome("error", env.episode.cumulative_reward if env.episode else 0.0, steps, agent_usage(agent), traceback.format_exc())

    reward = env.episode.cumulative_reward
    status = "success" if reward >= SUCCESS_REWARD else "failure"
    return outcome(status, reward, steps, agent_usage(agent))
