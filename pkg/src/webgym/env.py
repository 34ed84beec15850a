"""Environment kernel: reset/step semantics over a task and a page backend.

The step contract mirrors a gym-style loop: actions arrive as DSL text, every
parse or execution failure becomes feedback in the next observation's
``last_action_error`` (the loop itself never breaks), and reward/termination
come exclusively from the task's validate hook.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

from .actions import ActionSetConfig, ParseError, map_to_commands, parse_action
from .backend import Backend
from .chat import ChatMessage, ContentPart, goal_parts_from, goal_text
from .commands import AppendChat, CommandError
from .errors import SetupError
from .observation import Observation, build_observation, flatten_axtree, flatten_html
from .tasks.registry import create_task, get_task_spec

DEFAULT_ACTION_TIMEOUT_MS = 500


@dataclass(frozen=True)
class EnvConfig:
    task_id: str
    seed: int = 0
    max_steps: int = 10
    action_subset: frozenset[str] = frozenset({"bid", "coord", "tab", "nav", "misc"})
    action_timeout_ms: int = DEFAULT_ACTION_TIMEOUT_MS
    record_traces: bool = False

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if not self.action_subset:
            raise ValueError("action_subset must not be empty")
        if self.action_timeout_ms <= 0:
            raise ValueError("action_timeout_ms must be positive")


@dataclass
class StepResult:
    observation: Observation
    reward: float
    terminated: bool
    truncated: bool
    info: dict[str, str]


@dataclass
class Episode:
    config: EnvConfig
    step_index: int = 0
    chat: list[ChatMessage] = field(default_factory=list)
    done: bool = False
    cumulative_reward: float = 0.0


TraceSink = Callable[[dict], None]


class Env:
    """One task bound to one backend; confined to a single worker at a time."""

    def __init__(self, task_id: str, config: EnvConfig | None = None):
        spec = get_task_spec(task_id)
        self.task_id = task_id
        self.config = config or EnvConfig(task_id=task_id, max_steps=spec.default_max_steps)
        self.backend: Backend | None = None
        self.task = None
        self.goal_object: list[ContentPart] = []
        self.episode: Episode | None = None
        self.last_action_error = ""
        self.trace_sink: TraceSink | None = None
        self._action_config = ActionSetConfig(enabled_categories=frozenset(self.config.action_subset))
        self._pending_obs: Observation | None = None

    # -- lifecycle -------------------------------------------------------

    def reset(self, seed: int | None = None) -> tuple[Observation, dict[str, str]]:
        """Start a fresh episode; a mid-episode re-reset abandons the old one."""
        seed = self.config.seed if seed is None else seed
        self.backend = _EnvBackend(self)
        self.task = create_task(self.task_id)
        self.episode = Episode(config=self.config)
        self.last_action_error = ""
        try:
            goal = self.task.setup(self.backend, seed)
        except Exception as exc:
            self.episode = None
            raise SetupError(f"setup of task {self.task_id!r} failed: {exc}") from exc
        self.goal_object = goal_parts_from(goal)
        # the goal is injected into the chat exactly once, as the first user message
        self.episode.chat.append(ChatMessage(role="user", parts=list(self.goal_object)))
        obs = self._observe()
        self._pending_obs = obs
        return obs, self._info()

    def step(self, action_text: str) -> StepResult:
        if self.episode is None:
            raise RuntimeError("step() before reset()")
        if self.episode.done:
            raise RuntimeError("step() on a finished episode")
        wall_start = time.perf_counter()

        error_message = ""
        error_kind = ""
        parsed_repr = ""
        infeasible_reported = False

        parsed = parse_action(action_text, self._action_config)
        if isinstance(parsed, ParseError):
            error_message = parsed.message
            error_kind = parsed.kind
        else:
            parsed_repr = parsed.canonical()
            for command in map_to_commands(parsed):
                if isinstance(command, AppendChat):
                    self.episode.chat.append(ChatMessage.text(command.role, command.text))
                    if command.role == "infeasible":
                        infeasible_reported = True
                    continue
                try:
                    self.backend.execute(command, timeout_ms=self.config.action_timeout_ms)
                except CommandError as exc:
                    # the page stays as the failed command left it
                    error_message = exc.message
                    error_kind = exc.kind
                    break

        self.episode.step_index += 1
        reward, task_done, message = self.task.validate(self.backend, self.episode.chat)
        reward = float(reward)
        self.episode.cumulative_reward += reward
        terminated = bool(task_done) or infeasible_reported
        truncated = self.episode.step_index >= self.config.max_steps
        if message:
            self.episode.chat.append(ChatMessage.text("user_feedback", message))

        self.last_action_error = error_message
        self.episode.done = terminated or truncated
        obs = self._observe()
        info = self._info()
        info["parsed_action"] = parsed_repr
        info["action_error_kind"] = error_kind
        wall_ms = (time.perf_counter() - wall_start) * 1000.0

        if self.config.record_traces and self.trace_sink is not None:
            self.trace_sink(
                self._trace_record(
                    action_text, parsed_repr, reward, terminated, truncated, error_message, wall_ms
                )
            )
        self._pending_obs = obs
        return StepResult(observation=obs, reward=reward, terminated=terminated, truncated=truncated, info=info)

    def send_user_message(self, text: str) -> None:
        """Append a user chat message; the goal object is never altered."""
        if self.episode is None:
            raise RuntimeError("send_user_message() before reset()")
        self.episode.chat.append(ChatMessage.text("user", text))

    # -- helpers -----------------------------------------------------------

    def _observe(self) -> Observation:
        return build_observation(self.backend, self.goal_object, self.episode.chat, self.last_action_error)

    def _info(self) -> dict[str, str]:
        return {
            "task_id": self.task_id,
            "step_index": str(self.episode.step_index),
            "virtual_time_ms": f"{self.backend.clock_ms:g}",
        }

    def _trace_record(self, action_text, parsed_repr, reward, terminated, truncated, error, wall_ms) -> dict:
        obs = self._pending_obs  # what the agent saw when it chose this action
        return {
            "step": self.episode.step_index - 1,
            "action": action_text,
            "parsed_action": parsed_repr,
            "reward": reward,
            "terminated": terminated,
            "truncated": truncated,
            "last_action_error": error,
            "wall_ms": round(wall_ms, 3),
            "virtual_ms": self.backend.clock_ms,
            "obs": {
                "goal": goal_text(obs.goal_object),
                "chat": [m.to_dict() for m in obs.chat_messages],
                "open_pages_urls": obs.open_pages_urls,
                "open_pages_titles": obs.open_pages_titles,
                "active_page_index": obs.active_page_index,
                "axtree_txt": flatten_axtree(obs.axtree),
                "html_txt": flatten_html(obs.dom),
                "focused_element_bid": obs.focused_element_bid,
                "last_action_error": obs.last_action_error,
            },
        }


class _EnvBackend(Backend):
    """Backend wired to its environment so chat commands reach the episode."""

    def __init__(self, env: Env):
        super().__init__()
        self._env = env

    def append_chat(self, role: str, text: str) -> None:
        self._env.episode.chat.append(ChatMessage.text(role, text))


def make_env(task_id: str, config: EnvConfig | None = None) -> Env:
    """Environment for a registered task, in un-reset state."""
    return Env(task_id, config)
