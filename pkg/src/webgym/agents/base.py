"""Agent-side contracts: the Agent/AgentArgs pair, per-step AgentInfo, and the
processed observation that gets persisted to step logs."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, is_dataclass

from ..chat import goal_text
from ..errors import ConfigurationError
from ..llm import Usage
from ..observation import Observation


@dataclass
class AgentInfo:
    think: str = ""
    chat_messages: list[dict] = field(default_factory=list)
    stats: dict[str, float] = field(default_factory=dict)
    tokens: Usage = field(default_factory=Usage)
    extra: dict[str, str] = field(default_factory=dict)


@dataclass
class ProcessedObs:
    """What the agent reasons over and what the trace store persists: the
    flattened texts, never the raw trees."""

    goal_text: str
    chat: list[dict]
    open_pages_urls: list[str]
    open_pages_titles: list[str]
    active_page_index: int
    axtree_txt: str | None
    html_txt: str | None
    focused_element_bid: str | None
    last_action_error: str

    def to_dict(self) -> dict:
        return {
            "goal": self.goal_text,
            "chat": self.chat,
            "open_pages_urls": self.open_pages_urls,
            "open_pages_titles": self.open_pages_titles,
            "active_page_index": self.active_page_index,
            "axtree_txt": self.axtree_txt,
            "html_txt": self.html_txt,
            "focused_element_bid": self.focused_element_bid,
            "last_action_error": self.last_action_error,
        }


class Agent:
    """Per-episode, single-owner. get_action returns the DSL action text, or
    None as the terminal marker once answer parsing is beyond recovery."""

    def get_action(self, obs) -> tuple[str | None, AgentInfo]:
        raise NotImplementedError

    def obs_preprocessor(self, obs: Observation) -> ProcessedObs:
        return identity_preprocessor(obs)


def identity_preprocessor(obs: Observation) -> ProcessedObs:
    """Keeps both flattened texts, drops the raw trees."""
    from ..observation import flatten_axtree, flatten_html

    return ProcessedObs(
        goal_text=goal_text(obs.goal_object),
        chat=[m.to_dict() for m in obs.chat_messages],
        open_pages_urls=list(obs.open_pages_urls),
        open_pages_titles=list(obs.open_pages_titles),
        active_page_index=obs.active_page_index,
        axtree_txt=flatten_axtree(obs.axtree),
        html_txt=flatten_html(obs.dom),
        focused_element_bid=obs.focused_element_bid,
        last_action_error=obs.last_action_error,
    )


@dataclass
class AgentArgs:
    """Reconstructible agent configuration; everything a study needs to spawn
    the same agent again lives here, serialized flat into the manifest."""

    agent_name: str = "agent"

    def make_agent(self) -> Agent:
        raise NotImplementedError

    def set_benchmark(self, benchmark) -> None:
        """Optional hook to adapt flags to a benchmark before a study runs."""

    def prepare(self) -> None:
        """Optional hook to set up expensive agent resources."""

    def to_dict(self) -> dict:
        flat = {"kind": _KIND_BY_TYPE[type(self)]}
        _flatten_into(flat, "", self)
        return flat


_AGENT_KINDS: dict[str, type] = {}
_KIND_BY_TYPE: dict[type, str] = {}


def register_agent_kind(kind: str, cls: type) -> None:
    _AGENT_KINDS[kind] = cls
    _KIND_BY_TYPE[cls] = kind


def _flatten_into(out: dict, prefix: str, value) -> None:
    if is_dataclass(value) and not isinstance(value, type):
        for f in fields(value):
            name = f"{prefix}{f.name}" if not prefix else f"{prefix}.{f.name}"
            _flatten_into(out, name, getattr(value, f.name))
    elif isinstance(value, frozenset):
        out[prefix] = sorted(value)
    elif isinstance(value, tuple):
        out[prefix] = [list(v) if isinstance(v, (tuple, list)) else v for v in value]
    else:
        out[prefix] = value


def agent_args_from_dict(data: dict) -> AgentArgs:
    data = dict(data)
    kind = data.pop("kind")
    try:
        cls = _AGENT_KINDS[kind]
    except KeyError:
        raise ConfigurationError(f"unknown agent kind {kind!r}") from None
    return cls.from_flat(data)


def unflatten(data: dict) -> dict:
    """Dotted keys back into nested dicts."""
    nested: dict = {}
    for key, value in data.items():
        parts = key.split(".")
        cursor = nested
        for part in parts[:-1]:
            cursor = cursor.setdefault(part, {})
        cursor[parts[-1]] = value
    return nested


__all__ = [
    "Agent",
    "AgentArgs",
    "AgentInfo",
    "ProcessedObs",
    "agent_args_from_dict",
    "identity_preprocessor",
    "register_agent_kind",
    "unflatten",
]
