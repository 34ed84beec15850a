"""Provider-agnostic chat-completion contract.

A model is anything callable with a message list returning a Completion.
Ships a retrying HTTP client speaking a plain chat-completion JSON shape, a
deterministic scripted model for tests, and usage/cost accounting with
per-episode trackers that merge into study scope.

Request JSON: {"model", "messages": [{"role", "content"}], "temperature",
"max_tokens"}. Response JSON: {"choices": [{"message": {"content"}}],
"usage": {"prompt_tokens", "completion_tokens"}} (usage optional; estimated
with the default counter when absent). Credentials come from the
WEBGYM_LLM_API_KEY environment variable and are never logged.
"""

from __future__ import annotations

import json
import logging
import os
import random
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, fields
from typing import Callable, Sequence

from .chat import ChatMessage
from .errors import ConfigurationError
from .tokens import count_tokens

logger = logging.getLogger(__name__)

API_KEY_ENV = "WEBGYM_LLM_API_KEY"
ENDPOINT_ENV = "WEBGYM_LLM_ENDPOINT"

BACKOFF_BASE_MS = 500.0
BACKOFF_FACTOR = 2.0
BACKOFF_JITTER = 0.2


class TransportError(Exception):
    """Transient transport failure that exhausted its retries; episodes that
    hit it are relaunchable system failures."""


class ScriptExhaustedError(Exception):
    """A scripted model ran out of responses; always a test bug."""


@dataclass(frozen=True)
class Usage:
    prompt_tokens: int = 0
    completion_tokens: int = 0
    cost: float = 0.0
    estimated: bool = False

    def __add__(self, other: "Usage") -> "Usage":
        return Usage(
            prompt_tokens=self.prompt_tokens + other.prompt_tokens,
            completion_tokens=self.completion_tokens + other.completion_tokens,
            cost=self.cost + other.cost,
            estimated=self.estimated or other.estimated,
        )

    def to_dict(self) -> dict:
        return {
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "cost": self.cost,
            "estimated": self.estimated,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Usage":
        return cls(
            prompt_tokens=int(d.get("prompt_tokens", 0)),
            completion_tokens=int(d.get("completion_tokens", 0)),
            cost=float(d.get("cost", 0.0)),
            estimated=bool(d.get("estimated", False)),
        )


@dataclass
class Completion:
    text: str
    usage: Usage
    latency_ms: float = 0.0


class UsageTracker:
    """Running token/cost sums; per episode, merged into study totals."""

    def __init__(self):
        self._total = Usage()
        self.n_calls = 0

    def track(self, usage: Usage) -> None:
        self._total = self._total + usage
        self.n_calls += 1

    def totals(self) -> Usage:
        return self._total

    def merge(self, other: "UsageTracker") -> None:
        self._total = self._total + other._total
        self.n_calls += other.n_calls


def _normalize_messages(messages: Sequence) -> list[dict]:
    out = []
    for m in messages:
        if isinstance(m, ChatMessage):
            out.append({"role": m.role, "content": m.text_content()})
        elif isinstance(m, dict):
            out.append({"role": m["role"], "content": m["content"]})
        else:
            raise TypeError(f"unsupported message {m!r}")
    return out


class AbstractChatModel:
    def __call__(self, messages: Sequence) -> Completion:
        raise NotImplementedError


def complete(model: AbstractChatModel, messages: Sequence) -> Completion:
    if not messages:
        raise ValueError("messages must not be empty")
    return model(messages)


@dataclass
class ModelArgs:
    """Configuration and cost bookkeeping for one model endpoint."""

    model_name: str = "scripted"
    endpoint: str = ""
    temperature: float = 0.0
    max_new_tokens: int = 512
    price_per_1k_prompt: float = 0.0
    price_per_1k_completion: float = 0.0
    request_timeout_ms: int = 30000
    max_transport_retries: int = 3

    def __post_init__(self):
        if self.price_per_1k_prompt < 0 or self.price_per_1k_completion < 0:
            raise ConfigurationError("prices must be >= 0")
        if self.temperature < 0:
            raise ConfigurationError("temperature must be >= 0")

    def cost_of(self, prompt_tokens: int, completion_tokens: int) -> float:
        return (
            prompt_tokens / 1000.0 * self.price_per_1k_prompt
            + completion_tokens / 1000.0 * self.price_per_1k_completion
        )

    def make_model(self) -> AbstractChatModel:
        raise ConfigurationError(
            "no model configured: use a concrete ModelArgs (scripted, oracle, random, http)"
        )

    def to_dict(self) -> dict:
        d = {"kind": _KIND_BY_TYPE[type(self)]}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = [list(v) if isinstance(v, tuple) else v for v in value]
            d[f.name] = value
        return d


_MODEL_KINDS: dict[str, type] = {}
_KIND_BY_TYPE: dict[type, str] = {}


def register_model_kind(kind: str, cls: type) -> None:
    _MODEL_KINDS[kind] = cls
    _KIND_BY_TYPE[cls] = kind


def model_args_from_dict(d: dict) -> ModelArgs:
    d = dict(d)
    kind = d.pop("kind")
    try:
        cls = _MODEL_KINDS[kind]
    except KeyError:
        raise ConfigurationError(f"unknown model kind {kind!r}") from None
    field_names = {f.name for f in fields(cls)}
    return cls(**{k: v for k, v in d.items() if k in field_names})


# -- scripted model ----------------------------------------------------------


@dataclass
class ScriptedModelArgs(ModelArgs):
    """Deterministic playback: first matching (substring, response) rule wins,
    otherwise the next queued response."""

    model_name: str = "scripted"
    rules: tuple = ()  # (substring, response) pairs
    queue: tuple = ()

    def make_model(self) -> "ScriptedModel":
        return ScriptedModel(self)


class ScriptedModel(AbstractChatModel):
    def __init__(self, args: ScriptedModelArgs):
        self.args = args
        self._queue = [str(q) for q in args.queue]

    def __call__(self, messages: Sequence) -> Completion:
        rendered = "\n".join(m["content"] for m in _normalize_messages(messages))
        text = None
        for needle, response in self.args.rules:
            if needle in rendered:
                text = response
                break
        if text is None:
            if not self._queue:
                raise ScriptExhaustedError("scripted model has no matching rule and an empty queue")
            text = self._queue.pop(0)
        usage = Usage(
            prompt_tokens=count_tokens(rendered),
            completion_tokens=count_tokens(text),
            cost=self.args.cost_of(count_tokens(rendered), count_tokens(text)),
            estimated=True,
        )
        return Completion(text=text, usage=usage, latency_ms=0.0)


# -- HTTP model ---------------------------------------------------------------

Transport = Callable[[str, dict, float], dict]


def _urllib_transport(url: str, payload: dict, timeout_s: float) -> dict:
    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get(API_KEY_ENV)
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    request = urllib.request.Request(url, data=json.dumps(payload).encode(), headers=headers)
    with urllib.request.urlopen(request, timeout=timeout_s) as response:
        return json.loads(response.read().decode())


@dataclass
class HttpModelArgs(ModelArgs):
    model_name: str = "remote"

    def __post_init__(self):
        super().__post_init__()
        if not self.endpoint:
            self.endpoint = os.environ.get(ENDPOINT_ENV, "")

    def make_model(self) -> "HttpChatModel":
        if not self.endpoint:
            raise ConfigurationError(f"no endpoint configured (set {ENDPOINT_ENV} or ModelArgs.endpoint)")
        return HttpChatModel(self)


class HttpChatModel(AbstractChatModel):
    def __init__(self, args: HttpModelArgs, transport: Transport | None = None):
        self.args = args
        self._transport = transport or _urllib_transport

    def __call__(self, messages: Sequence) -> Completion:
        payload = {
            "model": self.args.model_name,
            "messages": _normalize_messages(messages),
            "temperature": self.args.temperature,
            "max_tokens": self.args.max_new_tokens,
        }
        start = time.perf_counter()
        response = self._send_with_retries(payload)
        latency_ms = (time.perf_counter() - start) * 1000.0
        text = response["choices"][0]["message"]["content"]
        raw_usage = response.get("usage")
        if raw_usage:
            prompt_tokens = int(raw_usage.get("prompt_tokens", 0))
            completion_tokens = int(raw_usage.get("completion_tokens", 0))
            estimated = False
        else:
            prompt_tokens = sum(count_tokens(m["content"]) for m in payload["messages"])
            completion_tokens = count_tokens(text)
            estimated = True
        usage = Usage(
            prompt_tokens=prompt_tokens,
            completion_tokens=completion_tokens,
            cost=self.args.cost_of(prompt_tokens, completion_tokens),
            estimated=estimated,
        )
        return Completion(text=text, usage=usage, latency_ms=latency_ms)

    def _send_with_retries(self, payload: dict) -> dict:
        timeout_s = self.args.request_timeout_ms / 1000.0
        last_error: Exception | None = None
        for attempt in range(self.args.max_transport_retries + 1):
            try:
                return self._transport(self.args.endpoint, payload, timeout_s)
            except (urllib.error.URLError, TimeoutError, ConnectionError, OSError) as exc:
                last_error = exc
                if attempt == self.args.max_transport_retries:
                    break
                backoff_ms = BACKOFF_BASE_MS * (BACKOFF_FACTOR ** attempt)
                backoff_ms *= 1.0 + random.uniform(-BACKOFF_JITTER, BACKOFF_JITTER)
                logger.warning("transport failure (attempt %d): %s", attempt + 1, exc)
                time.sleep(backoff_ms / 1000.0)
        raise TransportError(
            f"request to {self.args.endpoint} failed after "
            f"{self.args.max_transport_retries + 1} attempts: {last_error}"
        )


register_model_kind("unconfigured", ModelArgs)
register_model_kind("scripted", ScriptedModelArgs)
register_model_kind("http", HttpModelArgs)
