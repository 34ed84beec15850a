"""Reference agent: flag-driven prompt assembly, token fitting, answer
parsing with bounded re-prompting, and flat-serializable configuration."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, fields

from ..actions import ActionSetConfig, describe
from ..llm import ModelArgs, Usage, UsageTracker, model_args_from_dict
from ..observation import (
    FILTER_SOM_ONLY,
    FILTER_VISIBLE_ONLY,
    FILTER_WITH_BID_ONLY,
    Observation,
    flatten_axtree,
    flatten_html,
)
from ..chat import goal_text
from .base import Agent, AgentArgs, AgentInfo, ProcessedObs, register_agent_kind, unflatten
from .flags import ActionFlags, ObsFlags, ReasoningFlags
from .prompt import (
    SHRINK_DROP_OLDEST,
    SHRINK_TRUNCATE_BOTTOM,
    PromptComponent,
    fit_tokens,
)

MAX_ANSWER_ATTEMPTS = 4
DEFAULT_MAX_PROMPT_TOKENS = 40000

HISTORY_PRIORITY = 0
HTML_PRIORITY = 10
AXTREE_PRIORITY = 20

INSTRUCTIONS_TEXT = (
    "# Instructions\n\n"
    "You are interacting with pages through a browser to accomplish a goal for the\n"
    "user. Study the observation and every other piece of information below, then\n"
    "choose the single best next action. Your answer is interpreted and executed by\n"
    "a program; follow the formatting instructions exactly."
)

AXTREE_NOTE = (
    "Note: [bid] is the unique identifier at the beginning of lines for each "
    "element in the AXTree. Always use bid to refer to elements in your actions."
)

ACTION_SPACE_NOTE = (
    "Note: This action set allows you to interact with your environment. The "
    "primary way of referring to elements in the page is through bid, which is "
    "specified in your observations."
)

ABSTRACT_EXAMPLE = (
    "# Abstract Example\n\n"
    "Here is an abstract version of the answer with description of the content of\n"
    "each tag. Make sure you follow this structure, but replace the content with your\n"
    "answer:\n\n"
    "<think>\n"
    "Think step by step. If you need to make calculations such as coordinates, write\n"
    "them here. Describe the effect that your previous action had on the current\n"
    "content of the page.\n"
    "</think>\n\n"
    "<action>\n"
    "One single action to be executed. You can only use one action at a time.\n"
    "</action>"
)

CONCRETE_EXAMPLE = (
    "# Concrete Example\n\n"
    "Here is a concrete example of how to format your answer.\n"
    "Make sure to follow the template with proper tags:\n\n"
    "<think>\n"
    "From previous action I tried to set the value of year to \"2022\",\n"
    "using select_option, but it doesn't appear to be in the form. It may be a\n"
    "dynamic dropdown, I will try using click with the bid \"a324\" and look at the\n"
    "response from the page.\n"
    "</think>\n\n"
    "<action>\n"
    "click('a324')\n"
    "</action>"
)

_THINK_RE = re.compile(r"<think>(.*?)</think>", re.DOTALL)
_ACTION_RE = re.compile(r"<action>(.*?)</action>", re.DOTALL)


class AnswerFormatError(Exception):
    """The completion carries no usable <action> block; triggers a re-prompt."""


def parse_answer(completion: str) -> tuple[str, str]:
    """Extract the last <think> and <action> blocks; the think block is
    optional, the action block is not."""
    actions = _ACTION_RE.findall(completion)
    if not actions:
        raise AnswerFormatError("no <action>...</action> block found in the answer")
    action_text = actions[-1].strip()
    if not action_text:
        raise AnswerFormatError("the <action> block is empty")
    thinks = _THINK_RE.findall(completion)
    think = thinks[-1].strip() if thinks else ""
    return think, action_text


@dataclass
class HistoryStep:
    think: str
    action: str
    error: str = ""


def default_obs_preprocessor(obs: Observation, flags: ObsFlags) -> ProcessedObs:
    """Flatten per flags and drop the raw trees; the result is what the trace
    store persists and what the prompt is built from."""
    filters = set()
    if flags.filter_visible_elements_only:
        filters.add(FILTER_VISIBLE_ONLY)
    if flags.filter_with_bid_only:
        filters.add(FILTER_WITH_BID_ONLY)
    if flags.filter_som_only:
        filters.add(FILTER_SOM_ONLY)
    axtree_txt = None
    if flags.use_axtree:
        axtree_txt = flatten_axtree(
            obs.axtree,
            filters,
            visible_tag=flags.extract_visible_tag,
            clickable_tag=flags.extract_clickable_tag,
            coords=flags.extract_coords,
            props=obs.extra_element_properties,
        )
    html_txt = flatten_html(obs.dom) if flags.use_html else None
    return ProcessedObs(
        goal_text=goal_text(obs.goal_object),
        chat=[m.to_dict() for m in obs.chat_messages],
        open_pages_urls=list(obs.open_pages_urls),
        open_pages_titles=list(obs.open_pages_titles),
        active_page_index=obs.active_page_index,
        axtree_txt=axtree_txt,
        html_txt=html_txt,
        focused_element_bid=obs.focused_element_bid,
        last_action_error=obs.last_action_error,
    )


def _tabs_section(obs: ProcessedObs) -> str:
    lines = ["## Currently open tabs:"]
    for i, (url, title) in enumerate(zip(obs.open_pages_urls, obs.open_pages_titles)):
        marker = " (active tab)" if i == obs.active_page_index else ""
        lines.append(f"Tab {i}{marker}:")
        lines.append(f"    Title: {title}")
        lines.append(f"    URL: {url}")
    return "\n".join(lines)


def _chat_section(obs: ProcessedObs) -> str:
    extra = obs.chat[1:]  # the first message is the injected goal
    if not extra:
        return ""
    lines = ["## Chat messages:"]
    for message in extra:
        text = "".join(p.get("text", "") for p in message["parts"])
        lines.append(f"- {message['role']}: {text}")
    return "\n".join(lines)


def _history_items(history: list[HistoryStep], flags: ObsFlags) -> list[str]:
    items = []
    for k, step in enumerate(history):
        parts = [f"## step {k}"]
        if flags.use_think_history and step.think:
            parts.append(f"<think>\n{step.think}\n</think>")
        if flags.use_action_history:
            parts.append(f"<action>\n{step.action}\n</action>")
        if flags.use_past_error_logs and step.error:
            parts.append(f"Error from this action:\n{step.error}")
        items.append("\n\n".join(parts))
    return items


def build_generic_prompt(
    obs: ProcessedObs,
    history: list[HistoryStep],
    obs_flags: ObsFlags,
    action_config: ActionSetConfig,
    reasoning: ReasoningFlags,
) -> list[PromptComponent]:
    """Assemble the prompt components in their fixed section order:
    instructions, observation, history, action space, then the examples."""
    instructions = INSTRUCTIONS_TEXT
    if reasoning.extra_instructions:
        instructions += f"\n\n{reasoning.extra_instructions}"
    instructions += f"\n\n## Goal:\n\n{obs.goal_text}"
    components = [PromptComponent(label="instructions", text=instructions)]

    chat = _chat_section(obs)
    if chat:
        components.append(PromptComponent(label="chat", text=chat))

    observation = "# Observation of current step:"
    if obs_flags.use_tabs:
        observation += f"\n\n{_tabs_section(obs)}"
    components.append(PromptComponent(label="observation", text=observation))

    if obs_flags.use_axtree and obs.axtree_txt is not None:
        components.append(
            PromptComponent(
                label="axtree",
                header=f"## AXTree:\n{AXTREE_NOTE}",
                text=obs.axtree_txt,
                shrink=SHRINK_TRUNCATE_BOTTOM,
                shrink_priority=AXTREE_PRIORITY,
            )
        )
    if obs_flags.use_html and obs.html_txt is not None:
        components.append(
            PromptComponent(
                label="html",
                header="## HTML:",
                text=obs.html_txt,
                shrink=SHRINK_TRUNCATE_BOTTOM,
                shrink_priority=HTML_PRIORITY,
            )
        )
    if obs_flags.use_focused_element:
        focused = f"bid='{obs.focused_element_bid}'" if obs.focused_element_bid else "None"
        components.append(PromptComponent(label="focused", text=f"## Focused element:\n{focused}"))
    if obs_flags.use_error_logs and obs.last_action_error:
        components.append(
            PromptComponent(label="error", text=f"## Error from previous action:\n{obs.last_action_error}")
        )

    if obs_flags.use_history and history:
        components.append(
            PromptComponent(
                label="history",
                header="# History of interaction with the task:",
                items=_history_items(history, obs_flags),
                shrink=SHRINK_DROP_OLDEST,
                shrink_priority=HISTORY_PRIORITY,
            )
        )

    components.append(
        PromptComponent(
            label="action_space",
            text=f"# Action space:\n\n{ACTION_SPACE_NOTE}\n\n{describe(action_config)}",
        )
    )
    if reasoning.use_abstract_example:
        components.append(PromptComponent(label="abstract_example", text=ABSTRACT_EXAMPLE))
    if reasoning.use_concrete_example:
        components.append(PromptComponent(label="concrete_example", text=CONCRETE_EXAMPLE))
    return components


class GenericAgent(Agent):
    def __init__(self, args: "GenericAgentArgs"):
        args.obs.validate()
        args.action.validate()
        args.reasoning.validate()
        self.args = args
        self.action_config = ActionSetConfig(
            enabled_categories=frozenset(args.action.action_categories),
            long_description=args.action.long_description,
            individual_examples=args.action.individual_examples,
        )
        self.model = args.model.make_model()
        self.tracker = UsageTracker()
        self.history: list[HistoryStep] = []

    def obs_preprocessor(self, obs: Observation) -> ProcessedObs:
        return default_obs_preprocessor(obs, self.args.obs)

    def get_action(self, obs) -> tuple[str | None, AgentInfo]:
        if isinstance(obs, Observation):
            obs = self.obs_preprocessor(obs)
        if self.history and obs.last_action_error:
            self.history[-1].error = obs.last_action_error

        components = build_generic_prompt(
            obs, self.history, self.args.obs, self.action_config, self.args.reasoning
        )
        fit_stats: dict = {}
        prompt = fit_tokens(components, self.args.max_prompt_tokens, stats=fit_stats)
        messages: list[dict] = [{"role": "user", "content": prompt}]

        step_usage = Usage()
        retries = 0
        for attempt in range(MAX_ANSWER_ATTEMPTS):
            completion = self.model(messages)
            step_usage = step_usage + completion.usage
            self.tracker.track(completion.usage)
            try:
                think, action_text = parse_answer(completion.text)
            except AnswerFormatError as exc:
                retries = attempt + 1
                messages.append({"role": "assistant", "content": completion.text})
                messages.append(
                    {
                        "role": "user",
                        "content": (
                            f"Your answer could not be parsed: {exc}. Reply again with exactly "
                            "one <action>...</action> block (optionally preceded by one "
                            "<think>...</think> block)."
                        ),
                    }
                )
                continue
            self.history.append(HistoryStep(think=think, action=action_text))
            info = AgentInfo(
                think=think,
                chat_messages=messages,
                stats={
                    "n_retries": attempt,
                    "n_shrinks": fit_stats.get("n_shrinks", 0),
                    "overflow": fit_stats.get("overflow", 0),
                    "prompt_tokens": fit_stats.get("prompt_tokens", 0),
                },
                tokens=step_usage,
                extra={"shrink_events": ",".join(fit_stats.get("shrink_events", []))},
            )
            return action_text, info

        info = AgentInfo(
            think="",
            chat_messages=messages,
            stats={
                "n_retries": retries,
                "terminal_parse_failure": 1,
                "n_shrinks": fit_stats.get("n_shrinks", 0),
                "overflow": fit_stats.get("overflow", 0),
                "prompt_tokens": fit_stats.get("prompt_tokens", 0),
            },
            tokens=step_usage,
            extra={},
        )
        return None, info


@dataclass
class GenericAgentArgs(AgentArgs):
    agent_name: str = "generic"
    obs: ObsFlags = field(default_factory=ObsFlags)
    action: ActionFlags = field(default_factory=ActionFlags)
    reasoning: ReasoningFlags = field(default_factory=ReasoningFlags)
    model: ModelArgs = field(default_factory=ModelArgs)
    max_prompt_tokens: int = DEFAULT_MAX_PROMPT_TOKENS

    def make_agent(self) -> GenericAgent:
        return GenericAgent(self)

    def set_benchmark(self, benchmark) -> None:
        if "miniwob" in benchmark.name.lower():
            self.obs.use_html = True

    def to_dict(self) -> dict:
        flat = super().to_dict()
        # the model sub-config keeps its own kind tag for reconstruction
        for key in [k for k in flat if k == "model" or k.startswith("model.")]:
            del flat[key]
        for key, value in self.model.to_dict().items():
            flat[f"model.{key}"] = value
        return flat

    @classmethod
    def from_flat(cls, flat: dict) -> "GenericAgentArgs":
        nested = unflatten(flat)
        model = model_args_from_dict(nested.pop("model"))
        obs = ObsFlags(**nested.pop("obs", {}))
        action_fields = nested.pop("action", {})
        if "action_categories" in action_fields:
            action_fields["action_categories"] = frozenset(action_fields["action_categories"])
        action = ActionFlags(**action_fields)
        reasoning = ReasoningFlags(**nested.pop("reasoning", {}))
        known = {f.name for f in fields(cls)}
        rest = {k: v for k, v in nested.items() if k in known}
        return cls(obs=obs, action=action, reasoning=reasoning, model=model, **rest)


register_agent_kind("generic", GenericAgentArgs)
