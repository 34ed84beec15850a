from .base import (
    Agent,
    AgentArgs,
    AgentInfo,
    ProcessedObs,
    agent_args_from_dict,
    identity_preprocessor,
    register_agent_kind,
)
from .flags import ActionFlags, ObsFlags, ReasoningFlags
from .generic import (
    AnswerFormatError,
    GenericAgent,
    GenericAgentArgs,
    HistoryStep,
    build_generic_prompt,
    default_obs_preprocessor,
    parse_answer,
)
from .oracle import OracleModelArgs, RandomModelArgs
from .prompt import PromptComponent, fit_tokens
from .replay import PlaybackModel

__all__ = [
    "ActionFlags",
    "Agent",
    "AgentArgs",
    "AgentInfo",
    "AnswerFormatError",
    "GenericAgent",
    "GenericAgentArgs",
    "HistoryStep",
    "ObsFlags",
    "OracleModelArgs",
    "PlaybackModel",
    "ProcessedObs",
    "PromptComponent",
    "RandomModelArgs",
    "ReasoningFlags",
    "agent_args_from_dict",
    "build_generic_prompt",
    "default_obs_preprocessor",
    "fit_tokens",
    "identity_preprocessor",
    "parse_answer",
    "register_agent_kind",
]
