"""Prompting option flags for the reference agent."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigurationError


@dataclass
class ObsFlags:
    use_html: bool = False
    use_axtree: bool = True
    use_tabs: bool = True
    use_focused_element: bool = True
    use_error_logs: bool = True
    use_history: bool = True
    use_past_error_logs: bool = False
    use_action_history: bool = True
    use_think_history: bool = True
    use_screenshot: bool = False
    use_som: bool = False
    extract_visible_tag: bool = True
    extract_clickable_tag: bool = True
    extract_coords: bool = False
    filter_visible_elements_only: bool = False
    filter_with_bid_only: bool = False
    filter_som_only: bool = False

    def validate(self) -> None:
        if self.use_som and not self.use_screenshot:
            raise ConfigurationError("use_som requires use_screenshot")
        if self.use_screenshot:
            raise ConfigurationError(
                "use_screenshot is not available in v1: the backend produces bounding-box "
                "metadata but no pixel rendering"
            )


@dataclass
class ActionFlags:
    action_categories: frozenset[str] = frozenset({"bid", "tab", "nav", "misc"})
    long_description: bool = False
    individual_examples: bool = False
    multi_actions: bool = False

    def __post_init__(self):
        self.action_categories = frozenset(self.action_categories)

    def validate(self) -> None:
        if self.multi_actions:
            raise ConfigurationError("multi_actions mode is not supported in v1")


@dataclass
class ReasoningFlags:
    use_thinking: bool = True
    use_plan: bool = False
    use_criticize: bool = False
    use_abstract_example: bool = True
    use_concrete_example: bool = True
    extra_instructions: str = ""

    def validate(self) -> None:
        if self.use_plan:
            raise ConfigurationError("use_plan is recognized but not available in v1")
        if self.use_criticize:
            raise ConfigurationError("use_criticize is recognized but not available in v1")
