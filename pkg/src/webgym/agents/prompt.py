"""Dynamic prompting: composable prompt components with per-component shrink
strategies and a token-budget fitter.

``fit_tokens`` never truncates the assembled prompt blindly. While over
budget it applies one shrink step to the lowest-priority shrinkable component
(round-robin among equals): history drops its oldest steps first, then page
texts are truncated from the bottom. The instructions/goal component is
non-shrinkable and always survives verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from ..errors import ConfigurationError
from ..tokens import count_tokens

SHRINK_NONE = "non-shrinkable"
SHRINK_DROP_OLDEST = "drop-oldest-history"
SHRINK_TRUNCATE_BOTTOM = "truncate-bottom"
SHRINK_ELIDE_MIDDLE = "elide-middle"

JOINER = "\n\n"

# fraction of remaining lines removed per truncate/elide step
SHRINK_CHUNK = 0.2


@dataclass
class PromptComponent:
    """One prompt section. ``header`` survives shrinking; the body shrinks
    according to the strategy. Lower priority shrinks first."""

    label: str
    text: str = ""
    items: list[str] = field(default_factory=list)
    header: str = ""
    shrink: str = SHRINK_NONE
    shrink_priority: int | None = None
    shrink_count: int = 0
    _elide_keep: int | None = None

    def render(self) -> str:
        if self.shrink == SHRINK_DROP_OLDEST:
            if not self.items:
                return ""
            body = JOINER.join(self.items)
            return f"{self.header}{JOINER}{body}" if self.header else body
        if not self.text and not self.header:
            return ""
        if self.header:
            return f"{self.header}{JOINER}{self.text}" if self.text else self.header
        return self.text

    def can_shrink(self) -> bool:
        if self.shrink == SHRINK_NONE or self.shrink_priority is None:
            return False
        if self.shrink == SHRINK_DROP_OLDEST:
            return bool(self.items)
        lines = self.text.split("\n")
        if self.shrink == SHRINK_TRUNCATE_BOTTOM:
            return len(lines) > 1
        if self.shrink == SHRINK_ELIDE_MIDDLE:
            keep = self._elide_keep if self._elide_keep is not None else len(lines)
            return keep > 2
        return False

    def shrink_once(self, counter: Callable[[str], int]) -> None:
        """One shrink step; guarantees a strict decrease of this component's
        rendered token count (or exhausts its shrink capacity trying)."""
        before = counter(self.render())
        while self.can_shrink():
            if self.shrink == SHRINK_DROP_OLDEST:
                self.items.pop(0)
            elif self.shrink == SHRINK_TRUNCATE_BOTTOM:
                lines = self.text.split("\n")
                drop = max(1, int(len(lines) * SHRINK_CHUNK))
                self.text = "\n".join(lines[: len(lines) - drop])
            elif self.shrink == SHRINK_ELIDE_MIDDLE:
                lines = self.text.split("\n")
                keep = self._elide_keep if self._elide_keep is not None else len(lines)
                keep = max(2, keep - max(1, int(keep * SHRINK_CHUNK)))
                self._elide_keep = keep
                head = keep // 2 + keep % 2
                tail = keep // 2
                self.text = "\n".join(lines[:head] + ["..."] + (lines[-tail:] if tail else []))
            self.shrink_count += 1
            if counter(self.render()) < before:
                return


def fit_tokens(
    components: list[PromptComponent],
    budget: int,
    counter: Callable[[str], int] = count_tokens,
    stats: dict | None = None,
) -> str:
    """Render components joined by blank lines, shrinking until the result
    fits the budget. If nothing can shrink further the minimal form is
    returned and ``overflow`` is flagged in stats."""
    floor_text = _assemble([c for c in components if c.shrink == SHRINK_NONE])
    floor = counter(floor_text)
    if budget <= floor:
        raise ConfigurationError(
            f"token budget {budget} does not cover the non-shrinkable prompt floor ({floor})"
        )

    events: list[str] = []
    overflow = False
    while True:
        text = _assemble(components)
        total = counter(text)
        if total <= budget:
            break
        candidates = [c for c in components if c.can_shrink()]
        if not candidates:
            overflow = True
            break
        lowest = min(c.shrink_priority for c in candidates)
        pool = [c for c in candidates if c.shrink_priority == lowest]
        target = min(pool, key=lambda c: c.shrink_count)
        target.shrink_once(counter)
        events.append(target.label)

    if stats is not None:
        stats["shrink_events"] = events
        stats["n_shrinks"] = len(events)
        stats["overflow"] = 1 if overflow else 0
        stats["prompt_tokens"] = counter(text)
    return text


def _assemble(components: list[PromptComponent]) -> str:
    return JOINER.join(rendered for c in components if (rendered := c.render()))
