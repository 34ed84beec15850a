"""Default token counter: whitespace-delimited words plus punctuation splits.

A deliberately simple, dependency-free approximation. Budgets and tests are
defined against it; exact provider tokenizers can be plugged into fit_tokens
and the usage tracker wherever a counter is accepted.
"""

from __future__ import annotations

import re

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def count_tokens(text: str) -> int:
    return len(_TOKEN_RE.findall(text))
