"""Success-rate metrics over 0/1 episode indicators.

std_error is sigma/sqrt(n) with sigma the population standard deviation of
the indicators, which reduces to sqrt(p*(1-p)/n) for a Bernoulli sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class AggregationError(Exception):
    pass


@dataclass
class Metrics:
    success_rate: float
    std_error: float
    n: int
    per_category: dict[str, "Metrics"] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"success_rate": self.success_rate, "std_error": self.std_error, "n": self.n}
        if self.per_category:
            d["per_category"] = {k: v.to_dict() for k, v in self.per_category.items()}
        return d


def bernoulli_metrics(indicators: list[float]) -> Metrics:
    if not indicators:
        raise AggregationError("cannot aggregate zero finished episodes")
    n = len(indicators)
    p = sum(indicators) / n
    sigma = math.sqrt(p * (1.0 - p))
    return Metrics(success_rate=p, std_error=sigma / math.sqrt(n), n=n)
