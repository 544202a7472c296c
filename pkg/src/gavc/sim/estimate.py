"""Error-rate estimates and their confidence intervals."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import binomtest

__all__ = ["ErrorEstimate", "wilson_interval", "from_counts", "from_probabilities"]


def wilson_interval(errors: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("trials must be > 0")
    ci = binomtest(int(errors), int(trials)).proportion_ci(confidence, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class ErrorEstimate:
    """Monte Carlo error-rate estimate.

    ``method`` is ``"counted"`` for Bernoulli error counts (Wilson interval)
    or ``"conditional"`` when each trial contributes an exact conditional
    error probability (normal interval on the mean, clipped to [0, 1]).
    """

    trials: int
    errors: float
    rate_hat: float
    ci95: tuple[float, float]
    seed: int | None = None
    blocks: int = 1
    method: str = "counted"

    @property
    def upper(self) -> float:
        return self.ci95[1]

    @property
    def lower(self) -> float:
        return self.ci95[0]

    def overlaps(self, other: "ErrorEstimate") -> bool:
        return self.lower <= other.upper and other.lower <= self.upper

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ci95"] = list(self.ci95)
        return d


def from_counts(errors: int, trials: int, seed=None, blocks: int = 1) -> ErrorEstimate:
    errors, trials = int(errors), int(trials)
    return ErrorEstimate(trials, errors, errors / trials, wilson_interval(errors, trials), seed, blocks)


def from_probabilities(p: np.ndarray, seed=None, blocks: int = 1) -> ErrorEstimate:
    p = np.asarray(p, dtype=float)
    t = p.size
    mean = float(p.mean())
    half = 1.96 * float(p.std(ddof=1)) / math.sqrt(t) if t > 1 else 1.0
    ci = (max(0.0, mean - half), min(1.0, mean + half))
    return ErrorEstimate(t, float(p.sum()), mean, ci, seed, blocks, "conditional")
