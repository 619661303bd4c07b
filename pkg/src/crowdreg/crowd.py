"""Simulated annotator population.

Annotators add zero-mean Gaussian noise at a chosen effort level (effort =
noise precision).  Strategic annotators pick the effort that maximizes
payment minus labeling cost; non-strategic ones always work at their best
precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .mechanism import PaymentScheme, payment

__all__ = [
    "CostFunction",
    "AnnotatorProfile",
    "make_annotators",
    "label_value",
    "sample_label",
    "optimal_effort",
]

_COST_KINDS = ("linear", "quadratic", "threshold")


@dataclass(frozen=True)
class CostFunction:
    """Labeling cost as a function of effort.

    Families (all strictly increasing on [0, inf) with zero cost at zero):

    * ``linear``     a * beta                      params: (a,)
    * ``quadratic``  a * beta^2                    params: (a,)
    * ``threshold``  a * beta + b * max(0, beta - knee)^2    params: (a, b, knee)
    """

    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in _COST_KINDS:
            raise InvalidInputError(f"kind must be one of {_COST_KINDS}")
        params = tuple(float(p) for p in self.params)
        expected = 3 if self.kind == "threshold" else 1
        if len(params) != expected:
            raise InvalidInputError(
                f"{self.kind} cost takes {expected} parameter(s), got {len(params)}"
            )
        if not params[0] > 0:
            raise InvalidInputError(
                "leading cost coefficient must be positive, otherwise the "
                "cost is not strictly increasing"
            )
        if self.kind == "threshold" and (params[1] < 0 or params[2] < 0):
            raise InvalidInputError("threshold cost needs b >= 0 and knee >= 0")
        object.__setattr__(self, "params", params)

    def __call__(self, beta):
        b = np.asarray(beta, dtype=float)
        if np.any(b < 0):
            raise InvalidInputError("effort must be >= 0")
        if self.kind == "linear":
            out = self.params[0] * b
        elif self.kind == "quadratic":
            out = self.params[0] * b**2
        else:
            a, slope, knee = self.params
            out = a * b + slope * np.maximum(0.0, b - knee) ** 2
        return float(out) if np.isscalar(beta) else out


@dataclass(frozen=True)
class AnnotatorProfile:
    """Simulator-side ground truth for one annotator.

    ``best_precision`` is the inverse noise variance at full effort; the cost
    function only matters for strategic annotators.
    """

    id: int
    best_precision: float
    cost: CostFunction | None = None
    strategic: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.best_precision) and self.best_precision > 0):
            raise InvalidInputError("best_precision must be positive")


def make_annotators(m, good, interval_good, interval_bad, seed):
    """Draw a population of ``m`` annotators, deterministic given the seed.

    Noise standard deviations (1/sqrt(best precision)) are uniform on
    ``interval_good`` for the first ``good`` annotators and on
    ``interval_bad`` for the rest.  Degenerate ``[c, c]`` intervals are
    allowed and pin the value exactly.
    """
    if not 0 <= good <= m:
        raise InvalidInputError("need 0 <= good <= m")
    for lo, hi in (interval_good, interval_bad):
        if not (0 < lo <= hi):
            raise InvalidInputError(f"invalid noise interval [{lo}, {hi}]")
    rng = np.random.default_rng(seed)
    sd = np.concatenate([
        rng.uniform(interval_good[0], interval_good[1], size=good),
        rng.uniform(interval_bad[0], interval_bad[1], size=m - good),
    ])
    return [AnnotatorProfile(id=j, best_precision=1.0 / sd[j] ** 2)
            for j in range(m)]


def label_value(profile: AnnotatorProfile, true_value: float, effort: float,
                rng: np.random.Generator) -> float:
    """True value plus Gaussian noise of variance 1/effort.

    Effort cannot exceed the annotator's best precision.
    """
    if not 0 < effort <= profile.best_precision:
        raise InvalidInputError(
            f"effort {effort} outside (0, {profile.best_precision}]"
        )
    return float(true_value + rng.normal(0.0, 1.0 / np.sqrt(effort)))


def sample_label(profile: AnnotatorProfile, x, w_true, effort: float,
                 rng: np.random.Generator) -> float:
    """Noisy label for instance ``x`` under the true weight vector."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w_true, dtype=float)
    if x.shape != w.shape or x.ndim != 1:
        raise InvalidInputError("x and w_true must be vectors of equal length")
    return label_value(profile, float(w @ x), effort, rng)


def optimal_effort(profile: AnnotatorProfile, scheme: PaymentScheme,
                   grid: int = 1000) -> tuple[float, bool]:
    """Effort a strategic annotator commits to under a payment scheme.

    Utility payment(effort) - cost(effort) is maximized over a uniform grid
    on [0, min(best precision, 1.5 * top payment band)].  The annotator
    participates only when the best utility is strictly positive; otherwise
    the returned effort is 0.  Non-strategic annotators always work at best
    precision.
    """
    if grid < 2:
        raise InvalidInputError("grid must have at least 2 points")
    if not profile.strategic:
        return profile.best_precision, True
    if profile.cost is None:
        raise InvalidInputError("strategic annotator needs a cost function")
    top = min(profile.best_precision, 1.5 * scheme.beta_upper)
    candidates = np.linspace(0.0, top, grid)
    utilities = payment(candidates, scheme) - profile.cost(candidates)
    best = int(np.argmax(utilities))
    if utilities[best] > 0:
        return float(candidates[best]), True
    return 0.0, False
