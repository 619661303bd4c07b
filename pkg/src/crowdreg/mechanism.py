"""Payment rule for annotators and its audit quantities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .model import PrecisionPosterior, expected_precision

__all__ = ["PaymentScheme", "payment", "utility", "settle"]


@dataclass(frozen=True)
class PaymentScheme:
    """Per-example budget and the precision band that earns it.

    Precision at or below ``beta_lower`` pays nothing; precision at or above
    ``beta_upper`` pays the full budget; in between the payment is linear.
    """

    budget: float
    beta_lower: float
    beta_upper: float

    def __post_init__(self):
        if not self.budget > 0:
            raise InvalidInputError("budget must be positive")
        if not 0 < self.beta_lower < self.beta_upper:
            raise InvalidInputError("need 0 < beta_lower < beta_upper")


def payment(beta_hat, scheme: PaymentScheme):
    """Clamped linear payment; nondecreasing, bounded in [0, budget]."""
    b = np.asarray(beta_hat, dtype=float)
    if np.any(b < 0):
        raise InvalidInputError("estimated precision must be >= 0")
    frac = (b - scheme.beta_lower) / (scheme.beta_upper - scheme.beta_lower)
    out = scheme.budget * np.clip(frac, 0.0, 1.0)
    return float(out) if np.isscalar(beta_hat) else out


def utility(beta, cost, scheme: PaymentScheme):
    """Annotator utility at a given effort: payment minus labeling cost."""
    return payment(beta, scheme) - cost(beta)


def settle(posterior: PrecisionPosterior, scheme: PaymentScheme) -> float:
    """Per-example payment owed given the learner's precision estimate.

    The learner pays on the posterior-mean precision; estimation noise can
    make this differ from the annotator's true effort, so experiment records
    report both sides rather than assuming they agree.
    """
    return payment(expected_precision(posterior), scheme)
