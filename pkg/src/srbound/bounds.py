"""Probabilistic relative-error bounds for martingale error processes.

The closed-form bound for a node with martingale length L and condition
bound K is K * sqrt(u * gamma(2L, u)) * sqrt(ln(2/lambda)), which holds
with probability at least 1 - lambda.  ``azuma_generic`` exposes the
underlying concentration inequality for explicit step-bound sequences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional


class InvalidLambda(ValueError):
    """Confidence parameter outside the open interval (0, 1)."""


class ConditionUndefined(ValueError):
    """An exact cancellation made the condition bound (and any relative
    quantity built on it) undefined."""


@dataclass(frozen=True)
class Analysis:
    """Everything the bound needs about one node: length L, condition K, roundoff u."""

    L: int
    K: Optional[Fraction]
    u: float

    def __post_init__(self) -> None:
        if self.L < 0:
            raise ValueError(f"martingale length must be nonnegative, got {self.L}")
        if not 0.0 < self.u < 1.0:
            raise ValueError(f"unit roundoff must be in (0, 1), got {self.u}")
        if self.K is not None and self.K < 1:
            raise ValueError(f"condition bound must be >= 1 when defined, got {self.K}")


def gamma(n: int, u: float | Fraction) -> float:
    """(1+u)^n - 1, formed exactly so small-n values keep their low-order terms."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    uf = Fraction(u)
    if not 0 < uf < 1:
        raise ValueError(f"u must be in (0, 1), got {u}")
    return float((1 + uf) ** n - 1)


def ah_bound(a: Analysis, lam: float) -> float:
    """Relative-error bound holding with probability at least 1 - lam."""
    if not 0.0 < lam < 1.0:
        raise InvalidLambda(f"confidence parameter must be in (0, 1), got {lam}")
    if a.K is None:
        raise ConditionUndefined("condition bound undefined for this node")
    if a.L == 0:
        return 0.0
    uf = Fraction(a.u)
    inner = uf * ((1 + uf) ** (2 * a.L) - 1)
    return float(a.K) * math.sqrt(float(inner)) * math.sqrt(math.log(2.0 / lam))


def azuma_generic(step_bounds: Iterable[float], a: float) -> float:
    """P(|M_n| >= a) <= 2 exp(-a^2 / (2 sum b_k^2)), clamped to [0, 1]."""
    s = math.fsum(b * b for b in step_bounds)
    if s == 0.0:
        return 0.0
    return min(1.0, 2.0 * math.exp(-(a * a) / (2.0 * s)))
