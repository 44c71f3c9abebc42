"""Reduced-precision floating-point emulation with stochastic rounding.

A format with significand parameter ``t`` represents 0 and every value
``±m * 2**(e - t)`` with ``2**t <= m < 2**(t+1)`` and binade exponent
``e`` inside the binary64 normal range.  Since ``2 <= t <= 52``, every
representable value (and both rounding neighbors of any finite input)
is exact in binary64, so rounded results are returned as plain floats.

Stochastic rounding here is the nearness flavor: the upper neighbor is
chosen with probability ``(x - down) / (up - down)``, which makes each
rounding unbiased.  Probabilities are computed in exact rational
arithmetic; no working-precision rounding leaks into the decision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

_MIN_EXP = -1022
_MAX_EXP = 1023

_U_MODES = ("step-bound", "paper")


class OutOfRange(ValueError):
    """Value outside the emulated normal range (too large, too small, or not finite)."""


@dataclass(frozen=True)
class FpFormat:
    """Emulated precision: t fractional significand bits plus a unit-roundoff convention."""

    t: int
    u_mode: str = "step-bound"

    def __post_init__(self) -> None:
        if not isinstance(self.t, int) or not 2 <= self.t <= 52:
            raise ValueError(f"t must be an integer in [2, 52], got {self.t!r}")
        if self.u_mode not in _U_MODES:
            raise ValueError(f"u_mode must be one of {_U_MODES}, got {self.u_mode!r}")

    @property
    def u(self) -> float:
        """Unit roundoff: 2^(1-t) in "step-bound" mode, 2^(-t) in "paper" mode."""
        return math.ldexp(1.0, 1 - self.t if self.u_mode == "step-bound" else -self.t)


class RoundedValue(NamedTuple):
    value: float
    delta: float  # relative error (value - x) / x, 0 when x = 0


def _as_fraction(x: float | int | Fraction) -> Fraction:
    if isinstance(x, float) and not math.isfinite(x):
        raise OutOfRange(f"cannot round non-finite value {x!r}")
    return Fraction(x)


def _split(x: Fraction, t: int) -> tuple[int, int, int, int, int]:
    """Decompose nonzero x into (sign, E, k, rem, den).

    2^E <= |x| < 2^(E+1) and |x| = (k + rem/den) * 2^(E-t) with
    2^t <= k < 2^(t+1) and 0 <= rem < den.  Raises OutOfRange when the
    binade leaves the normal range or the upper neighbor would be 2^1024.
    """
    sign = 1 if x > 0 else -1
    n, d = abs(x.numerator), x.denominator
    e = n.bit_length() - d.bit_length()
    below = n < (d << e) if e >= 0 else (n << -e) < d
    if below:
        e -= 1
    if not _MIN_EXP <= e <= _MAX_EXP:
        raise OutOfRange(f"binade 2^{e} outside the emulated normal range")
    s = t - e
    if s >= 0:
        k, rem = divmod(n << s, d)
        den = d
    else:
        den = d << -s
        k, rem = divmod(n, den)
    if rem and e == _MAX_EXP and k + 1 == 1 << (t + 1):
        raise OutOfRange("upper rounding neighbor exceeds the emulated range")
    return sign, e, k, rem, den


def _grid_float(k: int, e: int, t: int) -> float:
    return math.ldexp(k, e - t)  # k < 2^53, so this is exact


def neighbors(x: float | int | Fraction, fmt: FpFormat) -> tuple[float, float]:
    """Closest representable values (down, up) with down <= x <= up.

    down == up exactly when x is representable in fmt.
    """
    xf = _as_fraction(x)
    if xf == 0:
        return 0.0, 0.0
    sign, e, k, rem, _ = _split(xf, fmt.t)
    if rem == 0:
        v = sign * _grid_float(k, e, fmt.t)
        return v, v
    down = _grid_float(k, e, fmt.t)
    up = _grid_float(k + 1, e, fmt.t)
    return (down, up) if sign > 0 else (-up, -down)


def p_fraction(x: float | int | Fraction, fmt: FpFormat) -> Fraction:
    """Exact probability that SR rounds x to its upper neighbor."""
    xf = _as_fraction(x)
    if xf == 0:
        return Fraction(0)
    sign, _, _, rem, den = _split(xf, fmt.t)
    if rem == 0:
        return Fraction(0)
    p = Fraction(rem, den)
    return p if sign > 0 else 1 - p


def _delta(value: float, x: Fraction) -> float:
    return float((value - x) / x) if x else 0.0


def sr_round(x: float | int | Fraction, fmt: FpFormat, rng) -> RoundedValue:
    """Stochastically round x: up with probability p_fraction(x), else down.

    ``rng`` is any object whose ``random()`` yields uniform samples in
    [0, 1); it is consulted only when x is not representable.
    """
    xf = _as_fraction(x)
    if xf == 0:
        return RoundedValue(0.0, 0.0)
    sign, e, k, rem, den = _split(xf, fmt.t)
    if rem == 0:
        return RoundedValue(sign * _grid_float(k, e, fmt.t), 0.0)
    p_up = Fraction(rem, den) if sign > 0 else Fraction(den - rem, den)
    if Fraction(rng.random()) < p_up:
        value = _grid_float(k + 1, e, fmt.t) if sign > 0 else -_grid_float(k, e, fmt.t)
    else:
        value = _grid_float(k, e, fmt.t) if sign > 0 else -_grid_float(k + 1, e, fmt.t)
    return RoundedValue(value, _delta(value, xf))


def rn_round(x: float | int | Fraction, fmt: FpFormat) -> RoundedValue:
    """Round x to the nearest representable value, ties to even grid index."""
    xf = _as_fraction(x)
    if xf == 0:
        return RoundedValue(0.0, 0.0)
    sign, e, k, rem, den = _split(xf, fmt.t)
    half = 2 * rem - den
    if half < 0 or (half == 0 and k % 2 == 0):
        near = k
    else:
        near = k + 1
    value = sign * _grid_float(near, e, fmt.t)
    return RoundedValue(value, _delta(value, xf))


_OPS = {"+": lambda a, b: a + b, "-": lambda a, b: a - b, "*": lambda a, b: a * b}


def sr_op(a, b, op: str, fmt: FpFormat, rng) -> RoundedValue:
    """Stochastically round the exact result of ``a op b`` for op in {+, -, *}.

    The exact result is formed in rational arithmetic, so products whose
    significands do not fit the working precision still round correctly.
    """
    if op not in _OPS:
        raise ValueError(f"unsupported operation {op!r}; expected one of +, -, *")
    return sr_round(_OPS[op](_as_fraction(a), _as_fraction(b)), fmt, rng)


def is_representable(x: float | int | Fraction, fmt: FpFormat) -> bool:
    xf = _as_fraction(x)
    if xf == 0:
        return True
    return _split(xf, fmt.t)[3] == 0


# ---------------------------------------------------------------------------
# Dyadic fast path used by the Monte Carlo evaluator.  A value is carried as
# an integer pair (num, exp) meaning num * 2^exp; every representable value
# and every +,-,* combination of representable values has this shape, so the
# rounding decision reduces to integer shifts and one comparison.


def _dyadic_of_float(x: float) -> tuple[int, int]:
    m, e = math.frexp(x)
    return int(m * 9007199254740992.0), e - 53  # 2^53


def _split_dyadic(num: int, exp: int, t: int) -> tuple[int, int, int, int]:
    """(e, k, rem, sh) for num * 2^exp != 0: |value| = (k + rem/2^sh) * 2^(e-t)."""
    a = abs(num)
    bl = a.bit_length()
    e = exp + bl - 1
    if not _MIN_EXP <= e <= _MAX_EXP:
        raise OutOfRange(f"binade 2^{e} outside the emulated normal range")
    s = t - bl + 1
    if s >= 0:
        return e, a << s, 0, 0
    sh = -s
    k = a >> sh
    rem = a & ((1 << sh) - 1)
    if rem and e == _MAX_EXP and k + 1 == 1 << (t + 1):
        raise OutOfRange("upper rounding neighbor exceeds the emulated range")
    return e, k, rem, sh


def _sample_below(sample: float, rem: int, sh: int) -> bool:
    """Exact test sample < rem / 2^sh for a binary64 sample in [0, 1)."""
    if sample == 0.0:
        return rem > 0
    sm, se = _dyadic_of_float(sample)
    d = se + sh
    if d >= 0:
        return sm << d < rem
    return sm < rem << -d


def _sr_dyadic(num: int, exp: int, t: int, sample: float) -> tuple[int, int]:
    if num == 0:
        return 0, 0
    e, k, rem, sh = _split_dyadic(num, exp, t)
    if rem == 0:
        return (k if num > 0 else -k), e - t
    if num > 0:
        k_out = k + 1 if _sample_below(sample, rem, sh) else k
        return k_out, e - t
    k_out = k if _sample_below(sample, (1 << sh) - rem, sh) else k + 1
    return -k_out, e - t


def _rn_dyadic(num: int, exp: int, t: int) -> tuple[int, int]:
    if num == 0:
        return 0, 0
    e, k, rem, sh = _split_dyadic(num, exp, t)
    if rem == 0:
        return (k if num > 0 else -k), e - t
    half = (rem << 1) - (1 << sh)
    if half < 0 or (half == 0 and k % 2 == 0):
        near = k
    else:
        near = k + 1
    return (near if num > 0 else -near), e - t
