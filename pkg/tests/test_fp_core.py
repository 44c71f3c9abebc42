"""Rounding emulation checked against an independent bit-twiddling oracle.

The oracle works directly on the binary64 bit pattern: truncating the low
52 - t significand bits gives the lower neighbor on the emulated t-bit grid,
and incrementing the truncated pattern by one grid step gives the upper
neighbor (the carry out of the significand rolls into the exponent field,
which lands exactly on the next binade boundary).
"""

import random
import struct
from fractions import Fraction

import numpy as np
import pytest

from srbound.fp_core import (
    FpFormat,
    OutOfRange,
    neighbors,
    p_fraction,
    rn_round,
    sr_op,
    sr_round,
)


def _bits(x: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", x))[0]


def _from_bits(b: int) -> float:
    return struct.unpack("<d", struct.pack("<Q", b))[0]


def oracle_neighbors(x: float, t: int) -> tuple[float, float]:
    # valid only for normal binary64 x and 2 <= t <= 52
    if x < 0.0:
        lo, hi = oracle_neighbors(-x, t)
        return -hi, -lo
    drop = 52 - t
    b = _bits(x)
    down = b & ~((1 << drop) - 1)
    if down == b:
        return x, x
    return _from_bits(down), _from_bits(down + (1 << drop))


def oracle_p(x: float, t: int) -> Fraction:
    down, up = oracle_neighbors(x, t)
    if down == up:
        return Fraction(0)
    return (Fraction(x) - Fraction(down)) / (Fraction(up) - Fraction(down))


def oracle_rn(x: float, t: int) -> float:
    down, up = oracle_neighbors(x, t)
    if down == up:
        return x
    dd = Fraction(x) - Fraction(down)
    du = Fraction(up) - Fraction(x)
    if dd < du:
        return down
    if du < dd:
        return up
    # tie: even grid index, i.e. the significand bit just above the cut is 0
    return down if (_bits(abs(down)) >> (52 - t)) & 1 == 0 else up


class _StubRng:
    """Yields a fixed list of samples; fails loudly if over-consumed."""

    def __init__(self, *samples: float):
        self._samples = list(samples)

    def random(self) -> float:
        return self._samples.pop(0)


def _random_inputs(t: int, count: int) -> list[float]:
    rng = random.Random(1000 + t)
    drop = 52 - t
    out = []
    for _ in range(count):
        x = rng.uniform(1.0, 2.0) * 2.0 ** rng.randint(-40, 40)
        kind = rng.randrange(4)
        if kind == 1:
            x = _from_bits(_bits(x) & ~((1 << drop) - 1))  # on the grid
        elif kind == 2:
            x = _from_bits((_bits(x) & ~((1 << drop) - 1)) | (1 << (drop - 1)))  # midpoint
        if rng.random() < 0.5:
            x = -x
        out.append(x)
    return out


@pytest.mark.parametrize("t", [5, 11, 24])
def test_neighbors_and_p_match_bit_oracle(t):
    fmt = FpFormat(t)
    for x in _random_inputs(t, 10_000):
        assert neighbors(x, fmt) == oracle_neighbors(x, t), x
        assert p_fraction(x, fmt) == oracle_p(x, t), x


@pytest.mark.parametrize("t", [5, 11, 24])
def test_rn_round_matches_oracle_and_is_nearest(t):
    fmt = FpFormat(t)
    for x in _random_inputs(t, 2_000):
        got = rn_round(x, fmt)
        assert got.value == oracle_rn(x, t), x
        down, up = neighbors(x, fmt)
        assert abs(Fraction(got.value) - Fraction(x)) == min(
            abs(Fraction(down) - Fraction(x)), abs(Fraction(up) - Fraction(x))
        )


def test_neighbors_known_values():
    fmt = FpFormat(24)
    assert neighbors(1.5, fmt) == (1.5, 1.5)
    x = 1.0 + 2.0**-25
    assert neighbors(x, fmt) == (1.0, 1.0 + 2.0**-24)
    assert neighbors(-x, fmt) == (-(1.0 + 2.0**-24), -1.0)
    assert neighbors(0.0, fmt) == (0.0, 0.0)


def test_p_fraction_known_values():
    fmt = FpFormat(24)
    assert p_fraction(1.5, fmt) == 0
    assert p_fraction(1.0 + 2.0**-25, fmt) == Fraction(1, 2)
    assert p_fraction(1.0 + 2.0**-26, fmt) == Fraction(1, 4)
    assert p_fraction(-(1.0 + 2.0**-26), fmt) == Fraction(3, 4)
    assert p_fraction(0, fmt) == 0


def test_p_fraction_accepts_exact_rationals():
    fmt = FpFormat(24)
    # 1/3 sits in [1/4, 1/2); spacing there is 2^-26
    p = p_fraction(Fraction(1, 3), fmt)
    down, up = neighbors(Fraction(1, 3), fmt)
    assert 0 < p < 1
    assert Fraction(down) + p * (Fraction(up) - Fraction(down)) == Fraction(1, 3)


def test_sr_round_representable_is_exact():
    fmt = FpFormat(24)
    got = sr_round(1.5, fmt, _StubRng())  # no draw needed
    assert got == (1.5, 0.0)
    assert sr_round(0.0, fmt, _StubRng()) == (0.0, 0.0)


def test_sr_round_two_point_support_and_probability_edge():
    fmt = FpFormat(24)
    x = 1.0 + 2.0**-25  # p = 1/2
    assert sr_round(x, fmt, _StubRng(0.499)).value == 1.0 + 2.0**-24
    assert sr_round(x, fmt, _StubRng(0.5)).value == 1.0
    rng = np.random.default_rng(7)
    seen = {sr_round(x, fmt, rng).value for _ in range(64)}
    assert seen == {1.0, 1.0 + 2.0**-24}


def test_sr_round_negative_mirror():
    fmt = FpFormat(24)
    x = -(1.0 + 2.0**-26)  # p(up) = 3/4, up = -1
    assert sr_round(x, fmt, _StubRng(0.74)).value == -1.0
    assert sr_round(x, fmt, _StubRng(0.76)).value == -(1.0 + 2.0**-24)


def test_sr_round_value_always_a_neighbor():
    rng = np.random.default_rng(21)
    for t in (5, 11, 24):
        fmt = FpFormat(t)
        for x in _random_inputs(t, 500):
            down, up = neighbors(x, fmt)
            got = sr_round(x, fmt, rng)
            assert got.value in (down, up)
            assert down <= got.value <= up


def test_delta_bound_exhaustive_small_t():
    # every grid cell in a few binades, sampled at several interior points,
    # rounded both ways: |delta| <= 2^(1-t)
    t = 2
    fmt = FpFormat(t)
    bound = Fraction(2) ** (1 - t)
    for e in range(-2, 3):
        h = Fraction(2) ** (e - t)
        for k in range(2**t, 2 ** (t + 1)):
            down = k * h
            for f in (Fraction(1, 8), Fraction(1, 2), Fraction(7, 8)):
                for x in (down + f * h, -(down + f * h)):
                    lo = sr_round(x, fmt, _StubRng(0.9999999)).delta
                    hi = sr_round(x, fmt, _StubRng(0.0)).delta
                    rn = rn_round(x, fmt).delta
                    for d in (lo, hi, rn):
                        assert abs(Fraction(d)) <= bound
                    v_lo = sr_round(x, fmt, _StubRng(0.9999999)).value
                    assert abs(Fraction(v_lo) - x) / abs(x) <= bound


def test_rn_ties_to_even():
    fmt = FpFormat(24)
    h = Fraction(2) ** -24
    even_down = 1.0 + 2.0**-23  # grid index even
    odd_down = 1.0 + 2.0**-24  # grid index odd
    assert rn_round(Fraction(even_down) + h / 2, fmt).value == even_down
    assert rn_round(Fraction(odd_down) + h / 2, fmt).value == float(Fraction(odd_down) + h)


def test_sr_op_exact_sum_and_half_probability():
    fmt = FpFormat(24)
    assert sr_op(1.0, 1.0, "+", fmt, _StubRng()) == (2.0, 0.0)
    got = sr_op(1.0, 2.0**-25, "+", fmt, _StubRng(0.499)).value
    assert got == 1.0 + 2.0**-24
    assert sr_op(1.0, 2.0**-25, "+", fmt, _StubRng(0.5)).value == 1.0
    assert sr_op(1.0, 0.75, "-", fmt, _StubRng()).value == 0.25


def test_sr_op_exact_product_below_working_precision():
    # (1+2^-23)^2 = 1 + 2^-22 + 2^-46; the 2^-46 tail must survive into p
    fmt = FpFormat(24)
    a = 1.0 + 2.0**-23
    exact = Fraction(a) * Fraction(a)
    down, up = 1.0 + 2.0**-22, 1.0 + 2.0**-22 + 2.0**-24
    assert neighbors(exact, fmt) == (down, up)
    assert p_fraction(exact, fmt) == Fraction(1, 2**22)
    assert sr_op(a, a, "*", fmt, _StubRng(2.0**-23)).value == up
    assert sr_op(a, a, "*", fmt, _StubRng(2.0**-22)).value == down


def test_sr_op_rejects_unknown_operator():
    fmt = FpFormat(24)
    with pytest.raises(ValueError):
        sr_op(1.0, 2.0, "/", fmt, _StubRng(0.5))


def test_empirical_unbiasedness():
    # sigma^2 = p(1-p) (up-down)^2 with p = 1/4; compare exactly via counts
    fmt = FpFormat(24)
    x = Fraction(1) + Fraction(2) ** -26
    n = 100_000
    rng = np.random.default_rng(2026)
    base = 1.0
    step = Fraction(2) ** -24
    ups = sum(1 for _ in range(n) if sr_round(x, fmt, rng).value != base)
    mean = Fraction(1) + Fraction(ups, n) * step
    var = Fraction(1, 4) * Fraction(3, 4) * step**2
    assert (mean - x) ** 2 <= 16 * var / n


def test_out_of_range():
    fmt = FpFormat(24)
    with pytest.raises(OutOfRange):
        neighbors(Fraction(2) ** 1030, fmt)
    with pytest.raises(OutOfRange):
        neighbors(Fraction(2) ** -1030, fmt)
    with pytest.raises(OutOfRange):
        neighbors(float("inf"), fmt)
    with pytest.raises(OutOfRange):
        neighbors(float("nan"), fmt)
    # top binade value whose upper neighbor would be 2^1024
    top = (2 ** (fmt.t + 1) - 1) * Fraction(2) ** (1023 - fmt.t)
    assert neighbors(top, fmt) == (float(top), float(top))
    with pytest.raises(OutOfRange):
        neighbors(top + Fraction(1, 7) * Fraction(2) ** (1023 - fmt.t), fmt)
    # the same value is fine one binade down
    ok = (2 ** (fmt.t + 1) - 1) * Fraction(2) ** (1022 - fmt.t)
    down, up = neighbors(ok + Fraction(2) ** 990, fmt)
    assert down == float(ok) and up == 2.0**1023


def test_format_validation_and_u():
    with pytest.raises(ValueError):
        FpFormat(1)
    with pytest.raises(ValueError):
        FpFormat(53)
    with pytest.raises(ValueError):
        FpFormat(24, "nearest")
    assert FpFormat(24).u == 2.0**-23
    assert FpFormat(24, "paper").u == 2.0**-24
    assert FpFormat(24, "step-bound").u == 2.0**-23
