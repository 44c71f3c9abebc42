"""DAG generators for summation, Horner evaluation, and subtractive
Karatsuba multiplication, plus the Monte Carlo evaluators.

The generators come in two layers: value-level functions that build a
fresh dag from raw numbers, and id-level cores that extend an existing
dag (the expression-language lowering reuses the cores, so both paths
produce identical graphs).

Evaluation rounds every operation node once.  The stochastic evaluator
draws one uniform sample per node id from a generator seeded with the
trial seed, so results are reproducible and independent of how the
topological pass is scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .fp_core import FpFormat, _rn_dyadic, _sr_dyadic, rn_round, sr_round
from .graph import Dag, NodeKind


class ShapeMismatch(ValueError):
    """Operand coefficient counts are unequal or not a power of two."""


class InvalidDegree(ValueError):
    """Output degree is not of the form 2^(n+1) - 2."""


@dataclass(frozen=True)
class Polynomial:
    """Coefficient node ids; index i holds the coefficient of X^i."""

    coeffs: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.coeffs)


def input_polynomial(dag: Dag, values: Sequence) -> Polynomial:
    return Polynomial(tuple(dag.input(v) for v in values))


# --- generators ------------------------------------------------------------


def fold_sum(dag: Dag, ids: Sequence[int]) -> int:
    """Left-to-right chain of additions over existing nodes."""
    if not ids:
        raise ValueError("need at least one value to sum")
    acc = ids[0]
    for i in ids[1:]:
        acc = dag.add(acc, i)
    return acc


def tree_sum(dag: Dag, ids: Sequence[int]) -> int:
    """Balanced summation over existing nodes, splitting ceil(n/2) / floor(n/2)."""
    if not ids:
        raise ValueError("need at least one value to sum")
    if len(ids) == 1:
        return ids[0]
    half = (len(ids) + 1) // 2
    return dag.add(tree_sum(dag, ids[:half]), tree_sum(dag, ids[half:]))


def horner(dag: Dag, coeff_ids: Sequence[int], x_id: int) -> int:
    """Horner chain (..(a_n x + a_{n-1}) x + ..) x + a_0 over existing nodes."""
    if not coeff_ids:
        raise ValueError("need at least one coefficient")
    acc = coeff_ids[-1]
    for c in reversed(coeff_ids[:-1]):
        acc = dag.add(dag.mul(acc, x_id), c)
    return acc


def recursive_sum_dag(values: Sequence) -> tuple[Dag, int]:
    dag = Dag()
    return dag, fold_sum(dag, [dag.input(v) for v in values])


def tree_sum_dag(values: Sequence) -> tuple[Dag, int]:
    dag = Dag()
    return dag, tree_sum(dag, [dag.input(v) for v in values])


def horner_dag(coeffs: Sequence, x) -> tuple[Dag, int]:
    dag = Dag()
    x_id = dag.input(x)
    return dag, horner(dag, [dag.input(c) for c in coeffs], x_id)


def karatsuba_dag(dag: Dag, a: Polynomial, b: Polynomial) -> Polynomial:
    """Subtractive Karatsuba product of two equal power-of-two-length polynomials.

    The result has 2*len - 1 coefficients.  Index shifts cost nothing; only
    the recursive products, the operand differences, and the overlap-region
    additions create nodes.  In the overlap, the middle product's
    contribution is always the last addition, directly under each
    coefficient's root.
    """
    m = len(a.coeffs)
    if m != len(b.coeffs):
        raise ShapeMismatch(
            f"operands must have equal coefficient counts, got {m} and {len(b.coeffs)}"
        )
    if m == 0 or m & (m - 1):
        raise ShapeMismatch(f"coefficient count must be a power of two, got {m}")
    return Polynomial(tuple(_karatsuba(dag, a.coeffs, b.coeffs)))


def _combine(dag: Dag, first: Optional[int], second: Optional[int]) -> Optional[int]:
    if first is None:
        return second
    if second is None:
        return first
    return dag.add(first, second)


def _karatsuba(dag: Dag, a: Sequence[int], b: Sequence[int]) -> list[int]:
    m = len(a)
    if m == 1:
        return [dag.mul(a[0], b[0])]
    h = m // 2
    p0 = _karatsuba(dag, a[:h], b[:h])
    p2 = _karatsuba(dag, a[h:], b[h:])
    da = [dag.sub(a[h + i], a[i]) for i in range(h)]  # A_h - A_l
    db = [dag.sub(b[i], b[h + i]) for i in range(h)]  # B_l - B_h
    p1 = _karatsuba(dag, da, db)
    # r = p2 X^(2h) + (p0 + p1 + p2) X^h + p0, one coefficient at a time
    out = []
    for i in range(2 * m - 1):
        in_mid = h <= i <= 3 * h - 2
        p0_low = p0[i] if i <= 2 * h - 2 else None
        p0_mid = p0[i - h] if in_mid else None
        p1_mid = p1[i - h] if in_mid else None
        p2_mid = p2[i - h] if in_mid else None
        p2_high = p2[i - 2 * h] if i >= 2 * h else None
        inner = _combine(dag, _combine(dag, p2_high, p2_mid), _combine(dag, p0_mid, p0_low))
        out.append(_combine(dag, p1_mid, inner))
    return out


def m_closed_form(i: int, d: int, m_a: int = 0, m_b: int = 0) -> int:
    """Martingale length of product coefficient i for degree-d output,
    given the operands' maximum coefficient lengths."""
    if d < 0 or (d + 2) & (d + 1):
        raise InvalidDegree(f"degree must be 2^(n+1) - 2 for some n >= 0, got {d}")
    if not 0 <= i <= d:
        raise ValueError(f"coefficient index {i} outside [0, {d}]")
    return 1 + 3 * (min(i + 1, d - i + 1).bit_length() - 1) + m_a + m_b


def schoolbook_poly_mul(a: Sequence, b: Sequence) -> list[Fraction]:
    """Exact convolution; the correctness oracle for the Karatsuba builder."""
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        xf = Fraction(x)
        for j, y in enumerate(b):
            out[i + j] += xf * Fraction(y)
    return out


# --- Monte Carlo evaluation ------------------------------------------------


def round_dag_inputs(dag: Dag, fmt: FpFormat) -> tuple[Dag, bool]:
    """Copy of the dag with every input rounded to nearest; the flag reports
    whether any input actually moved (the analysis should be read off the
    rounded copy, which is what the evaluators then see)."""
    out = Dag()
    changed = False
    for node in dag.nodes:
        if node.kind is NodeKind.INPUT:
            rounded = Fraction(rn_round(node.exact, fmt).value)
            changed = changed or rounded != node.exact
            out.input(rounded)
        elif node.kind is NodeKind.ADD:
            out.add(*node.children)
        elif node.kind is NodeKind.SUB:
            out.sub(*node.children)
        else:
            out._mul_unchecked(*node.children)  # structure unchanged, already vetted
    for name, nid in dag.outputs.items():
        out.set_output(name, nid)
    return out, changed


class _FixedSample:
    __slots__ = ("s",)

    def __init__(self, s: float):
        self.s = s

    def random(self) -> float:
        return self.s


def _dyadic_of_fraction(x: Fraction) -> Optional[tuple[int, int]]:
    den = x.denominator
    if den & (den - 1):
        return None
    return x.numerator, 1 - den.bit_length()


def evaluate_sr(dag: Dag, fmt: FpFormat, seed) -> list[float]:
    """One stochastic evaluation; entry i is the rounded value of node i.

    Node i consumes the i-th sample of ``default_rng(seed)``, so a value
    depends only on (seed, node id) and the subgraph below it.
    """
    samples = np.random.default_rng(seed).random(len(dag.nodes))
    return _evaluate(dag, fmt, samples)


def evaluate_rn(dag: Dag, fmt: FpFormat) -> list[float]:
    """Deterministic round-to-nearest evaluation; entry i is node i's value."""
    return _evaluate(dag, fmt, None)


def _evaluate(dag: Dag, fmt: FpFormat, samples) -> list[float]:
    t = fmt.t
    nodes = dag.nodes
    out = [0.0] * len(nodes)
    vals: list = [None] * len(nodes)
    for node in nodes:
        if node.kind is NodeKind.INPUT:
            pair = _dyadic_of_fraction(node.exact)
            if pair is None:
                return _evaluate_exact(dag, fmt, samples)
            vals[node.id] = pair
            out[node.id] = float(node.exact)
            continue
        i, j = node.children
        an, ae = vals[i]
        bn, be = vals[j]
        if node.kind is NodeKind.MUL:
            num, exp = an * bn, ae + be
        else:
            if node.kind is NodeKind.SUB:
                bn = -bn
            if ae <= be:
                num, exp = an + (bn << (be - ae)), ae
            else:
                num, exp = (an << (ae - be)) + bn, be
        if samples is None:
            k, e = _rn_dyadic(num, exp, t)
        else:
            k, e = _sr_dyadic(num, exp, t, float(samples[node.id]))
        vals[node.id] = (k, e)
        out[node.id] = math.ldexp(k, e)
    return out


def _evaluate_exact(dag: Dag, fmt: FpFormat, samples) -> list[float]:
    # rational fallback for dags whose inputs are not dyadic (pre-rounding
    # them with round_dag_inputs is the supported fast path)
    out = [0.0] * len(dag.nodes)
    vals: list[Fraction] = [Fraction(0)] * len(dag.nodes)
    for node in dag.nodes:
        if node.kind is NodeKind.INPUT:
            v = node.exact
        else:
            a, b = vals[node.children[0]], vals[node.children[1]]
            if node.kind is NodeKind.ADD:
                exact = a + b
            elif node.kind is NodeKind.SUB:
                exact = a - b
            else:
                exact = a * b
            if samples is None:
                v = Fraction(rn_round(exact, fmt).value)
            else:
                v = Fraction(sr_round(exact, fmt, _FixedSample(float(samples[node.id]))).value)
        vals[node.id] = v
        out[node.id] = float(v)
    return out
