"""Command-line front end.

Subcommands: ``analyze`` prints per-output error bounds for a program,
``simulate`` and ``karatsuba`` run Monte Carlo trials and emit CSV on
stdout, ``mtable`` prints the closed-form rounding-chain lengths of the
subtractive polynomial product, and ``stagnation`` demonstrates chain
summation below the round-to-nearest half-ulp threshold.

CSV rows go to stdout; diagnostics and the coverage summary go to
stderr.  Exit status is 0 on success, 2 on usage errors, 1 on analysis
errors (which are reported as ``file:line:column: message``).
"""

from __future__ import annotations

import argparse
import sys
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path

import numpy as np

from .algorithms import (
    evaluate_rn,
    evaluate_sr,
    input_polynomial,
    karatsuba_dag,
    m_closed_form,
    round_dag_inputs,
)
from .bounds import ConditionUndefined, ah_bound
from .dsl import DslError, lower, parse
from .fp_core import FpFormat
from .graph import BiasedMultiplication, Dag, analyze

CSV_HEADER = [
    "n", "d", "coeff_index", "trial", "seed", "sr_value", "exact_value",
    "sr_error", "rn_error", "bound", "K", "L", "u", "lambda", "input_rounded",
]

_U_MODES = {"step": "step-bound", "paper": "paper"}


class _CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message
        super().__init__(message)


def _dec17(x: Fraction) -> str:
    """Decimal string with 17 significant digits; exact rationals stay exact."""
    if x == 0:
        return "0"
    with localcontext() as ctx:
        ctx.prec = 17
        return str(Decimal(x.numerator) / Decimal(x.denominator))


def _rel_error(approx: float, exact: Fraction) -> Fraction | None:
    if exact == 0:
        return None
    return abs(Fraction(approx) - exact) / abs(exact)


def _check_lambda(lam: float) -> None:
    if not 0.0 < lam < 1.0:
        raise _CliError(1, f"lambda must lie strictly between 0 and 1, got {lam!r}")


def _format_of(args) -> FpFormat:
    u_mode = _U_MODES[getattr(args, "u_mode", "step")]
    try:
        return FpFormat(args.t, u_mode)
    except ValueError as exc:
        raise _CliError(2, str(exc)) from None


def _load_dag(path: str) -> Dag:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _CliError(1, f"cannot read {path}: {exc}") from None
    try:
        return lower(parse(text))
    except DslError as exc:
        span = exc.span
        raise _CliError(1, f"{path}:{span.line}:{span.column}: {exc}") from None
    except BiasedMultiplication as exc:
        loc = f"{path}:{exc.span.line}:{exc.span.column}: " if exc.span else ""
        raise _CliError(1, f"{loc}{exc}") from None


def _trial_seed(key: tuple) -> int:
    return int(np.random.SeedSequence(key).generate_state(1)[0])


def _trial_rows(dag, fmt, targets, trials, seed_prefix, lam, changed, n="", d=""):
    """Rows for one dag: (rows, covered, counted, skipped).

    `targets` lists (coeff_index, node_id) pairs; rows come out grouped by
    target and ordered by trial so concurrency in evaluation order could
    never change the bytes.
    """
    rn_values = evaluate_rn(dag, fmt)
    per_target = []
    for ci, nid in targets:
        node = dag.nodes[nid]
        try:
            a = analyze(dag, nid, fmt)
            bound = ah_bound(a, lam)
            k_str = _dec17(a.K)
        except ConditionUndefined:
            bound = None
            k_str = ""
        per_target.append((ci, nid, node, bound, k_str))

    samples = []
    for trial in range(trials):
        tseed = _trial_seed((*seed_prefix, trial))
        samples.append((tseed, evaluate_sr(dag, fmt, tseed)))

    flag = "true" if changed else "false"
    rows = []
    covered = counted = skipped = 0
    for ci, nid, node, bound, k_str in per_target:
        exact = node.exact
        rn_rel = _rel_error(rn_values[nid], exact)
        for trial, (tseed, values) in enumerate(samples):
            sr_rel = _rel_error(values[nid], exact)
            if bound is None or sr_rel is None:
                skipped += 1
            else:
                counted += 1
                if sr_rel <= Fraction(bound):
                    covered += 1
            rows.append([
                n, d, str(ci), str(trial), str(tseed),
                repr(values[nid]), _dec17(exact),
                "" if sr_rel is None else repr(float(sr_rel)),
                repr(float(rn_rel)) if trial == 0 and rn_rel is not None else "",
                "" if bound is None else repr(bound),
                k_str, str(node.L), repr(fmt.u), repr(lam), flag,
            ])
    return rows, covered, counted, skipped


def _write_csv(rows) -> None:
    import csv

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(rows)


def _report_coverage(covered: int, counted: int, skipped: int) -> None:
    if counted:
        line = f"coverage: {covered}/{counted} = {covered / counted!r}"
    else:
        line = "coverage: 0/0"
    if skipped:
        line += f" ({skipped} rows skipped: undefined condition or zero reference)"
    print(line, file=sys.stderr)


def cmd_analyze(args) -> int:
    fmt = _format_of(args)
    _check_lambda(args.lam)
    dag = _load_dag(args.file)
    dag, changed = round_dag_inputs(dag, fmt)
    print(f"{'output':<16} {'L':>4}  {'K':<22} {'u':<24} bound")
    for name, nid in dag.outputs.items():
        node = dag.nodes[nid]
        try:
            a = analyze(dag, nid, fmt)
            k_str = _dec17(a.K)
            bound_str = repr(ah_bound(a, args.lam))
        except ConditionUndefined:
            k_str = "undefined"
            bound_str = "undefined"
        print(f"{name:<16} {node.L:>4}  {k_str:<22} {fmt.u!r:<24} {bound_str}")
    if changed:
        print("note: some inputs were rounded to the working precision", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    if args.trials < 1:
        raise _CliError(2, "trials must be at least 1")
    fmt = _format_of(args)
    _check_lambda(args.lam)
    dag = _load_dag(args.file)
    dag, changed = round_dag_inputs(dag, fmt)
    targets = [(i, nid) for i, nid in enumerate(dag.outputs.values())]
    rows, covered, counted, skipped = _trial_rows(
        dag, fmt, targets, args.trials, (args.seed,), args.lam, changed
    )
    _write_csv(rows)
    _report_coverage(covered, counted, skipped)
    return 0


def cmd_karatsuba(args) -> int:
    if args.trials < 1:
        raise _CliError(2, "trials must be at least 1")
    if args.n_min < 0 or args.n_min > args.n_max:
        raise _CliError(2, "need 0 <= n-min <= n-max")
    fmt = _format_of(args)
    _check_lambda(args.lam)
    all_rows = []
    covered = counted = skipped = 0
    for n in range(args.n_min, args.n_max + 1):
        rng = np.random.default_rng(np.random.SeedSequence((args.seed, n)))
        size = 2**n
        a_vals = rng.random(size)
        b_vals = rng.random(size)
        if args.dist == "sym":
            a_vals = a_vals - 0.5
            b_vals = b_vals - 0.5
        dag = Dag()
        a = input_polynomial(dag, [Fraction(float(v)) for v in a_vals])
        b = input_polynomial(dag, [Fraction(float(v)) for v in b_vals])
        product = karatsuba_dag(dag, a, b)
        dag, changed = round_dag_inputs(dag, fmt)
        d = len(product.coeffs) - 1
        central = product.coeffs[d // 2]
        rows, cov, cnt, skp = _trial_rows(
            dag, fmt, [(d // 2, central)], args.trials, (args.seed, n),
            args.lam, changed, n=str(n), d=str(d),
        )
        all_rows.extend(rows)
        covered += cov
        counted += cnt
        skipped += skp
    _write_csv(all_rows)
    _report_coverage(covered, counted, skipped)
    return 0


def cmd_mtable(args) -> int:
    if not 0 <= args.n <= 8:
        raise _CliError(2, "n must be between 0 and 8")
    for n in range(args.n + 1):
        d = 2 ** (n + 1) - 2
        values = [m_closed_form(i, d) for i in range(d + 1)]
        if n <= 6:
            dag = Dag()
            a = input_polynomial(dag, [1] * 2**n)
            b = input_polynomial(dag, [1] * 2**n)
            lengths = [dag.nodes[c].L for c in karatsuba_dag(dag, a, b).coeffs]
            if lengths != values:
                raise _CliError(1, f"closed form disagrees with the graph at n={n}")
        print(" ".join(str(v) for v in values))
    return 0


def cmd_stagnation(args) -> int:
    if args.count < 1:
        raise _CliError(2, "count must be at least 1")
    fmt = _format_of(args)
    increment = Fraction(args.increment)
    dag = Dag()
    acc = dag.input(1)
    step = dag.input(increment)
    for _ in range(args.count):
        acc = dag.add(acc, step)
    dag.set_output("acc", acc)
    dag.freeze()
    dag, changed = round_dag_inputs(dag, fmt)
    if changed:
        print("note: increment was rounded to the working precision", file=sys.stderr)
    if increment > Fraction(1, 2 ** (fmt.t + 1)):
        print(
            "note: increment exceeds the half-ulp of 1.0; "
            "round-to-nearest may not stagnate",
            file=sys.stderr,
        )
    exact = dag.nodes[acc].exact
    rn = evaluate_rn(dag, fmt)[acc]
    sr = evaluate_sr(dag, fmt, args.seed)[acc]
    rn_rel = _rel_error(rn, exact)
    sr_rel = _rel_error(sr, exact)
    print(f"exact value: {_dec17(exact)}")
    print(f"rn final: {rn!r}")
    print(f"rn relative error: {'undefined' if rn_rel is None else repr(float(rn_rel))}")
    print(f"sr final: {sr!r}")
    print(f"sr relative error: {'undefined' if sr_rel is None else repr(float(sr_rel))}")
    return 0


def _add_common(p: argparse.ArgumentParser, t_default=24) -> None:
    p.add_argument("--lambda", dest="lam", type=float, default=0.1, metavar="F",
                   help="failure probability of the bound (default 0.1)")
    p.add_argument("--t", type=int, default=t_default, metavar="N",
                   help=f"precision in bits (default {t_default})")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srbound",
        description="Probabilistic error bounds and experiments for stochastic rounding",
    )
    sub = parser.add_subparsers(metavar="command", required=True)

    p = sub.add_parser("analyze", help="print per-output error bounds for a program")
    p.add_argument("file", help="program file")
    _add_common(p)
    p.add_argument("--u-mode", choices=sorted(_U_MODES), default="step",
                   help="unit roundoff convention (default step)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="Monte Carlo trials of a program, CSV output")
    p.add_argument("file", help="program file")
    p.add_argument("--trials", type=int, required=True, metavar="N")
    p.add_argument("--seed", type=int, required=True, metavar="N")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("karatsuba", help="polynomial-product experiment, CSV output")
    p.add_argument("--n-min", type=int, required=True, metavar="N")
    p.add_argument("--n-max", type=int, required=True, metavar="N")
    p.add_argument("--dist", choices=("unit", "sym"), required=True,
                   help="coefficient distribution: uniform [0,1] or [-0.5,0.5]")
    p.add_argument("--trials", type=int, required=True, metavar="N")
    p.add_argument("--seed", type=int, required=True, metavar="N")
    _add_common(p)
    p.set_defaults(func=cmd_karatsuba)

    p = sub.add_parser("mtable", help="rounding-chain lengths of the product coefficients")
    p.add_argument("--n", type=int, required=True, metavar="N",
                   help="largest size exponent (0..8)")
    p.set_defaults(func=cmd_mtable)

    p = sub.add_parser("stagnation", help="chain-sum demo below the half-ulp threshold")
    p.add_argument("--t", type=int, required=True, metavar="N")
    p.add_argument("--count", type=int, required=True, metavar="N")
    p.add_argument("--increment", type=float, required=True, metavar="F")
    p.add_argument("--seed", type=int, default=0, metavar="N")
    p.set_defaults(func=cmd_stagnation)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"srbound: {exc.message}", file=sys.stderr)
        return exc.code
    except BrokenPipeError:
        return 1


if __name__ == "__main__":
    sys.exit(main())
