#!/usr/bin/env python3
"""Render the polynomial-product experiment CSV as a two-panel figure.

Reads two CSV files produced by ``srbound karatsuba`` (one per
coefficient distribution) and plots relative error against the product
degree d on log-log axes: stochastic-rounding trials as a scatter,
round-to-nearest as a line, and the probabilistic bound as a line.  The
plotted values are exactly the CSV values; the only processing is
grouping by d.

Usage: plot_karatsuba.py --unit unit.csv --sym sym.csv --out figure.png
"""

import argparse
import csv
import sys

EXPECTED_COLUMNS = [
    "n", "d", "coeff_index", "trial", "seed", "sr_value", "exact_value",
    "sr_error", "rn_error", "bound", "K", "L", "u", "lambda", "input_rounded",
]


class SchemaError(ValueError):
    pass


def load_series(path: str) -> dict:
    """Extract the plotted series: SR points, per-d RN error and bound.

    Raises SchemaError naming the first offending column, or when the
    file holds no data rows.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        for column in EXPECTED_COLUMNS:
            if column not in fields:
                raise SchemaError(f"{path}: missing column {column!r}")
        for column in fields:
            if column not in EXPECTED_COLUMNS:
                raise SchemaError(f"{path}: unexpected column {column!r}")
        sr_points: list[tuple[int, float]] = []
        rn: dict[int, float] = {}
        bound: dict[int, float] = {}
        lambdas: set[float] = set()
        for row in reader:
            d = int(row["d"])
            if row["sr_error"]:
                sr_points.append((d, float(row["sr_error"])))
            if row["rn_error"]:
                rn[d] = float(row["rn_error"])
            if row["bound"]:
                bound[d] = float(row["bound"])
            if row["lambda"]:
                lambdas.add(float(row["lambda"]))
    if not sr_points:
        raise SchemaError(f"{path}: no data rows")
    return {
        "sr": sr_points,
        "rn": dict(sorted(rn.items())),
        "bound": dict(sorted(bound.items())),
        "lambda": sorted(lambdas),
    }


def render(unit_path: str, sym_path: str, out_path: str) -> None:
    # load (and validate) everything before any file is created
    panels = [
        (load_series(unit_path), "coefficients in [0, 1]"),
        (load_series(sym_path), "coefficients in [-0.5, 0.5]"),
    ]

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 2, figsize=(11.0, 4.5), sharey=True)
    for ax, (series, title) in zip(axes, panels):
        xs = [d for d, _ in series["sr"]]
        ys = [e for _, e in series["sr"]]
        ax.scatter(xs, ys, s=14, alpha=0.55, color="tab:blue", label="SR trials")
        ax.plot(
            list(series["rn"]), list(series["rn"].values()),
            color="tab:orange", marker="o", label="RN",
        )
        ax.plot(
            list(series["bound"]), list(series["bound"].values()),
            color="tab:red", marker="s", linestyle="--", label="bound",
        )
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("product degree d")
        ax.set_title(title)
        ax.grid(True, which="both", alpha=0.3)
    axes[0].set_ylabel("relative error")
    axes[0].legend(loc="upper left")
    lam = ", ".join(repr(v) for v in sorted({*panels[0][0]["lambda"], *panels[1][0]["lambda"]}))
    fig.suptitle(f"Relative error of the subtractive polynomial product (λ = {lam})")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[1])
    parser.add_argument("--unit", required=True, help="CSV for the [0,1] distribution")
    parser.add_argument("--sym", required=True, help="CSV for the [-0.5,0.5] distribution")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        render(args.unit, args.sym, args.out)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"plot_karatsuba: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
