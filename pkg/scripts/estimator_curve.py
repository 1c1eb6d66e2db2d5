"""Relative error of the naive edge estimate when both nodes have degree 10.

Writes estimator_curve.csv and prints the q = p peak.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from arcbench.diagnostics import estimator_error_curve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--degree", type=int, default=10)
    ap.add_argument("--out", default="runs/estimator")
    args = ap.parse_args()

    ps = np.geomspace(1e-4, 0.2, 200)
    rows = []
    for p in ps:
        rows.append((p, estimator_error_curve(p, p, args.degree), estimator_error_curve(p, p / 10, args.degree),
                     estimator_error_curve(p, min(0.5, 10 * p), args.degree, against="q")))
    peak = max(rows, key=lambda r: r[1])
    print(f"q=p: peak relative error {peak[1]:.2f} at p={peak[0]:.4f}")
    print(f"q=p/10: max relative error for p<=2% {max(r[2] for r in rows if r[0] <= 0.02):.3f}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "estimator_curve.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "rel_err_q_eq_p", "rel_err_q_p_over_10", "rel_err_vs_q_q_10p"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
