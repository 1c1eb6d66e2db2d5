"""Decay factor against physical error rate on the Eagle layout.

Prints rho and rho/p per error rate and writes rho_vs_p.csv.
"""

import argparse
import csv
from pathlib import Path

from arcbench.experiment import ExperimentConfig, analyze, build_instances, decode_instance, simulate_instances


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ps", type=float, nargs="+", default=[0.002, 0.005, 0.01])
    ap.add_argument("--shots", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--convention", choices=("total", "mixing"), default="mixing")
    ap.add_argument("--out", default="runs/rho_vs_p")
    args = ap.parse_args()

    base = dict(layout=127, T=10, basis="xz", logicals=(0, 1), run_202=False, noise_convention=args.convention, shots=args.shots)
    inst = build_instances(ExperimentConfig(**base))
    rows = []
    for p in args.ps:
        cfg = ExperimentConfig(p=p, seed=args.seed, **base)
        records = simulate_instances(cfg, inst)
        fit = analyze([decode_instance(i, records[i.name]) for i in inst], cfg.min_count).fit
        if fit is None:
            print(f"p={p}: too few cluster sizes to fit")
            continue
        rows.append((p, fit.ln_rho, fit.stderr, fit.rho, fit.rho / p))
        print(f"p={p:.4f}  ln rho={fit.ln_rho:.3f} +/- {fit.stderr:.3f}  rho/p={fit.rho / p:.1f}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "rho_vs_p.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "ln_rho", "stderr", "rho", "rho_over_p"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
