"""Logical error rate against p on the Eagle layout, and where it crosses y = p."""

import argparse
import csv
from pathlib import Path

import numpy as np

from arcbench.experiment import ExperimentConfig, build_instances, decode_instance, simulate_instances


def crossing(ps, lers):
    for (p0, y0), (p1, y1) in zip(zip(ps, lers), zip(ps[1:], lers[1:])):
        f0, f1 = y0 - p0, y1 - p1
        if f0 < 0 <= f1:
            return p0 + (p1 - p0) * (-f0) / (f1 - f0)
    return None


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ps", type=float, nargs="+", default=[0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07])
    ap.add_argument("--shots", type=int, default=2_500, help="per code instance (four instances)")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--convention", choices=("total", "mixing"), default="mixing")
    ap.add_argument("--out", default="runs/pseudothreshold")
    args = ap.parse_args()

    base = dict(layout=127, T=10, basis="xz", logicals=(0, 1), run_202=False, noise_convention=args.convention, shots=args.shots)
    inst = build_instances(ExperimentConfig(**base))
    ps = sorted(args.ps)
    lers = []
    for p in ps:
        cfg = ExperimentConfig(p=p, seed=args.seed, **base)
        records = simulate_instances(cfg, inst)
        lers.append(float(np.mean([decode_instance(i, records[i.name]).logical_error_rate for i in inst])))
        print(f"p={p:.4f}  logical error rate={lers[-1]:.5f}")
    x = crossing(ps, lers)
    print("pseudothreshold:", "not bracketed" if x is None else f"{x:.4f}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "ler.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "logical_error_rate"])
        w.writerows(zip(ps, lers))


if __name__ == "__main__":
    main()
