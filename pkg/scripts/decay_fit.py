"""Cluster-size histogram and exponential decay fit on the Eagle layout.

    python scripts/decay_fit.py --p 0.01 --shots 10000 --out runs/decay
"""

import argparse
from pathlib import Path

from arcbench.experiment import ExperimentConfig, analyze, build_instances, decode_instance, resolve_layout, simulate_instances, write_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=0.01)
    ap.add_argument("--T", type=int, default=10)
    ap.add_argument("--shots", type=int, default=10_000, help="per code instance (four instances)")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--convention", choices=("total", "mixing"), default="mixing")
    ap.add_argument("--out", default="runs/decay")
    args = ap.parse_args()

    cfg = ExperimentConfig(layout=127, T=args.T, basis="xz", logicals=(0, 1), run_202=False, p=args.p,
                           noise_convention=args.convention, shots=args.shots, seed=args.seed, output=args.out)
    inst = build_instances(cfg)
    records = simulate_instances(cfg, inst)
    report = analyze([decode_instance(i, records[i.name]) for i in inst], cfg.min_count)
    write_report(report, Path(args.out), resolve_layout(127)[0])
    for size, n in report.counts.items():
        print(f"size {size:3d}: {n / report.num_shots:.6f} per shot ({n})")
    if report.fit:
        print(f"ln rho = {report.fit.ln_rho:.3f} +/- {report.fit.stderr:.3f}, rho/p = {report.fit.rho / args.p:.1f}")


if __name__ == "__main__":
    main()
