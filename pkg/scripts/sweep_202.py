"""[[2,0,2]] block estimates on the three-link demo line across error rates.

Averaged over the 'xy' and 'yx' basis variants and both logicals.
"""

import argparse

import numpy as np

from arcbench import diagnostics as dx
from arcbench.experiment import ExperimentConfig, build_instances, decode_instance, simulate_instances


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ps", type=float, nargs="+", default=[0.0, 0.005, 0.01, 0.015, 0.025])
    ap.add_argument("--shots", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--ff", type=int, default=1)
    ap.add_argument("--convention", choices=("total", "mixing"), default="mixing")
    args = ap.parse_args()

    print(f"{'p':>7} {'conjugate':>10} {'standard':>10} {'feedforward':>12}")
    for p in args.ps:
        acc = {"conjugate": [], "standard": [], "feedforward": []}
        for basis in ("xy", "yx"):
            cfg = ExperimentConfig(layout="demo-202", T=10, basis=basis, run_202=True, ff=bool(args.ff), p=p,
                                   noise_convention=args.convention, shots=args.shots, seed=args.seed)
            inst = build_instances(cfg)
            records = simulate_instances(cfg, inst)
            for i in inst:
                r = decode_instance(i, records[i.name])
                for row in dx.block_202_estimates(r.events, i.dgraph):
                    for k in acc:
                        acc[k].append(row[k])
        print(f"{p:7.4f} {np.mean(acc['conjugate']):10.4f} {np.mean(acc['standard']):10.4f} {np.mean(acc['feedforward']):12.4f}")


if __name__ == "__main__":
    main()
