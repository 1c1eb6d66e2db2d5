"""Per-edge error estimates on the Eagle layout: class means, worst qubits, time series."""

import argparse
from pathlib import Path

from arcbench import diagnostics as dx
from arcbench.experiment import ExperimentConfig, analyze, build_instances, decode_instance, resolve_layout, simulate_instances, write_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, default=0.01)
    ap.add_argument("--shots", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--resets", type=int, default=1)
    ap.add_argument("--convention", choices=("total", "mixing"), default="mixing")
    ap.add_argument("--out", default="runs/microscopic")
    args = ap.parse_args()

    cfg = ExperimentConfig(layout=127, T=10, basis="xz", logicals=(0, 1), run_202=False, resets=bool(args.resets),
                           p=args.p, noise_convention=args.convention, shots=args.shots, seed=args.seed)
    inst = build_instances(cfg)
    records = simulate_instances(cfg, inst)
    report = analyze([decode_instance(i, records[i.name]) for i in inst], cfg.min_count)
    write_report(report, Path(args.out), resolve_layout(127)[0])

    ests = [e for _, _, est in report.estimates for e in est]
    for cls, v in dx.class_means(ests).items():
        print(f"{cls:15s} mean {v:.4f}  ({v / args.p:.2f} p)")
    means = dx.class_means(ests)
    if "code-bitflip" in means and "code-phaseflip" in means:
        print(f"phase/bit ratio {means['code-phaseflip'] / means['code-bitflip']:.2f}")
    print("worst qubits:", ", ".join(f"{q} ({v:.4f})" for q, v in report.worst_qubits(8)))


if __name__ == "__main__":
    main()
