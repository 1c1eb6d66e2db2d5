"""Command line entry point: ``arcbench <layout|build|simulate|decode|analyze|run>``."""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import fields
from pathlib import Path
from typing import List, Optional

from .code_graph import LinkGraphError, auto_color, auto_schedule
from .decoder import UnionFindDecoder
from .experiment import (
    ConfigError,
    ExperimentConfig,
    analyze,
    build_instances,
    decode_instance,
    resolve_layout,
    simulate_instances,
    write_report,
)
from .layouts import generate_heavy_hex, unused_qubits
from .simulator import CountsRecord

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

__all__ = ["main", "ExperimentConfig", "generate_heavy_hex"]


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {s!r}")


def _ints(s: str) -> List[int]:
    return [int(x) for x in s.split(",") if x.strip()]


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML or JSON experiment config")
    p.add_argument("--layout", help="heavy-hex qubit count, line:<d>, demo-202 or link-graph JSON")
    p.add_argument("--T", type=int)
    p.add_argument("--basis")
    p.add_argument("--logicals", type=_ints, help="comma separated, e.g. 0,1")
    p.add_argument("--resets", type=_bool)
    p.add_argument("--run-202", dest="run_202", type=_bool)
    p.add_argument("--rounds-per-202", dest="rounds_per_202", type=int)
    p.add_argument("--links-202", dest="links_202", type=_ints)
    p.add_argument("--ff", type=_bool)
    p.add_argument("--p", type=float, help="error probability for every channel")
    p.add_argument("--p1", type=float)
    p.add_argument("--p2", type=float)
    p.add_argument("--p-meas", dest="p_meas", type=float)
    p.add_argument("--idle", type=float)
    p.add_argument("--noise-convention", dest="noise_convention", choices=("total", "mixing"))
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", "-o")
    p.add_argument("--min-count", dest="min_count", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--method", choices=("frame", "tableau"))


def _config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        data = ExperimentConfig.load(args.config).to_json()
    for f in fields(ExperimentConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            data[f.name] = v
    if isinstance(data.get("layout"), str) and data["layout"].isdigit():
        data["layout"] = int(data["layout"])
    return ExperimentConfig.from_dict(data)


def _counts_path(out: Path, name: str) -> Path:
    return out / f"counts_{name}.json"


def cmd_layout(args) -> int:
    graph, color, schedule = resolve_layout(args.layout or 127)
    color = color or auto_color(graph)
    schedule = schedule or auto_schedule(graph)
    doc = graph.to_json(color, schedule)
    text = json.dumps(doc, indent=1, sort_keys=True)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    n = graph.num_qubits
    print(
        f"code qubits: {len(graph.code_qubits)}  links: {len(graph.links)}  "
        f"unused: {unused_qubits(graph, n)}  schedule layers: {len(schedule)}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_build(args) -> int:
    cfg = _config(args)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    for inst in build_instances(cfg, with_graphs=args.graphs):
        (out / f"circuit_{inst.name}.json").write_text(inst.circuit.dumps() + "\n")
        if inst.dgraph is not None:
            (out / f"decoding_graph_{inst.name}.json").write_text(inst.dgraph.dumps() + "\n")
    (out / "config.json").write_text(json.dumps(cfg.to_json(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config(args)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    instances = build_instances(cfg, with_graphs=False)
    for name, rec in simulate_instances(cfg, instances).items():
        _counts_path(out, name).write_text(json.dumps(rec.to_json(), sort_keys=True) + "\n")
    (out / "config.json").write_text(json.dumps(cfg.to_json(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _load_counts(out: Path, name: str, source: Optional[str]) -> CountsRecord:
    path = Path(source) / f"counts_{name}.json" if source else _counts_path(out, name)
    try:
        return CountsRecord.from_json(json.loads(path.read_text()))
    except OSError as exc:
        raise ConfigError(f"missing counts file {path}: {exc}") from None


def _decode_all(cfg: ExperimentConfig, source: Optional[str]):
    out = Path(cfg.output)
    results = []
    for inst in build_instances(cfg):
        rec = _load_counts(out, inst.name, source)
        results.append(decode_instance(inst, rec, UnionFindDecoder(inst.dgraph)))
    return results


def _write_decodes(out: Path, results) -> None:
    for r in results:
        with open(out / f"decode_{r.instance.name}.jsonl", "w") as fh:
            for k, (sizes, raw, corr) in enumerate(zip(r.sizes, r.raw, r.corrected)):
                rec = {"shot": k, "raw_logical": int(raw), "corrected_logical": int(corr), "cluster_sizes": sizes}
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _print_summary(report) -> None:
    s = report.summary()
    print("logical error rate:")
    for name, v in sorted(s["logical_error_rate"].items()):
        print(f"  {name}: {v:.6f}")
    if report.fit is not None:
        print(f"ln rho: {report.fit.ln_rho:.4f} +/- {report.fit.stderr:.4f}  (rho = {report.fit.rho:.4f})")
    else:
        print("ln rho: not enough cluster sizes to fit")
    print("worst qubits: " + ", ".join(f"{q} ({v:.4f})" for q, v in report.worst_qubits()))


def cmd_decode(args) -> int:
    cfg = _config(args)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    results = _decode_all(cfg, args.counts)
    _write_decodes(out, results)
    for r in results:
        print(f"{r.instance.name}: logical error rate {r.logical_error_rate:.6f}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = _config(args)
    out = Path(cfg.output)
    results = _decode_all(cfg, args.counts)
    report = analyze(results, cfg.min_count)
    graph, _, _ = resolve_layout(cfg.layout)
    write_report(report, out, graph, plots=not args.no_plots)
    _print_summary(report)
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _config(args)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(cfg.to_json(), indent=2, sort_keys=True) + "\n")
    instances = build_instances(cfg)
    records = simulate_instances(cfg, instances)
    results = []
    for inst in instances:
        rec = records[inst.name]
        _counts_path(out, inst.name).write_text(json.dumps(rec.to_json(), sort_keys=True) + "\n")
        results.append(decode_instance(inst, rec))
    _write_decodes(out, results)
    report = analyze(results, cfg.min_count)
    graph, _, _ = resolve_layout(cfg.layout)
    write_report(report, out, graph, plots=not args.no_plots)
    _print_summary(report)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arcbench", description="ARC memory experiments: build, simulate, decode, analyze")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("layout", help="emit a link graph with colouring and schedule")
    p.add_argument("--layout", help="heavy-hex qubit count, line:<d>, demo-202 or link-graph JSON")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("build", help="write circuits (and decoding graphs) as JSON")
    _add_config_args(p)
    p.add_argument("--graphs", action="store_true", help="also write decoding graphs")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("simulate", help="sample noisy counts for every instance")
    _add_config_args(p)
    p.set_defaults(func=cmd_simulate)

    for name, fn, hlp in (
        ("decode", cmd_decode, "decode counts into JSON lines"),
        ("analyze", cmd_analyze, "estimates, histogram, fit and plots from counts"),
    ):
        p = sub.add_parser(name, help=hlp)
        _add_config_args(p)
        p.add_argument("--counts", help="directory with counts_<basis>_<logical>.json (default: output)")
        if name == "analyze":
            p.add_argument("--no-plots", action="store_true")
        p.set_defaults(func=fn)

    p = sub.add_parser("run", help="build, simulate, decode and analyze")
    _add_config_args(p)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            return args.func(args)
    except (ConfigError, LinkGraphError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - report and map to the runtime exit code
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
