"""End-to-end experiment pipeline shared by the CLI and scripts."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import diagnostics as dx
from .circuit import ArcOptions, CircuitIR, build_arc
from .code_graph import LinkGraph, LinkGraphError, cycle_basis, load_link_graph
from .decoder import UnionFindDecoder, histogram_from_sizes, size_counts
from .decoding_graph import DecodingGraph, build as build_decoding_graph
from .detection import extract_counts
from .layouts import generate_heavy_hex, linear_links
from .simulator import CountsRecord, NoiseModel, circuit_id, counts_from_bits, sample_bits

DEMO_202_LINKS = ((0, 1, 4), (4, 7, 10), (10, 12, 15))


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    layout: Any = 127  # heavy-hex size, "line:<d>", "demo-202" or a link-graph JSON path
    T: int = 10
    basis: str = "xz"
    logicals: Tuple[int, ...] = (0, 1)
    resets: bool = True
    run_202: bool = False
    rounds_per_202: int = 9
    links_202: Optional[Tuple[int, ...]] = None
    ff: bool = True
    p: Optional[float] = 0.01
    p1: Optional[float] = None
    p2: Optional[float] = None
    p_meas: Optional[float] = None
    idle: float = 0.0
    noise_convention: str = "total"
    shots: int = 1000
    seed: int = 0
    output: str = "arc_out"
    min_count: int = 5
    workers: int = 1
    method: str = "frame"

    def __post_init__(self):
        if isinstance(self.logicals, (int, str)):
            self.logicals = (int(self.logicals),)
        self.logicals = tuple(int(x) for x in self.logicals)
        if self.links_202 is not None:
            self.links_202 = tuple(int(x) for x in self.links_202)
        if not self.logicals or any(x not in (0, 1) for x in self.logicals):
            raise ConfigError("logicals must be a non-empty list of 0/1 values")
        if self.shots < 1:
            raise ConfigError("shots must be at least 1")
        if self.noise_convention not in ("total", "mixing"):
            raise ConfigError("noise_convention must be 'total' or 'mixing'")
        if self.method not in ("frame", "tableau"):
            raise ConfigError("method must be 'frame' or 'tableau'")
        try:
            self.arc_options(0)
            self.noise_model()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        data = dict(data)
        noise = data.pop("noise", None)
        if isinstance(noise, dict):
            data.update(noise)
        elif noise is not None:
            data["p"] = noise
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        try:
            if path.suffix == ".json":
                data = json.loads(text)
            else:
                try:
                    import tomllib
                except ImportError:  # python < 3.11
                    import tomli as tomllib
                data = tomllib.loads(text)
        except (ValueError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from None
        return cls.from_dict(data)

    def to_json(self) -> dict:
        d = asdict(self)
        d["logicals"] = list(self.logicals)
        if self.links_202 is not None:
            d["links_202"] = list(self.links_202)
        return d

    def noise_model(self) -> NoiseModel:
        if any(v is not None for v in (self.p1, self.p2, self.p_meas)):
            base = self.p or 0.0
            return NoiseModel(
                p1=self.p1 if self.p1 is not None else base,
                p2=self.p2 if self.p2 is not None else base,
                p_meas=self.p_meas if self.p_meas is not None else base,
                idle=self.idle,
            )
        return NoiseModel.uniform(self.p or 0.0, idle=self.idle, convention=self.noise_convention)

    def arc_options(self, logical: int) -> ArcOptions:
        links = self.links_202
        if links is None and self.layout == "demo-202":
            links = (1,)
        return ArcOptions(
            T=self.T,
            basis=self.basis,
            logical=logical,
            resets=self.resets,
            run_202=self.run_202,
            rounds_per_202=self.rounds_per_202,
            links_202=links,
            ff=self.ff,
            delay=1.0 if self.idle > 0 else None,
        )


def resolve_layout(layout) -> Tuple[LinkGraph, Optional[dict], Optional[list]]:
    """Link graph (and optional colouring and schedule) named by a config value."""
    try:
        if isinstance(layout, int) or (isinstance(layout, str) and layout.isdigit()):
            return generate_heavy_hex(int(layout)), None, None
        if layout == "demo-202":
            return LinkGraph(DEMO_202_LINKS), None, None
        if isinstance(layout, str) and layout.startswith("line:"):
            return linear_links(int(layout.split(":", 1)[1])), None, None
        if isinstance(layout, (list, tuple)):
            return LinkGraph(tuple(tuple(x) for x in layout)), None, None
        return load_link_graph(layout)
    except (LinkGraphError, OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"bad layout {layout!r}: {exc}") from None


@dataclass
class Instance:
    basis: str
    logical: int
    circuit: CircuitIR
    dgraph: Optional[DecodingGraph] = None

    @property
    def name(self) -> str:
        return f"{self.basis}_{self.logical}"


def build_instances(cfg: ExperimentConfig, with_graphs: bool = True) -> List[Instance]:
    graph, color, schedule = resolve_layout(cfg.layout)
    out = []
    for logical in cfg.logicals:
        try:
            circuits = build_arc(graph, color, schedule, cfg.arc_options(logical))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for basis, c in circuits.items():
            out.append(Instance(basis, logical, c, build_decoding_graph(c) if with_graphs else None))
    return out


def instance_seed(seed: int, k: int) -> int:
    return int(np.random.SeedSequence([seed, k]).generate_state(1)[0])


def simulate_instances(cfg: ExperimentConfig, instances: Sequence[Instance]) -> Dict[str, CountsRecord]:
    noise = cfg.noise_model()
    out = {}
    for k, inst in enumerate(instances):
        s = instance_seed(cfg.seed, k)
        bits = sample_bits(inst.circuit, noise, cfg.shots, s, method=cfg.method, workers=cfg.workers)
        out[inst.name] = CountsRecord(counts_from_bits(inst.circuit, bits), cfg.shots, s, noise, circuit_id(inst.circuit))
    return out


@dataclass
class InstanceResult:
    instance: Instance
    events: np.ndarray
    raw: np.ndarray
    sizes: List[List[int]]
    corrected: np.ndarray

    @property
    def logical_error_rate(self) -> float:
        return float(np.mean(self.corrected != self.instance.logical))


def decode_instance(inst: Instance, record: CountsRecord, decoder: Optional[UnionFindDecoder] = None) -> InstanceResult:
    if record.circuit_id and record.circuit_id != circuit_id(inst.circuit):
        raise ConfigError(f"counts for {inst.name} were produced by a different circuit")
    events, raw = extract_counts(record.counts, inst.circuit, inst.dgraph.detectors)
    decoder = decoder or UnionFindDecoder(inst.dgraph)
    sizes, corrected = decoder.sizes_and_logicals(events, raw)
    return InstanceResult(inst, events, raw, sizes, corrected)


@dataclass
class Report:
    logical_error_rates: Dict[str, float]
    counts: Dict[int, int]
    num_shots: int
    fit: Optional[dx.DecayFit]
    qubit_averages: Dict[int, float]
    series: List[Tuple[float, str, float]]
    estimates: List[Tuple[str, DecodingGraph, List[dx.EdgeEstimate]]]

    def worst_qubits(self, k: int = 5) -> List[Tuple[int, float]]:
        return sorted(self.qubit_averages.items(), key=lambda kv: (-kv[1], kv[0]))[:k]

    def summary(self) -> dict:
        return {
            "logical_error_rate": self.logical_error_rates,
            "shots": self.num_shots,
            "ln_rho": None if self.fit is None else round(self.fit.ln_rho, 6),
            "ln_rho_stderr": None if self.fit is None else round(self.fit.stderr, 6),
            "cluster_counts": {str(k): v for k, v in self.counts.items()},
            "worst_qubits": [[q, round(v, 6)] for q, v in self.worst_qubits()],
        }


def analyze(results: Sequence[InstanceResult], min_count: int = 5) -> Report:
    all_sizes = [s for r in results for s in r.sizes]
    n = len(all_sizes)
    counts = size_counts(all_sizes)
    hist = histogram_from_sizes(all_sizes, n)
    try:
        fit = dx.fit_decay(hist, counts, min_count=min_count)
    except ValueError:
        fit = None
    estimates = []
    flat = []
    for r in results:
        est = dx.naive_estimate(r.events, r.instance.dgraph)
        estimates.append((r.instance.name, r.instance.dgraph, est))
        flat.extend(est)
    series = dx.time_series(flat, results[0].instance.dgraph) if results else []
    return Report(
        logical_error_rates={r.instance.name: r.logical_error_rate for r in results},
        counts=counts,
        num_shots=n,
        fit=fit,
        qubit_averages=dx.qubit_averages(flat),
        series=series,
        estimates=estimates,
    )


def write_report(report: Report, out: Path, graph: LinkGraph, plots: bool = True) -> None:
    out.mkdir(parents=True, exist_ok=True)
    dx.write_estimates_csv(out / "estimates.csv", report.estimates)
    dx.write_histogram_csv(out / "histogram.csv", report.counts, report.num_shots)
    dx.write_fit_csv(out / "fit.csv", report.fit)
    (out / "summary.json").write_text(json.dumps(report.summary(), indent=2, sort_keys=True) + "\n")
    if plots:
        dx.plot_qubits(out / "qubits.svg", graph, report.qubit_averages)
        dx.plot_time_series(out / "time_series.svg", report.series)
        dx.plot_histogram(out / "histogram.svg", report.counts, report.num_shots, report.fit)
