"""Error-rate diagnostics from syndrome statistics.

Microscopic: a per-edge probability from how often the edge's two nodes
fire together versus not at all, then per-qubit and per-time averages.
Macroscopic: an exponential fit to the cluster-size histogram.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .decoding_graph import AUX_CLASSES, CODE_CLASSES, DecodingGraph, Edge

WELL_BEHAVED = 0.10


@dataclass(frozen=True)
class EdgeEstimate:
    edge: Edge
    n00: int
    n11: int
    p_hat: float
    stderr: float
    saturated: bool = False  # n00 == 0, estimate pinned at 1


def _estimate(n00: int, n11: int) -> Tuple[float, float, bool]:
    if n00 == 0:
        return 1.0, math.inf, True
    if n11 == 0:
        return 0.0, 0.0, False
    n = n00 + n11
    p = n11 / n  # equals r / (1 + r) with r = n11 / n00
    return p, math.sqrt(p * (1 - p) / n), False


def cooccurrence(event_matrix: np.ndarray, chunk: int = 8192) -> np.ndarray:
    """``C[a, b]`` = number of shots containing both nodes ``a`` and ``b``."""
    E = np.asarray(event_matrix, dtype=bool)
    C = np.zeros((E.shape[1], E.shape[1]), dtype=np.int64)
    for k in range(0, E.shape[0], chunk):
        blk = E[k : k + chunk].astype(np.float32)
        C += np.rint(blk.T @ blk).astype(np.int64)
    return C


def naive_estimate(event_matrix: np.ndarray, dgraph: DecodingGraph) -> List[EdgeEstimate]:
    """Naive estimate for every edge of ``dgraph`` from a ``(shots, nodes)`` event matrix."""
    E = np.asarray(event_matrix, dtype=bool)
    if E.ndim != 2 or E.shape[0] < 1:
        raise ValueError("need at least one shot")
    N = E.shape[0]
    C = cooccurrence(E)
    out = []
    for e in dgraph.edges:
        a, b = e.nodes
        if a == b:
            n11 = int(C[a, a])
            n00 = N - n11
        else:
            n11 = int(C[a, b])
            n00 = N - int(C[a, a]) - int(C[b, b]) + n11
        p, se, sat = _estimate(n00, n11)
        out.append(EdgeEstimate(e, n00, n11, p, se, sat))
    return out


def qubit_averages(estimates: Iterable[EdgeEstimate], dgraph: Optional[DecodingGraph] = None) -> Dict[int, float]:
    """Unweighted mean estimate over all edges attributed to each qubit.

    Pass the estimates of both basis variants together to average over them.
    """
    acc: Dict[int, List[float]] = defaultdict(list)
    for est in estimates:
        if est.edge.cls in ("conjugate", "feedforward"):
            continue
        acc[est.edge.qubit].append(est.p_hat)
    return {q: float(np.mean(v)) for q, v in sorted(acc.items())}


def _series_time(edge: Edge, resets: bool) -> float:
    lo, hi = edge.time_range
    if edge.cls in AUX_CLASSES:
        if edge.cls == "misassignment":
            return float(round(hi))
        return math.floor(lo + 1e-9) + 0.5
    return round((lo + hi)) / 2  # midpoint rounded to the nearest half round


def time_series(
    estimates: Sequence[EdgeEstimate],
    dgraph: DecodingGraph,
    layers_per_round: Optional[int] = None,
    threshold: float = WELL_BEHAVED,
) -> List[Tuple[float, str, float]]:
    """Mean estimate per (time bin, class), using only well-behaved qubits."""
    averages = qubit_averages(estimates)
    good = {q for q, v in averages.items() if v < threshold}
    bins: Dict[Tuple[float, str], List[float]] = defaultdict(list)
    for est in estimates:
        if est.edge.qubit not in good:
            continue
        t = _series_time(est.edge, dgraph.circuit.resets)
        bins[(t, est.edge.cls)].append(est.p_hat)
    return [(t, cls, float(np.mean(v))) for (t, cls), v in sorted(bins.items())]


def class_means(estimates: Iterable[EdgeEstimate], self_edges: Optional[bool] = None) -> Dict[str, float]:
    acc: Dict[str, List[float]] = defaultdict(list)
    for est in estimates:
        if self_edges is not None and est.edge.is_self != self_edges:
            continue
        acc[est.edge.cls].append(est.p_hat)
    return {k: float(np.mean(v)) for k, v in sorted(acc.items())}


def block_202_estimates(event_matrix: np.ndarray, dgraph: DecodingGraph) -> List[Dict[str, float]]:
    """Conjugate, standard and feedforward error rates for each [[2,0,2]] block.

    conjugate: the self-edge estimate of the central conjugate comparison.
    standard: mean firing rate of the comparisons between the standard
    measurements made while the neighbours are held, i.e. what a self-edge
    on those nodes would report. These errors also reach a neighbour's
    post-block event, so the nodes carry no self-edge here.
    feedforward: mean estimate over the block's feedforward edges.
    """
    E = np.asarray(event_matrix, dtype=bool)
    rate = E.mean(axis=0)
    nodes = dgraph.nodes
    ff = [e for e in naive_estimate(E, dgraph) if e.edge.cls == "feedforward"]
    out = []
    for blk in dgraph.circuit.blocks:
        first, last = blk.start, blk.start + blk.rounds - 1
        conj = sorted(
            (n.time, k) for k, n in enumerate(nodes)
            if n.link == blk.link and n.is_conjugate and first <= n.time <= last
        )
        std = [
            k for k, n in enumerate(nodes)
            if n.link == blk.link and not n.is_conjugate and not n.is_final and first + 4 <= n.time <= last - 2
        ]
        if not conj or not std:
            continue
        mine = [e.p_hat for e in ff if first <= e.edge.time_range[1] and e.edge.time_range[0] <= last + 1]
        out.append({
            "link": blk.link,
            "conjugate": float(rate[conj[len(conj) // 2][1]]),
            "standard": float(np.mean(rate[std])),
            "feedforward": float(np.mean(mine)) if mine else 0.0,
        })
    return out


# ---------------------------------------------------------------------------


def node_flip_probability(q: float, others: int) -> float:
    """Probability that an odd number of ``others`` independent edges fire."""
    return (1.0 - (1.0 - 2.0 * q) ** others) / 2.0


def estimator_error_curve(p: float, q: float, degree: int = 10, against: str = "p") -> float:
    """Relative error of the naive estimate for an edge of probability ``p``.

    Both endpoint nodes carry ``degree - 1`` further edges of probability
    ``q``. ``against='q'`` measures the error relative to ``q`` instead.
    """
    if not (0.0 <= p <= 0.5 and 0.0 <= q <= 0.5):
        raise ValueError("p and q must lie in [0, 0.5]")
    a = node_flip_probability(q, degree - 1)
    p11 = p * (1 - a) ** 2 + (1 - p) * a**2
    p00 = (1 - p) * (1 - a) ** 2 + p * a**2
    p_hat = p11 / (p00 + p11)
    ref = p if against == "p" else q
    return abs(p_hat - ref) / ref


@dataclass(frozen=True)
class DecayFit:
    ln_rho: float
    stderr: float
    sizes: Tuple[int, ...]
    frequencies: Tuple[float, ...]
    min_count: int
    residual_ss: float
    histogram: Mapping[int, float] = field(default_factory=dict)

    @property
    def rho(self) -> float:
        return math.exp(self.ln_rho)


def fit_decay(
    histogram: Mapping[int, float],
    counts: Optional[Mapping[int, int]] = None,
    min_count: int = 5,
    min_size: int = 1,
) -> DecayFit:
    """Least-squares line through ``(size, ln frequency)``.

    Sizes below ``min_size`` are skipped, as are sizes with fewer than
    ``min_count`` clusters when ``counts`` is given.
    """
    sizes = sorted(
        n for n, f in histogram.items()
        if n >= min_size and f > 0 and (counts is None or counts.get(n, 0) >= min_count)
    )
    if len(sizes) < 2:
        raise ValueError("need at least two usable cluster sizes to fit a decay")
    x = np.asarray(sizes, dtype=float)
    y = np.log([histogram[n] for n in sizes])
    res = stats.linregress(x, y)
    resid = y - (res.intercept + res.slope * x)
    return DecayFit(
        ln_rho=float(res.slope),
        stderr=float(res.stderr) if len(sizes) > 2 else 0.0,
        sizes=tuple(sizes),
        frequencies=tuple(float(histogram[n]) for n in sizes),
        min_count=min_count,
        residual_ss=float(np.sum(resid**2)),
        histogram=dict(histogram),
    )


# ---------------------------------------------------------------------------
# CSV and plots

ESTIMATE_COLUMNS = (
    "basis", "node_a", "node_b", "class", "qubit", "t_lo", "t_hi",
    "multiplicity", "n00", "n11", "p_hat", "stderr",
)


def write_estimates_csv(path, rows: Iterable[Tuple[str, DecodingGraph, Sequence[EdgeEstimate]]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ESTIMATE_COLUMNS)
        for basis, dgraph, estimates in rows:
            for est in estimates:
                e = est.edge
                a, b = (dgraph.nodes[n].label() for n in e.nodes)
                w.writerow([
                    basis, a, b, e.cls, e.qubit,
                    f"{e.time_range[0]:.6f}", f"{e.time_range[1]:.6f}",
                    e.fault_multiplicity, est.n00, est.n11,
                    f"{est.p_hat:.8f}", "inf" if math.isinf(est.stderr) else f"{est.stderr:.8f}",
                ])


def write_histogram_csv(path, counts: Mapping[int, int], num_shots: int) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("size", "count", "frequency", "error_bar"))
        bar = 1 / math.sqrt(num_shots) if num_shots else 0.0
        for n in sorted(counts):
            w.writerow((n, counts[n], f"{counts[n] / num_shots:.8f}", f"{bar:.8f}"))


def write_fit_csv(path, fit: Optional[DecayFit]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("ln_rho", "stderr", "rho", "min_size", "max_size", "min_count", "residual_ss"))
        if fit is not None:
            w.writerow((
                f"{fit.ln_rho:.8f}", f"{fit.stderr:.8f}", f"{fit.rho:.8f}",
                fit.sizes[0], fit.sizes[-1], fit.min_count, f"{fit.residual_ss:.8f}",
            ))


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "arcbench"
    return plt


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})


def qubit_positions(graph) -> Dict[int, Tuple[float, float]]:
    """Plot coordinates: code qubits by BFS depth, auxiliaries between their code qubits."""
    from collections import deque

    root = graph.code_qubits[0]
    depth = {root: 0}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w, _ in graph.neighbors[v]:
            if w not in depth:
                depth[w] = depth[v] + 1
                queue.append(w)
    layers: Dict[int, List[int]] = defaultdict(list)
    for q in sorted(depth):
        layers[depth[q]].append(q)
    pos = {}
    for d, qs in layers.items():
        for k, q in enumerate(qs):
            pos[q] = (k - (len(qs) - 1) / 2, -float(d))
    for a, aux, b in graph.links:
        pos[aux] = ((pos[a][0] + pos[b][0]) / 2, (pos[a][1] + pos[b][1]) / 2)
    return pos


def plot_qubits(path, graph, averages: Mapping[int, float], vmax: float = 0.25) -> None:
    plt = _pyplot()
    pos = qubit_positions(graph)
    fig, ax = plt.subplots(figsize=(7, 6))
    for a, aux, b in graph.links:
        ax.plot([pos[a][0], pos[b][0]], [pos[a][1], pos[b][1]], color="0.8", lw=0.8, zorder=0)
    qs = sorted(pos)
    vals = [min(averages.get(q, 0.0), vmax) for q in qs]
    markers = ["o" if q in set(graph.code_qubits) else "s" for q in qs]
    for m in ("o", "s"):
        idx = [i for i, mk in enumerate(markers) if mk == m]
        sc = ax.scatter(
            [pos[qs[i]][0] for i in idx], [pos[qs[i]][1] for i in idx],
            c=[vals[i] for i in idx], cmap="magma_r", vmin=0, vmax=vmax, marker=m, s=60,
            edgecolors="k", linewidths=0.3,
        )
    fig.colorbar(sc, ax=ax, label="error probability")
    ax.set_axis_off()
    _save(fig, path)
    plt.close(fig)


def plot_time_series(path, series: Sequence[Tuple[float, str, float]]) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    by_cls: Dict[str, List[Tuple[float, float]]] = defaultdict(list)
    for t, cls, v in series:
        by_cls[cls].append((t, v))
    for cls in sorted(by_cls):
        pts = sorted(by_cls[cls])
        ax.plot([t for t, _ in pts], [v for _, v in pts], marker="o", label=cls)
    ax.set_xlabel("time (rounds)")
    ax.set_ylabel("mean error probability")
    if by_cls:
        ax.legend(fontsize=8)
    _save(fig, path)
    plt.close(fig)


def plot_histogram(path, counts: Mapping[int, int], num_shots: int, fit: Optional[DecayFit] = None) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    sizes = [n for n in sorted(counts) if n >= 1]
    if sizes and num_shots:
        freq = [counts[n] / num_shots for n in sizes]
        ax.errorbar(sizes, freq, yerr=1 / math.sqrt(num_shots), fmt="o", capsize=2)
        ax.set_yscale("log")
    if fit is not None:
        x = np.asarray(fit.sizes, dtype=float)
        y0 = np.mean(np.log(fit.frequencies)) - fit.ln_rho * np.mean(x)
        ax.plot(x, np.exp(y0 + fit.ln_rho * x), "--", label=f"ln rho = {fit.ln_rho:.3f}")
        ax.legend()
    ax.set_xlabel("cluster size")
    ax.set_ylabel("frequency per shot")
    _save(fig, path)
    plt.close(fig)
