"""Decoding graph from exhaustive single-fault propagation.

Every single-qubit Pauli at every location of the circuit (plus a flipped
record for every auxiliary measurement) is pushed through the Pauli-frame
engine. The detectors it flips become an edge (two nodes), a self-edge (one
node) or all pairs of a hyperedge (three or more). Edges are keyed by node
pair and error class, and carry the qubit, a time range in fractional
rounds and the number of distinct faults behind them.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from .circuit import CircuitIR
from .detection import DetectionEvent, DetectorSet, build_detectors
from .simulator import Fault, fault_locations, propagate_faults

EDGE_CLASSES = (
    "code-bitflip",
    "code-phaseflip",
    "aux-flip",
    "misassignment",
    "conjugate",
    "feedforward",
)
CODE_CLASSES = ("code-bitflip", "code-phaseflip")
AUX_CLASSES = ("aux-flip", "misassignment")


def time_coordinate(round_: int, layer: int, layers_per_round: int) -> float:
    """Point between layers ``layer - 1`` and ``layer`` of round ``round_``."""
    if not 0 <= layer <= layers_per_round:
        raise ValueError(f"layer {layer} outside 0..{layers_per_round}")
    return round_ + layer / layers_per_round


@dataclass
class Edge:
    nodes: Tuple[int, int]  # node indices, sorted; equal for a self-edge
    cls: str
    qubit: int
    qubits: Tuple[int, ...]
    fault_multiplicity: int
    fault_hull: Tuple[float, float]
    flips_logical: bool = False
    time_range: Tuple[float, float] = (0.0, 0.0)

    @property
    def is_self(self) -> bool:
        return self.nodes[0] == self.nodes[1]


@dataclass(frozen=True)
class FaultRecord:
    """One distinct single fault and what it does."""

    qubit: int
    time: float
    pauli: str  # X, Y, Z or 'A' for a flipped record
    nodes: Tuple[int, ...]
    flips_logical: bool
    cls: str
    fault: Fault


@dataclass
class DecodingGraph:
    circuit: CircuitIR
    detectors: DetectorSet
    edges: List[Edge]
    faults: List[FaultRecord] = field(default_factory=list)

    def __post_init__(self):
        n = len(self.detectors)
        nb = [set() for _ in range(n)]
        self.edge_index: Dict[Tuple[int, int, str], int] = {}
        for k, e in enumerate(self.edges):
            self.edge_index[(e.nodes[0], e.nodes[1], e.cls)] = k
            a, b = e.nodes
            if a != b:
                nb[a].add(b)
                nb[b].add(a)
        self.neighbors: Tuple[Tuple[int, ...], ...] = tuple(tuple(sorted(s)) for s in nb)

    @property
    def nodes(self) -> Tuple[DetectionEvent, ...]:
        return self.detectors.events

    @property
    def undetectable(self) -> List[FaultRecord]:
        return [f for f in self.faults if not f.nodes]

    def degree(self, node: int) -> int:
        return len(self.neighbors[node])

    def max_degree(self) -> int:
        return max((len(n) for n in self.neighbors), default=0)

    def edges_between(self, a: int, b: int) -> List[Edge]:
        a, b = min(a, b), max(a, b)
        return [self.edges[k] for (x, y, _), k in self.edge_index.items() if (x, y) == (a, b)]

    def to_json(self) -> dict:
        nodes = [
            {"time": e.time, "link": e.link, "is_conjugate": e.is_conjugate, "is_final": e.is_final}
            for e in self.nodes
        ]
        edges = [
            {
                "nodes": list(e.nodes),
                "class": e.cls,
                "qubit": e.qubit,
                "qubits": list(e.qubits),
                "time_range": [round(e.time_range[0], 6), round(e.time_range[1], 6)],
                "fault_multiplicity": e.fault_multiplicity,
                "flips_logical": e.flips_logical,
            }
            for e in self.edges
        ]
        return {
            "layers_per_round": self.circuit.layers_per_round,
            "T": self.circuit.T,
            "basis": self.circuit.basis,
            "nodes": nodes,
            "edges": edges,
            "undetectable": len(self.undetectable),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# ---------------------------------------------------------------------------
# locations


def _location_info(circuit: CircuitIR):
    """``(op_index, qubit, time, held)`` for every fault location."""
    lam = circuit.layers_per_round
    T = circuit.T
    cx_at = {}
    for i, op in enumerate(circuit.ops):
        if op.name == "CX":
            cx_at[(op.round, op.layer)] = i

    def when(i: int, before: bool) -> float:
        op = circuit.ops[i]
        r, j = op.round, op.layer
        if r < 0:
            return 0.0
        if r >= T:
            return float(T)
        if op.name == "M" and before:
            return time_coordinate(r, lam - 1, lam)
        if j == lam - 1:
            return float(r + 1)
        c = cx_at.get((r, j))
        if c is not None and i < c:
            return time_coordinate(r, j, lam)
        return time_coordinate(r, j + 1, lam)

    used = sorted(set(circuit.graph.code_qubits) | set(circuit.graph.aux_qubits))
    out = [(-1, q, 0.0, False) for q in used]
    holding = set()
    by_op: Dict[int, List[Tuple[int, bool]]] = {}
    for i, q, before in fault_locations(circuit):
        by_op.setdefault(i, []).append((q, before))
    for i, op in enumerate(circuit.ops):
        for q, before in by_op.get(i, ()):
            out.append((i, q, when(i, before), q in holding))
        if op.name == "M":
            for q, b in zip(op.qubits, op.bits):
                info = circuit.bits[b]
                if circuit.resets and info.link is not None and not info.reset:
                    holding.add(q)
                else:
                    holding.discard(q)
    return out


def _classify(circuit, events, nodes, qubit, is_aux, held) -> str:
    if held:
        return "feedforward"
    if any(events[n].is_conjugate for n in nodes):
        return "conjugate"
    if is_aux:
        if not circuit.resets and len(nodes) == 2:
            a, b = events[nodes[0]], events[nodes[1]]
            if a.link == b.link and abs(a.time - b.time) == 2:
                return "misassignment"
        return "aux-flip"
    return "code-bitflip" if circuit.code_basis(qubit) == "z" else "code-phaseflip"


def _detector_matrix(detectors: DetectorSet, num_bits: int):
    rows, cols = [], []
    for k, bits in enumerate(detectors.bits):
        rows.extend(bits)
        cols.extend([k] * len(bits))
    data = np.ones(len(rows), dtype=np.int32)
    return sparse.csr_matrix((data, (rows, cols)), shape=(num_bits, len(detectors)))


def single_faults(circuit: CircuitIR, detectors: Optional[DetectorSet] = None) -> List[FaultRecord]:
    """Every distinct single fault with its node set.

    Faults at the same qubit and time with the same effect are counted once,
    so several gates inside one layer do not inflate multiplicities.
    """
    detectors = detectors or build_detectors(circuit)
    locs = _location_info(circuit)
    faults: List[Fault] = []
    meta = []
    for i, q, t, held in locs:
        for p in ("X", "Z"):
            faults.append(Fault(op_index=i, qubit=q, pauli=p))
            meta.append((q, t, p, held, False))
    aux = set(circuit.graph.aux_qubits)
    for b, info in enumerate(circuit.bits):
        if info.link is None:
            continue  # final readout flips equal an X right before the measurement
        faults.append(Fault(kind="assignment", bit=b))
        lam = circuit.layers_per_round
        meta.append((info.qubit, time_coordinate(info.round, lam - 1, lam), "A", info.hold_readout, True))

    flips = propagate_faults(circuit, faults).astype(np.int32)
    D = _detector_matrix(detectors, circuit.num_bits)
    hits = (sparse.csr_matrix(flips) @ D).toarray() % 2
    logical = flips[:, detectors.readout_bit].astype(bool)

    events = detectors.events
    records: List[FaultRecord] = []
    seen = set()

    def add(fault, q, t, p, held, node_row, lflip):
        nodes = tuple(int(n) for n in np.nonzero(node_row)[0])
        key = (q, t, nodes, bool(lflip), p == "A")
        if key in seen:
            return
        seen.add(key)
        cls = _classify(circuit, events, nodes, q, q in aux, held)
        records.append(FaultRecord(q, t, p, nodes, bool(lflip), cls, fault))

    k = 0
    while k < len(faults):
        q, t, p, held, assign = meta[k]
        if assign:
            add(faults[k], q, t, "A", held, hits[k], logical[k])
            k += 1
            continue
        fx, fz = faults[k], faults[k + 1]
        add(fx, q, t, "X", held, hits[k], logical[k])
        add(fz, q, t, "Z", held, hits[k + 1], logical[k + 1])
        fy = Fault(op_index=fx.op_index, qubit=q, pauli="Y")
        add(fy, q, t, "Y", held, hits[k] ^ hits[k + 1], logical[k] ^ logical[k + 1])
        k += 2
    return records


# ---------------------------------------------------------------------------
# time ranges


def _interaction_layers(circuit: CircuitIR) -> Dict[Tuple[int, int], int]:
    """Schedule layer of the CX between code qubit and link."""
    out = {}
    a2l = circuit.graph.aux_to_link
    for j, layer in enumerate(circuit.schedule):
        for q, aux in layer:
            out[(q, a2l[aux])] = j
    return out


def assign_time_range(edge: Edge, dgraph: DecodingGraph) -> Tuple[float, float]:
    """Time window, in fractional rounds, in which the edge's error happened."""
    circuit = dgraph.circuit
    lam = circuit.layers_per_round
    if edge.cls not in EDGE_CLASSES:
        raise ValueError(f"unclassifiable edge {edge}")
    if edge.is_self or edge.cls in ("conjugate", "feedforward"):
        return edge.fault_hull
    u, v = (dgraph.nodes[n] for n in edge.nodes)
    if u.time > v.time:
        u, v = v, u
    if u.link == v.link:
        r = u.time
        if circuit.resets:
            return (float(r), float(r + 1))
        if edge.cls == "misassignment":
            return (time_coordinate(r, lam - 1, lam), float(r + 1))
        return (float(r), time_coordinate(r, lam - 1, lam))

    shared = set(circuit.graph.endpoints(u.link)) & set(circuit.graph.endpoints(v.link))
    if len(shared) != 1:
        return edge.fault_hull
    q = shared.pop()
    layers = _interaction_layers(circuit)
    ju, jv = layers[(q, u.link)], layers[(q, v.link)]
    if u.time == v.time:
        t = u.time
        lo = 0.0 if t == 0 else time_coordinate(t - 1, max(ju, jv) + 1, lam)
        hi = float(t) if t >= circuit.T else time_coordinate(t, min(ju, jv), lam)
        return (lo, hi)
    if v.time - u.time == 1 and jv < ju:
        # the later node's link interacts first, so the error sits in between
        r = u.time
        return (time_coordinate(r, jv, lam), time_coordinate(r, ju + 1, lam))
    return edge.fault_hull


# ---------------------------------------------------------------------------


def build(circuit: CircuitIR, detectors: Optional[DetectorSet] = None) -> DecodingGraph:
    detectors = detectors or build_detectors(circuit)
    records = single_faults(circuit, detectors)
    acc: Dict[Tuple[int, int, str], dict] = {}
    for rec in records:
        n = rec.nodes
        if not n:
            continue
        pairs = [(n[0], n[0])] if len(n) == 1 else list(combinations(n, 2))
        for a, b in pairs:
            slot = acc.setdefault(
                (a, b, rec.cls),
                {"mult": 0, "qubits": Counter(), "lo": rec.time, "hi": rec.time, "logical": False},
            )
            slot["mult"] += 1
            slot["qubits"][rec.qubit] += 1
            slot["lo"] = min(slot["lo"], rec.time)
            slot["hi"] = max(slot["hi"], rec.time)
            slot["logical"] |= rec.flips_logical
    edges = []
    for (a, b, cls), slot in sorted(acc.items()):
        qubit = min(slot["qubits"], key=lambda q: (-slot["qubits"][q], q))
        edges.append(
            Edge(
                nodes=(a, b),
                cls=cls,
                qubit=qubit,
                qubits=tuple(sorted(slot["qubits"])),
                fault_multiplicity=slot["mult"],
                fault_hull=(slot["lo"], slot["hi"]),
                flips_logical=slot["logical"],
            )
        )
    dgraph = DecodingGraph(circuit, detectors, edges, records)
    for e in dgraph.edges:
        e.time_range = assign_time_range(e, dgraph)
    return dgraph
