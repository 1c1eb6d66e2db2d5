"""Builtin qubit layouts expressed as link graphs."""

from __future__ import annotations

from typing import Dict, List, Tuple

from .code_graph import Link, LinkGraph, LinkGraphError

# Eagle (127 qubit) heavy-hex: seven rows joined by columns of bridge qubits.
# Each entry is (first qubit, last qubit) of a row.
_EAGLE_ROWS = [(0, 13), (18, 32), (37, 51), (56, 70), (75, 89), (94, 108), (113, 126)]
# (bridge qubit, qubit in row above, qubit in row below)
_EAGLE_BRIDGES = [
    (14, 0, 18), (15, 4, 22), (16, 8, 26), (17, 12, 30),
    (33, 20, 39), (34, 24, 43), (35, 28, 47), (36, 32, 51),
    (52, 37, 56), (53, 41, 60), (54, 45, 64), (55, 49, 68),
    (71, 58, 77), (72, 62, 81), (73, 66, 85), (74, 70, 89),
    (90, 75, 94), (91, 79, 98), (92, 83, 102), (93, 87, 106),
    (109, 96, 114), (110, 100, 118), (111, 104, 122), (112, 108, 126),
]


def eagle_coupling_map() -> List[Tuple[int, int]]:
    """Qubit pairs of the 127 qubit heavy-hex device."""
    edges = []
    for lo, hi in _EAGLE_ROWS:
        edges.extend((q, q + 1) for q in range(lo, hi))
    for bridge, up, down in _EAGLE_BRIDGES:
        edges.append((up, bridge))
        edges.append((bridge, down))
    return edges


def links_from_coupling_map(edges, code_qubits) -> List[Link]:
    """Turn degree-2 auxiliaries sitting between two code qubits into links."""
    code = set(code_qubits)
    adj: Dict[int, List[int]] = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    links = []
    for q in sorted(adj):
        if q in code:
            continue
        nb = sorted(w for w in adj[q] if w in code)
        if len(nb) == 2:
            links.append((nb[0], q, nb[1]))
    return links


def _eagle_links() -> List[Link]:
    bridge_ends = set()
    for _, up, down in _EAGLE_BRIDGES:
        bridge_ends.update((up, down))
    code = set()
    for lo, hi in _EAGLE_ROWS:
        # code qubits alternate along a row, in phase with the bridge ends
        parity = min(q for q in range(lo, hi + 1) if q in bridge_ends) % 2
        code.update(q for q in range(lo, hi + 1) if q % 2 == parity)
    # row ends that would need a missing neighbour are auxiliaries with one
    # code qubit; links_from_coupling_map drops them (13 and 113)
    return links_from_coupling_map(eagle_coupling_map(), code)


def _hexagon_links() -> List[Link]:
    return [(q, q + 1, (q + 2) % 12) for q in range(0, 12, 2)]


SUPPORTED_HEAVY_HEX = (12, 127)


def generate_heavy_hex(num_qubits: int) -> LinkGraph:
    """Heavy-hex link graph for a supported device size.

    127 gives the Eagle layout (54 code qubits, 71 links, qubits 13 and 113
    unused); 12 gives a single hexagon.
    """
    if num_qubits == 127:
        return LinkGraph(tuple(_eagle_links()))
    if num_qubits == 12:
        return LinkGraph(tuple(_hexagon_links()))
    raise LinkGraphError(
        f"no heavy-hex layout with {num_qubits} qubits; supported: {SUPPORTED_HEAVY_HEX}"
    )


def linear_links(d: int) -> LinkGraph:
    """Line of ``d`` code qubits; code qubits even, auxiliaries odd."""
    if d < 2:
        raise LinkGraphError("a linear code needs at least two code qubits")
    return LinkGraph(tuple((2 * i, 2 * i + 1, 2 * i + 2) for i in range(d - 1)))


def unused_qubits(graph: LinkGraph, num_qubits: int) -> List[int]:
    used = set(graph.code_qubits) | set(graph.aux_qubits)
    return [q for q in range(num_qubits) if q not in used]
