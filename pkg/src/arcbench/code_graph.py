"""Link graphs for alternating repetition codes.

A link is a triple ``(code_a, aux, code_b)``: two code qubits whose parity is
read out through a shared auxiliary. The code qubits and links form the *link
graph*. This module holds the link graph itself plus the graph algorithms the
rest of the package needs: bicolouring, gate scheduling, a cycle basis, and
the edge-cut queries used by the clustering decoder.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

Link = Tuple[int, int, int]
Pair = Tuple[int, int]
Coloring = Dict[int, int]
Schedule = List[List[Pair]]


class LinkGraphError(ValueError):
    """Raised for malformed link graphs, colourings or schedules."""


@dataclass(frozen=True)
class LinkGraph:
    """Immutable link graph.

    ``links`` are ``(code_a, aux, code_b)`` triples. Links are referred to by
    their index in this sequence throughout the package.
    """

    links: Tuple[Link, ...]

    def __post_init__(self):
        links = tuple(tuple(int(q) for q in link) for link in self.links)
        object.__setattr__(self, "links", links)
        if not links:
            raise LinkGraphError("a link graph needs at least one link")
        for link in links:
            if len(link) != 3:
                raise LinkGraphError(f"link {link} is not a (code, aux, code) triple")
            if min(link) < 0:
                raise LinkGraphError(f"negative qubit id in link {link}")
            if link[0] == link[2]:
                raise LinkGraphError(f"link {link} joins a code qubit to itself")
        auxes = [link[1] for link in links]
        if len(set(auxes)) != len(auxes):
            raise LinkGraphError("every auxiliary must belong to exactly one link")
        codes = {q for link in links for q in (link[0], link[2])}
        if codes & set(auxes):
            raise LinkGraphError("a qubit cannot be both a code qubit and an auxiliary")
        pairs = [frozenset((link[0], link[2])) for link in links]
        if len(set(pairs)) != len(pairs):
            raise LinkGraphError("duplicate link between the same code qubits")
        if not self._connected():
            raise LinkGraphError("link graph is disconnected; split it into separate codes")

    def _connected(self) -> bool:
        adj: Dict[int, List[int]] = {}
        for a, _, b in self.links:
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)
        start = next(iter(adj))
        seen = {start}
        stack = [start]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(adj)

    @cached_property
    def code_qubits(self) -> Tuple[int, ...]:
        return tuple(sorted({q for a, _, b in self.links for q in (a, b)}))

    @cached_property
    def aux_qubits(self) -> Tuple[int, ...]:
        return tuple(link[1] for link in self.links)

    @property
    def num_qubits(self) -> int:
        """One more than the largest qubit id in use."""
        return max(max(link) for link in self.links) + 1

    @cached_property
    def incident(self) -> Dict[int, Tuple[int, ...]]:
        """Code qubit -> indices of the links touching it."""
        inc: Dict[int, List[int]] = {q: [] for q in self.code_qubits}
        for i, (a, _, b) in enumerate(self.links):
            inc[a].append(i)
            inc[b].append(i)
        return {q: tuple(v) for q, v in inc.items()}

    @cached_property
    def neighbors(self) -> Dict[int, Tuple[Tuple[int, int], ...]]:
        """Code qubit -> ((other code qubit, link index), ...)."""
        out: Dict[int, List[Tuple[int, int]]] = {q: [] for q in self.code_qubits}
        for i, (a, _, b) in enumerate(self.links):
            out[a].append((b, i))
            out[b].append((a, i))
        return {q: tuple(v) for q, v in out.items()}

    @cached_property
    def aux_to_link(self) -> Dict[int, int]:
        return {link[1]: i for i, link in enumerate(self.links)}

    def endpoints(self, link: int) -> Tuple[int, int]:
        a, _, b = self.links[link]
        return a, b

    def max_degree(self) -> int:
        return max(len(v) for v in self.incident.values())

    def neighbouring_links(self, link: int) -> Tuple[int, ...]:
        """Links sharing a code qubit with ``link``, ascending."""
        a, b = self.endpoints(link)
        return tuple(sorted((set(self.incident[a]) | set(self.incident[b])) - {link}))

    def boundary(self, qubits: Iterable[int]) -> FrozenSet[int]:
        """Links with exactly one endpoint in ``qubits``."""
        s = set(qubits)
        return frozenset(i for i, (a, _, b) in enumerate(self.links) if (a in s) != (b in s))

    def to_json(self, color: Optional[Mapping[int, int]] = None, schedule: Optional[Schedule] = None) -> dict:
        out: dict = {"links": [list(link) for link in self.links]}
        if color is not None:
            out["color"] = {str(q): int(c) for q, c in sorted(color.items())}
        if schedule is not None:
            out["schedule"] = [[list(pair) for pair in layer] for layer in schedule]
        return out


def load_link_graph(source) -> Tuple[LinkGraph, Optional[Coloring], Optional[Schedule]]:
    """Read ``{"links": ..., "color": ..., "schedule": ...}`` from a path or dict."""
    if isinstance(source, (str, Path)):
        data = json.loads(Path(source).read_text())
    else:
        data = source
    if "links" not in data:
        raise LinkGraphError("link graph JSON needs a 'links' entry")
    graph = LinkGraph(tuple(tuple(link) for link in data["links"]))
    color = None
    if data.get("color") is not None:
        color = {int(q): int(c) for q, c in data["color"].items()}
    schedule = None
    if data.get("schedule") is not None:
        schedule = [[(int(p[0]), int(p[1])) for p in layer] for layer in data["schedule"]]
    return graph, color, schedule


# ---------------------------------------------------------------------------
# colouring


def monochromatic_links(graph: LinkGraph, color: Mapping[int, int]) -> int:
    return sum(color[a] == color[b] for a, _, b in graph.links)


def _ball(graph: LinkGraph, center: int, radius: int) -> List[int]:
    seen = {center: 0}
    queue = deque([center])
    while queue:
        v = queue.popleft()
        if seen[v] == radius:
            continue
        for w, _ in graph.neighbors[v]:
            if w not in seen:
                seen[w] = seen[v] + 1
                queue.append(w)
    return sorted(seen)


def auto_color(graph: LinkGraph, max_dist: int = 2) -> Coloring:
    """Two-colour the code qubits, minimising same-coloured links.

    A BFS from the lowest qubit gives a proper colouring whenever the link
    graph is bipartite. Otherwise a local search flips balls of radius
    ``0 .. max_dist - 1`` around each qubit while that strictly reduces the
    number of monochromatic links.
    """
    if max_dist < 1:
        raise ValueError("max_dist must be positive")
    color: Coloring = {}
    root = graph.code_qubits[0]
    color[root] = 0
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w, _ in graph.neighbors[v]:
            if w not in color:
                color[w] = 1 - color[v]
                queue.append(w)

    def cost_delta(ball: List[int]) -> int:
        inside = set(ball)
        delta = 0
        for v in ball:
            for w, _ in graph.neighbors[v]:
                if w in inside:
                    continue
                # only boundary links of the ball change colour relation
                delta += 1 if color[v] != color[w] else -1
        return delta

    improved = True
    while improved:
        improved = False
        for v in graph.code_qubits:
            for radius in range(max_dist):
                ball = _ball(graph, v, radius)
                if cost_delta(ball) < 0:
                    for u in ball:
                        color[u] = 1 - color[u]
                    improved = True
                    break
    return {q: color[q] for q in graph.code_qubits}


def validate_coloring(graph: LinkGraph, color: Mapping[int, int]) -> Coloring:
    missing = [q for q in graph.code_qubits if q not in color]
    if missing:
        raise LinkGraphError(f"colouring misses code qubits {missing}")
    out = {q: int(color[q]) for q in graph.code_qubits}
    if any(c not in (0, 1) for c in out.values()):
        raise LinkGraphError("colours must be 0 or 1")
    return out


# ---------------------------------------------------------------------------
# scheduling


def auto_schedule(graph: LinkGraph) -> Schedule:
    """Greedy edge colouring of the code/auxiliary interaction graph.

    Links are visited in order; each ``(code, aux)`` pair goes into the first
    layer where neither qubit is busy.
    """
    layers: Schedule = []
    busy: List[Set[int]] = []
    for a, aux, b in graph.links:
        for q in (a, b):
            for j, used in enumerate(busy):
                if q not in used and aux not in used:
                    break
            else:
                layers.append([])
                busy.append(set())
                j = len(layers) - 1
            layers[j].append((q, aux))
            busy[j].update((q, aux))
    return layers


def validate_schedule(graph: LinkGraph, schedule: Sequence[Sequence[Pair]]) -> Schedule:
    """Check the three schedule invariants; returns a normalised copy."""
    wanted = {}
    for a, aux, b in graph.links:
        wanted[(a, aux)] = 0
        wanted[(b, aux)] = 0
    out: Schedule = []
    for j, layer in enumerate(schedule):
        seen: Set[int] = set()
        norm = []
        for pair in layer:
            pair = (int(pair[0]), int(pair[1]))
            if pair not in wanted:
                raise LinkGraphError(f"schedule pair {pair} is not part of any link")
            if pair[0] in seen or pair[1] in seen:
                raise LinkGraphError(f"qubit used twice in schedule layer {j}")
            seen.update(pair)
            wanted[pair] += 1
            norm.append(pair)
        out.append(norm)
    bad = [p for p, n in wanted.items() if n != 1]
    if bad:
        raise LinkGraphError(f"pairs {bad} not scheduled exactly once")
    if len(out) < graph.max_degree():
        raise LinkGraphError("fewer layers than the maximum code qubit degree")
    return out


# ---------------------------------------------------------------------------
# cycle basis and edge cuts


@dataclass(frozen=True)
class CycleBasisIndex:
    cycles: Tuple[FrozenSet[int], ...]
    link_to_cycles: Mapping[int, FrozenSet[int]] = field(default_factory=dict)

    def cycles_through(self, links: Iterable[int]) -> Set[int]:
        out: Set[int] = set()
        for link in links:
            out |= self.link_to_cycles.get(link, frozenset())
        return out


def cycle_basis(graph: LinkGraph) -> CycleBasisIndex:
    """Fundamental cycle basis of a BFS spanning tree rooted at the lowest qubit."""
    root = graph.code_qubits[0]
    parent: Dict[int, Tuple[int, int]] = {root: (root, -1)}
    depth = {root: 0}
    queue = deque([root])
    tree_links = set()
    while queue:
        v = queue.popleft()
        for w, link in graph.neighbors[v]:
            if w not in parent:
                parent[w] = (v, link)
                depth[w] = depth[v] + 1
                tree_links.add(link)
                queue.append(w)

    cycles = []
    for link, (a, _, b) in enumerate(graph.links):
        if link in tree_links:
            continue
        path = {link}
        u, v = a, b
        while u != v:
            if depth[u] < depth[v]:
                u, v = v, u
            u, up = parent[u]
            path ^= {up}
        cycles.append(frozenset(path))
    index: Dict[int, Set[int]] = {}
    for c, cyc in enumerate(cycles):
        for link in cyc:
            index.setdefault(link, set()).add(c)
    return CycleBasisIndex(tuple(cycles), {k: frozenset(v) for k, v in index.items()})


def flatten(events: Iterable) -> Set[int]:
    """Links appearing an odd number of times.

    Items are link indices or objects with a ``link`` attribute.
    """
    odd: Set[int] = set()
    for e in events:
        odd ^= {getattr(e, "link", e)}
    return odd


def is_edge_cut(basis: CycleBasisIndex, cut: Iterable[int]) -> bool:
    cut = set(cut)
    for c in basis.cycles_through(cut):
        if len(basis.cycles[c] & cut) % 2:
            return False
    return True


def bicolor_query(
    graph: LinkGraph, basis: CycleBasisIndex, cut: Iterable[int]
) -> Optional[FrozenSet[int]]:
    """Code qubits on one side of an edge cut, or ``None`` if ``cut`` is not one.

    The returned side is the smaller of the two (ties go to the side holding
    the lowest code qubit). Both colour classes are flood-filled together,
    always extending the one with fewer qubits so far, and the fill stops as
    soon as every cut endpoint is coloured and one class has run out of
    qubits to visit. Work is therefore bounded by the smaller side, except in
    the rare case where the larger side completes first.
    """
    cut = frozenset(cut)
    if not cut:
        return frozenset()
    if not is_edge_cut(basis, cut):
        return None

    needed = {q for link in cut for q in graph.endpoints(link)}
    first = min(cut)
    a, b = graph.endpoints(first)
    color = {a: 0, b: 1}
    members: List[List[int]] = [[a], [b]]
    stacks: List[List[int]] = [[a], [b]]
    found = len(needed & {a, b})
    neighbors = graph.neighbors

    while True:
        if found == len(needed):
            done = [c for c in (0, 1) if not stacks[c]]
            if done:
                c = done[0] if len(done) == 1 else min(done, key=lambda k: len(members[k]))
                break
        grow = 0 if len(members[0]) <= len(members[1]) else 1
        if not stacks[grow]:
            grow = 1 - grow
        v = stacks[grow].pop()
        cv = color[v]
        for w, link in neighbors[v]:
            if w in color:
                continue
            cw = cv ^ (link in cut)
            color[w] = cw
            members[cw].append(w)
            stacks[cw].append(w)
            if w in needed:
                found += 1

    region = frozenset(members[c])
    total = len(graph.code_qubits)
    other_size = total - len(region)
    if len(region) < other_size:
        return region
    if len(region) == other_size and graph.code_qubits[0] in region:
        return region
    return frozenset(graph.code_qubits) - region
