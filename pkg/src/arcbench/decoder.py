"""Clustering decoder (Union-Find style) for ARC syndromes.

Each event starts its own cluster. Every round, all clusters that are not
yet neutral grow by half an edge along all their boundary edges; clusters
meeting on a fully grown edge merge. A cluster is neutral when the links
of its standard events, taken with odd multiplicity, form an edge cut of
the link graph. Neutrality is first evaluated after a cluster's first
growth step, so that isolated events get a chance to pair up before being
explained by code-qubit errors alone.

The flipped region of a neutral cluster is the smaller side of its cut;
the raw logical readout is toggled once for every region containing the
readout qubit. When both sides have the same size (even-length lines),
the side that leaves fewer events to be explained as measurement errors
wins; clusters still tied after that are settled together so the net set
of flipped qubits is smallest.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .code_graph import CycleBasisIndex, bicolor_query, cycle_basis
from .decoding_graph import DecodingGraph
from .detection import DetectionEvent, ShotSyndrome


class DecodeError(RuntimeError):
    pass


@dataclass(frozen=True)
class Cluster:
    nodes: FrozenSet[DetectionEvent]
    neutral: bool
    flip_region: FrozenSet[int]
    size: int


@dataclass(frozen=True)
class DecodeResult:
    clusters: Tuple[Cluster, ...]
    raw_logical: int
    corrected_logical: int

    @property
    def logical_flipped(self) -> bool:
        return self.corrected_logical != self.raw_logical

    def to_json(self) -> dict:
        return {
            "raw_logical": self.raw_logical,
            "corrected_logical": self.corrected_logical,
            "clusters": [
                {
                    "nodes": sorted([e.time, e.link, int(e.is_conjugate), int(e.is_final)] for e in c.nodes),
                    "size": c.size,
                    "flip_region": sorted(c.flip_region),
                }
                for c in self.clusters
            ],
        }


class UnionFindDecoder:
    """Reusable decoder for one decoding graph (shared read-only state)."""

    def __init__(self, dgraph: DecodingGraph, basis: Optional[CycleBasisIndex] = None, cache_size: int = 200_000):
        self.dgraph = dgraph
        self.graph = dgraph.circuit.graph
        self.basis = basis or cycle_basis(self.graph)
        self.nbrs = [list(n) for n in dgraph.neighbors]
        self.node_link = [e.link for e in dgraph.nodes]
        self.node_std = [not e.is_conjugate for e in dgraph.nodes]
        self.readout = dgraph.circuit.readout_qubit
        self._cut_cache: Dict[FrozenSet[int], Optional[FrozenSet[int]]] = {}
        self._cache_size = cache_size

    def _region(self, events: Iterable[int]) -> Optional[FrozenSet[int]]:
        odd = set()
        link, std = self.node_link, self.node_std
        for v in events:
            if std[v]:
                odd ^= {link[v]}
        key = frozenset(odd)
        try:
            return self._cut_cache[key]
        except KeyError:
            pass
        region = bicolor_query(self.graph, self.basis, key)
        if len(self._cut_cache) < self._cache_size:
            self._cut_cache[key] = region
        return region

    def clusters(self, events: Sequence[int]) -> List[Tuple[List[int], FrozenSet[int]]]:
        """Group event node indices into neutral clusters with their flip regions."""
        events = sorted(set(int(e) for e in events))
        if not events:
            return []
        nbrs = self.nbrs
        parent: Dict[int, int] = {v: v for v in events}
        members: Dict[int, List[int]] = {v: [v] for v in events}
        odd: Dict[int, List[int]] = {v: [v] for v in events}
        boundary: Dict[int, List[int]] = {v: [v] for v in events}
        support: Dict[Tuple[int, int], int] = {}
        region: Dict[int, FrozenSet[int]] = {}
        active = list(events)

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        while active:
            fuse = []
            grew = False
            for root in active:
                for v in boundary[root]:
                    for w in nbrs[v]:
                        key = (v, w) if v < w else (w, v)
                        s = support.get(key, 0)
                        if s < 2:
                            grew = True
                            support[key] = s + 1
                            if s == 1:
                                fuse.append(key)
            if not grew:
                raise DecodeError("clusters cannot grow further but are not neutral; invalid syndrome")

            touched = set(active)
            for v, w in fuse:
                for x in (v, w):
                    if x not in parent:
                        parent[x] = x
                        members[x] = [x]
                        odd[x] = []
                        boundary[x] = [x]
                rv, rw = find(v), find(w)
                if rv == rw:
                    continue
                if len(members[rv]) < len(members[rw]):
                    rv, rw = rw, rv
                parent[rw] = rv
                members[rv].extend(members.pop(rw))
                odd[rv].extend(odd.pop(rw))
                boundary[rv].extend(boundary.pop(rw))
                region.pop(rw, None)
                touched.discard(rw)
                touched.add(rv)

            roots = {find(r) for r in touched}
            active = []
            for root in sorted(roots):
                boundary[root] = [
                    v for v in boundary[root]
                    if any(support.get((v, w) if v < w else (w, v), 0) < 2 for w in nbrs[v])
                ]
                if not odd[root]:
                    continue
                reg = self._region(odd[root])
                if reg is None:
                    region.pop(root, None)
                    active.append(root)
                else:
                    region[root] = reg

        return [(sorted(odd[r]), region[r]) for r in sorted(region) if odd.get(r)]

    def _leftover(self, events: Sequence[int], region: FrozenSet[int]) -> int:
        """Measurement-error pairs needed on top of flipping ``region``."""
        n = Counter(self.node_link[v] for v in events if self.node_std[v])
        cost = 0
        for link, k in n.items():
            a, _, b = self.graph.links[link]
            cost += max(0, k - (a in region) - (b in region)) // 2
        return cost

    def flip_regions(self, clusters) -> List[FrozenSet[int]]:
        """Chosen flip region for each ``(events, smaller side)`` pair."""
        allq = frozenset(self.graph.code_qubits)
        out: List[FrozenSet[int]] = []
        tied = []
        for k, (ev, reg) in enumerate(clusters):
            other = allq - reg
            out.append(reg)
            if len(other) != len(reg):
                continue
            ca, cb = self._leftover(ev, reg), self._leftover(ev, other)
            if cb < ca:
                out[k] = other
            elif ca == cb:
                tied.append(k)
        if tied:
            net = frozenset()
            for k, reg in enumerate(out):
                if k not in tied:
                    net ^= reg
            if len(tied) <= 12:
                best = None
                for pick in itertools.product((0, 1), repeat=len(tied)):
                    cand = net
                    for k, side in zip(tied, pick):
                        cand ^= out[k] if side == 0 else allq - out[k]
                    if best is None or len(cand) < best[0]:
                        best = (len(cand), pick)
                picks = best[1]
            else:
                picks = []
                for k in tied:
                    a, b = net ^ out[k], net ^ (allq - out[k])
                    picks.append(int(len(b) < len(a)))
                    net = b if picks[-1] else a
            for k, side in zip(tied, picks):
                if side:
                    out[k] = allq - out[k]
        return out

    def decode_indices(self, events: Sequence[int], raw_logical: int) -> DecodeResult:
        nodes = self.dgraph.nodes
        found = self.clusters(events)
        clusters = []
        flips = 0
        for (ev, _), reg in zip(found, self.flip_regions(found)):
            clusters.append(Cluster(frozenset(nodes[v] for v in ev), True, reg, len(reg)))
            flips ^= self.readout in reg
        return DecodeResult(tuple(clusters), int(raw_logical), int(raw_logical) ^ int(flips))

    def decode(self, shot: ShotSyndrome) -> DecodeResult:
        index = self.dgraph.detectors.index
        try:
            events = [index[e] for e in shot.events]
        except KeyError as exc:
            raise ValueError(f"event {exc.args[0]} is not a node of the decoding graph") from None
        return self.decode_indices(events, shot.raw_logical)

    def decode_batch(self, event_matrix: np.ndarray, raw_logicals: Sequence[int]) -> List[DecodeResult]:
        return [
            self.decode_indices(np.nonzero(row)[0], raw)
            for row, raw in zip(np.asarray(event_matrix, dtype=bool), raw_logicals)
        ]

    def sizes_and_logicals(self, event_matrix: np.ndarray, raw_logicals: Sequence[int]):
        """Cluster sizes per shot and corrected logicals, without building result objects."""
        sizes: List[List[int]] = []
        out = np.zeros(len(raw_logicals), dtype=np.uint8)
        for k, (row, raw) in enumerate(zip(np.asarray(event_matrix, dtype=bool), raw_logicals)):
            flips = 0
            found = self.clusters(np.nonzero(row)[0])
            s = [len(reg) for _, reg in found]
            for reg in self.flip_regions(found):
                flips ^= self.readout in reg
            sizes.append(s)
            out[k] = int(raw) ^ flips
        return sizes, out


def decode(shot: ShotSyndrome, dgraph: DecodingGraph, basis: Optional[CycleBasisIndex] = None) -> DecodeResult:
    return UnionFindDecoder(dgraph, basis).decode(shot)


def cluster_histogram(results: Sequence[DecodeResult], num_shots: Optional[int] = None) -> Dict[int, float]:
    """Clusters of each size per shot. Size-0 clusters are reported too."""
    return histogram_from_sizes([[c.size for c in r.clusters] for r in results], num_shots)


def histogram_from_sizes(sizes: Sequence[Sequence[int]], num_shots: Optional[int] = None) -> Dict[int, float]:
    n = num_shots if num_shots is not None else len(sizes)
    if n == 0:
        return {}
    counts = Counter(s for shot in sizes for s in shot)
    return {k: counts[k] / n for k in sorted(counts)}


def size_counts(sizes: Sequence[Sequence[int]]) -> Dict[int, int]:
    counts = Counter(s for shot in sizes for s in shot)
    return {k: counts[k] for k in sorted(counts)}


def logical_error_rate(results, encoded: int) -> float:
    """Fraction of shots whose corrected logical differs from ``encoded``.

    Accepts DecodeResult objects or plain corrected-logical values.
    """
    vals = [r.corrected_logical if isinstance(r, DecodeResult) else int(r) for r in results]
    if not vals:
        raise ValueError("no shots")
    return float(np.mean(np.asarray(vals) != int(encoded)))


def write_jsonl(results: Iterable[DecodeResult], path) -> None:
    with open(path, "w") as fh:
        for r in results:
            fh.write(json.dumps(r.to_json(), sort_keys=True) + "\n")
