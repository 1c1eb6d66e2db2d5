"""Error-sensitive events from measurement records.

Every event is a parity of classical bits (a "detector"). The detectors are
derived from the bit metadata of a circuit:

* with resets each auxiliary outcome is the syndrome itself; without resets
  the syndrome is the XOR of consecutive outcomes, which makes events compare
  round ``r`` with round ``r - 2``;
* conjugate outcomes inside a [[2,0,2]] block are compared only with the
  previous conjugate outcome on the same link;
* an auxiliary held over a [[2,0,2]] block gives no event when read; the next
  standard outcome on that link is compared with the one before the block
  (with feedforward) or with the post-block value (without).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .circuit import CircuitIR, string_to_bits


@dataclass(frozen=True, order=True)
class DetectionEvent:
    time: int
    link: int
    is_conjugate: bool = False
    is_final: bool = False

    def label(self) -> str:
        tag = "c" if self.is_conjugate else ("f" if self.is_final else "s")
        return f"{tag}{self.time}:L{self.link}"


@dataclass(frozen=True)
class ShotSyndrome:
    events: FrozenSet[DetectionEvent]
    raw_logical: int


class DetectorSet:
    """Detectors of one circuit, in a fixed order (node index = position)."""

    def __init__(self, circuit: CircuitIR, events: Sequence[DetectionEvent], bits: Sequence[FrozenSet[int]]):
        self.circuit = circuit
        self.events: Tuple[DetectionEvent, ...] = tuple(events)
        self.bits: Tuple[Tuple[int, ...], ...] = tuple(tuple(sorted(b)) for b in bits)
        self.index: Dict[DetectionEvent, int] = {e: i for i, e in enumerate(self.events)}
        # noiseless records have zero parity on every detector by construction;
        # this is checked against the reference sample in the test-suite
        self.readout_bit = circuit.final_bits[circuit.readout_qubit]

    def __len__(self):
        return len(self.events)

    def evaluate(self, records: np.ndarray) -> np.ndarray:
        """Detector parities, shape ``(shots, len(self))`` for ``(shots, num_bits)`` input."""
        records = np.asarray(records, dtype=bool)
        if records.ndim == 1:
            records = records[None, :]
        out = np.zeros((records.shape[0], len(self.events)), dtype=bool)
        for k, bits in enumerate(self.bits):
            col = out[:, k]
            for b in bits:
                col ^= records[:, b]
        return out

    def raw_logicals(self, records: np.ndarray) -> np.ndarray:
        records = np.asarray(records)
        if records.ndim == 1:
            records = records[None, :]
        return records[:, self.readout_bit].astype(np.uint8)

    def shot(self, record: Sequence[int]) -> ShotSyndrome:
        row = np.asarray(record, dtype=bool)
        hits = self.evaluate(row)[0]
        return ShotSyndrome(
            frozenset(self.events[k] for k in np.nonzero(hits)[0]),
            int(row[self.readout_bit]),
        )


def build_detectors(circuit: CircuitIR) -> DetectorSet:
    graph = circuit.graph
    per_link: Dict[int, List[int]] = {i: [] for i in range(len(graph.links))}
    for b, info in enumerate(circuit.bits):
        if info.link is not None:
            per_link[info.link].append(b)

    events: List[DetectionEvent] = []
    det_bits: List[FrozenSet[int]] = []
    for link, bits in per_link.items():
        aux: FrozenSet[int] = frozenset()
        prev_std: FrozenSet[int] = frozenset()
        prev_conj: Optional[FrozenSet[int]] = None
        for b in bits:
            info = circuit.bits[b]
            syndrome = frozenset({b}) ^ aux
            if info.kind == "conjugate":
                if prev_conj is not None:
                    events.append(DetectionEvent(info.round, link, is_conjugate=True))
                    det_bits.append(syndrome ^ prev_conj)
                prev_conj = syndrome
            elif info.hold_readout:
                if not circuit.ff:
                    prev_std = syndrome
            else:
                events.append(DetectionEvent(info.round, link))
                det_bits.append(syndrome ^ prev_std)
                prev_std = syndrome
            aux = frozenset() if info.reset else frozenset({b})
        a, c = graph.endpoints(link)
        final = frozenset({circuit.final_bits[a], circuit.final_bits[c]})
        events.append(DetectionEvent(circuit.T, link, is_final=True))
        det_bits.append(final ^ prev_std)

    order = sorted(range(len(events)), key=lambda k: events[k])
    return DetectorSet(circuit, [events[k] for k in order], [det_bits[k] for k in order])


def extract(string: str, circuit: CircuitIR, detectors: Optional[DetectorSet] = None) -> ShotSyndrome:
    """Events and raw logical value of one output string."""
    detectors = detectors or build_detectors(circuit)
    return detectors.shot(string_to_bits(circuit, string))


def extract_counts(counts: Dict[str, int], circuit: CircuitIR, detectors: Optional[DetectorSet] = None):
    """Expand a counts dictionary into ``(events matrix, raw logicals)`` with one row per shot."""
    detectors = detectors or build_detectors(circuit)
    rows = []
    for string in sorted(counts):
        bits = string_to_bits(circuit, string)
        rows.extend([bits] * counts[string])
    records = np.asarray(rows, dtype=np.uint8).reshape(-1, circuit.num_bits)
    return detectors.evaluate(records), detectors.raw_logicals(records)


def events_of_row(detectors: DetectorSet, row: np.ndarray) -> FrozenSet[DetectionEvent]:
    return frozenset(detectors.events[k] for k in np.nonzero(row)[0])
