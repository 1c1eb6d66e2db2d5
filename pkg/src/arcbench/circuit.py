"""ARC memory-experiment circuits.

Circuits are kept in a small intermediate representation: a flat list of
:class:`Op` plus metadata for every classical bit. Each op carries the round
and intra-round layer it belongs to, which the decoding graph uses for time
coordinates.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from .code_graph import (
    Coloring,
    LinkGraph,
    Schedule,
    auto_color,
    auto_schedule,
    validate_coloring,
    validate_schedule,
)

BASES = "xyz"
# substitute basis for the conjugate of a monochromatic link
_OTHER_BASIS = {"x": "z", "z": "x", "y": "x"}
# gates taking a basis Pauli to Z, and back
_TO_Z = {"x": ("H",), "y": ("SDG", "H"), "z": ()}
_FROM_Z = {"x": ("H",), "y": ("H", "S"), "z": ()}

ONE_QUBIT_GATES = ("H", "S", "SDG", "X", "Y", "Z")


@dataclass(frozen=True)
class Op:
    """One circuit instruction acting on one or more qubits in parallel.

    ``CX`` stores flattened ``(control, target)`` pairs in ``qubits``. ``M``
    writes ``bits[i]`` from ``qubits[i]``. ``CP`` applies ``pauli`` to its
    single qubit when classical bit ``bits[0]`` is 1. ``I`` is an idle
    placeholder for delays, ``BARRIER`` has no effect.
    """

    name: str
    qubits: Tuple[int, ...]
    bits: Tuple[int, ...] = ()
    pauli: str = ""
    round: int = 0
    layer: int = 0


@dataclass(frozen=True)
class BitInfo:
    """Where a classical bit came from.

    ``round`` is ``T`` for final readout bits. ``reset`` says whether the
    auxiliary was returned to ``|0>`` after this measurement. A
    ``hold_readout`` bit reads an auxiliary that was left unreset across a
    [[2,0,2]] block, so its value is not deterministic.
    """

    round: int
    kind: str  # standard | conjugate | final
    qubit: int
    link: Optional[int] = None
    reset: bool = True
    hold_readout: bool = False


@dataclass(frozen=True)
class Block202:
    link: int
    start: int
    rounds: int
    neighbors: Tuple[int, ...]
    ff_links: Tuple[Optional[int], Optional[int]]  # chosen neighbour per code qubit of the link
    conj_basis: Tuple[str, str]


@dataclass
class ArcOptions:
    T: int = 2
    basis: str = "xy"
    logical: int = 0
    resets: bool = True
    conditional_reset: bool = False
    run_202: bool = True
    rounds_per_202: int = 9
    links_202: Optional[Sequence[int]] = None
    ff: bool = True
    barriers: bool = True
    delay: Optional[float] = None

    def __post_init__(self):
        self.basis = self.basis.lower()
        if len(self.basis) != 2 or any(b not in BASES for b in self.basis):
            raise ValueError(f"basis must be two characters from 'xyz', got {self.basis!r}")
        self.logical = int(self.logical)
        if self.logical not in (0, 1):
            raise ValueError("logical must be 0 or 1")
        if self.T < 0:
            raise ValueError("T must be non-negative")
        if self.rounds_per_202 < 9:
            raise ValueError("rounds_per_202 must be at least 9")


@dataclass(frozen=True)
class CircuitIR:
    num_qubits: int
    ops: Tuple[Op, ...]
    bits: Tuple[BitInfo, ...]
    graph: LinkGraph
    color: Dict[int, int]
    schedule: Tuple[Tuple[Tuple[int, int], ...], ...]
    basis: str
    logical: int
    T: int
    resets: bool
    ff: bool
    blocks: Tuple[Block202, ...] = ()
    readout_qubit: int = 0
    round_bits: Tuple[Tuple[int, ...], ...] = ()
    final_bits: Dict[int, int] = field(default_factory=dict)

    @property
    def layers_per_round(self) -> int:
        """Entangling layers plus the measurement layer."""
        return len(self.schedule) + 1

    @property
    def num_bits(self) -> int:
        return len(self.bits)

    def code_basis(self, q: int) -> str:
        return self.basis[self.color[q]]

    def to_json(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "basis": self.basis,
            "logical": self.logical,
            "T": self.T,
            "resets": self.resets,
            "ff": self.ff,
            "links": [list(link) for link in self.graph.links],
            "color": {str(q): c for q, c in sorted(self.color.items())},
            "schedule": [[list(p) for p in layer] for layer in self.schedule],
            "readout_qubit": self.readout_qubit,
            "blocks_202": [asdict(b) for b in self.blocks],
            "ops": [
                {k: v for k, v in asdict(op).items() if v not in ((), "")} for op in self.ops
            ],
            "bits": [asdict(b) for b in self.bits],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# ---------------------------------------------------------------------------


def conjugate_bases(a_basis: str, b_basis: str) -> Tuple[str, str]:
    """Conjugate observable of a link measuring ``a_basis (x) b_basis``.

    Reversing the tensor product gives a qubit-wise anticommuting partner
    whenever the two bases differ; for equal bases a fixed other basis is
    used on both qubits instead.
    """
    if a_basis != b_basis:
        return b_basis, a_basis
    other = _OTHER_BASIS[a_basis]
    return other, other


def _plan_blocks(graph: LinkGraph, color: Coloring, opts: ArcOptions) -> List[Block202]:
    if not opts.run_202:
        return []
    links = list(opts.links_202) if opts.links_202 is not None else [
        i for i in range(len(graph.links)) if graph.neighbouring_links(i)
    ]
    for i in links:
        if not 0 <= i < len(graph.links):
            raise ValueError(f"link index {i} out of range")
        if not graph.neighbouring_links(i):
            raise ValueError(f"link {i} has no neighbouring link for feedforward")
    if not links:
        return []
    if not opts.resets:
        warnings.warn("[[2,0,2]] sequences need resets; run_202 disabled", stacklevel=3)
        return []
    need = opts.rounds_per_202 * len(links)
    if opts.T < need:
        warnings.warn(
            f"T={opts.T} is too small for [[2,0,2]] on {len(links)} links "
            f"(needs {need}); run_202 disabled",
            stacklevel=3,
        )
        return []
    blocks = []
    basis = opts.basis
    for k, link in enumerate(links):
        a, b = graph.endpoints(link)
        ff = []
        for q in (a, b):
            nbs = [i for i in graph.incident[q] if i != link]
            ff.append(min(nbs) if nbs else None)
        conj = conjugate_bases(basis[color[a]], basis[color[b]])
        blocks.append(
            Block202(
                link=link,
                start=k * opts.rounds_per_202,
                rounds=opts.rounds_per_202,
                neighbors=graph.neighbouring_links(link),
                ff_links=(ff[0], ff[1]),
                conj_basis=conj,
            )
        )
    return blocks


class _Builder:
    def __init__(self, graph, color, schedule, opts: ArcOptions, basis: str):
        self.graph = graph
        self.color = color
        self.schedule = schedule
        self.opts = opts
        self.basis = basis
        self.ops: List[Op] = []
        self.bits: List[BitInfo] = []
        self.round_bits: List[Tuple[int, ...]] = []

    def qb(self, q: int) -> str:
        return self.basis[self.color[q]]

    def emit(self, name, qubits, round_, layer, bits=(), pauli=""):
        qubits = tuple(qubits)
        if qubits or name == "BARRIER":
            self.ops.append(Op(name, qubits, tuple(bits), pauli, round_, layer))

    def rotate(self, table, bases: Dict[int, str], round_, layer):
        """Emit basis-change gates for ``{qubit: basis}`` as parallel layers."""
        depth = max((len(table[b]) for b in bases.values()), default=0)
        for step in range(depth):
            by_gate: Dict[str, List[int]] = {}
            for q, b in sorted(bases.items()):
                seq = table[b]
                # right-align so that e.g. SDG precedes the shared H
                k = step - (depth - len(seq))
                if k >= 0:
                    by_gate.setdefault(seq[k], []).append(q)
            for gate in sorted(by_gate):
                self.emit(gate, by_gate[gate], round_, layer)

    def prepare(self):
        code = self.graph.code_qubits
        if self.opts.logical:
            self.emit("X", code, -1, 0)
        self.rotate(_FROM_Z, {q: self.qb(q) for q in code}, -1, 0)
        if self.opts.barriers:
            self.emit("BARRIER", (), -1, 0)

    def syndrome_round(self, r: int, blocks: List[Block202]):
        graph, opts = self.graph, self.opts
        measured = set(range(len(graph.links)))
        conj_links: Dict[int, Tuple[str, str]] = {}
        hold_links = set()
        readout_links = set()
        ff_ops = []
        for blk in blocks:
            offset = r - blk.start
            if not 0 <= offset < blk.rounds:
                continue
            last = blk.rounds - 1
            if offset == 0:
                hold_links.update(blk.neighbors)
            elif offset < last:
                measured -= set(blk.neighbors)
                if (offset - 1) % 2 == 0:
                    conj_links[blk.link] = blk.conj_basis
            else:
                readout_links.update(blk.neighbors)
                ff_ops.append(blk)

        def link_bases(i):
            a, b = graph.endpoints(i)
            if i in conj_links:
                return dict(zip((a, b), conj_links[i]))
            return {a: self.qb(a), b: self.qb(b)}

        for j, layer in enumerate(self.schedule):
            pairs = [(q, aux) for q, aux in layer if graph.aux_to_link[aux] in measured]
            bases = {q: link_bases(graph.aux_to_link[aux])[q] for q, aux in pairs}
            self.rotate(_TO_Z, bases, r, j)
            self.emit("CX", [x for pair in pairs for x in pair], r, j)
            self.rotate(_FROM_Z, bases, r, j)

        mlayer = len(self.schedule)
        order = sorted(measured, key=lambda i: graph.links[i][1])
        bit_of: Dict[int, int] = {}
        for i in order:
            bit_of[i] = len(self.bits)
            reset = opts.resets and i not in hold_links
            self.bits.append(
                BitInfo(
                    round=r,
                    kind="conjugate" if i in conj_links else "standard",
                    qubit=graph.links[i][1],
                    link=i,
                    reset=reset,
                    hold_readout=i in readout_links,
                )
            )
        auxes = [graph.links[i][1] for i in order]
        self.emit("M", auxes, r, mlayer, bits=[bit_of[i] for i in order])
        self.round_bits.append(tuple(bit_of[i] for i in order))

        to_reset = [i for i in order if self.bits[bit_of[i]].reset]
        if opts.conditional_reset:
            for i in to_reset:
                self.emit("CP", [graph.links[i][1]], r, mlayer, bits=[bit_of[i]], pauli="X")
        else:
            self.emit("R", [graph.links[i][1] for i in to_reset], r, mlayer)

        if opts.ff:
            for blk in ff_ops:
                a, b = graph.endpoints(blk.link)
                chosen = [blk.ff_links[0], blk.ff_links[1]]
                if chosen[0] is None:
                    chosen[0] = chosen[1]
                if chosen[1] is None:
                    chosen[1] = chosen[0]
                for q, nb, pauli in zip((a, b), chosen, blk.conj_basis):
                    self.emit("CP", [q], r, mlayer, bits=[bit_of[nb]], pauli=pauli.upper())

        if opts.delay:
            used = sorted(set(graph.code_qubits) | set(graph.aux_qubits))
            self.emit("I", used, r, mlayer)
        if opts.barriers:
            self.emit("BARRIER", (), r, mlayer)

    def final_readout(self, T: int) -> Dict[int, int]:
        code = self.graph.code_qubits
        self.rotate(_TO_Z, {q: self.qb(q) for q in code}, T, 0)
        final_bits = {}
        for q in code:
            final_bits[q] = len(self.bits)
            self.bits.append(BitInfo(round=T, kind="final", qubit=q))
        self.emit("M", code, T, 0, bits=[final_bits[q] for q in code])
        return final_bits


def build_arc(
    graph: LinkGraph,
    color: Optional[Coloring] = None,
    schedule: Optional[Schedule] = None,
    options: Optional[ArcOptions] = None,
    max_dist: int = 2,
) -> Dict[str, CircuitIR]:
    """Build the circuits for ``options.basis`` and its reverse.

    Returns ``{basis: circuit, basis[::-1]: circuit}`` (one entry when the
    two characters are equal).
    """
    opts = options or ArcOptions()
    color = validate_coloring(graph, color) if color is not None else auto_color(graph, max_dist)
    schedule = validate_schedule(graph, schedule if schedule is not None else auto_schedule(graph))
    blocks = _plan_blocks(graph, color, opts)

    out = {}
    for basis in (opts.basis, opts.basis[::-1]):
        if basis in out:
            continue
        # conjugate bases depend on the encoding basis of this variant
        var_blocks = [
            replace(
                b,
                conj_basis=conjugate_bases(
                    basis[color[graph.endpoints(b.link)[0]]], basis[color[graph.endpoints(b.link)[1]]]
                ),
            )
            for b in blocks
        ]
        bld = _Builder(graph, color, schedule, opts, basis)
        bld.prepare()
        for r in range(opts.T):
            bld.syndrome_round(r, var_blocks)
        final_bits = bld.final_readout(opts.T)
        out[basis] = CircuitIR(
            num_qubits=graph.num_qubits,
            ops=tuple(bld.ops),
            bits=tuple(bld.bits),
            graph=graph,
            color=dict(color),
            schedule=tuple(tuple(layer) for layer in schedule),
            basis=basis,
            logical=opts.logical,
            T=opts.T,
            resets=opts.resets,
            ff=opts.ff,
            blocks=tuple(var_blocks),
            readout_qubit=graph.code_qubits[0],
            round_bits=tuple(bld.round_bits),
            final_bits=final_bits,
        )
    return out


# ---------------------------------------------------------------------------
# output strings


def readout_layout(circuit: CircuitIR) -> List[Tuple[int, ...]]:
    """Bit ids of each space-separated group of an output string.

    Groups run left to right: final code-qubit readout, then rounds T-1 down
    to 0. Within a group bits are ordered by descending qubit id.
    """
    groups = []
    final = sorted(circuit.final_bits.items(), reverse=True)
    groups.append(tuple(b for _, b in final))
    for r in range(circuit.T - 1, -1, -1):
        rb = sorted(circuit.round_bits[r], key=lambda b: circuit.bits[b].qubit, reverse=True)
        groups.append(tuple(rb))
    return groups


def layout_pattern(circuit: CircuitIR) -> str:
    """E.g. ``'bb b'`` for one link and one round."""
    return " ".join("b" * len(g) for g in readout_layout(circuit))


def bits_to_string(circuit: CircuitIR, bits: Sequence[int]) -> str:
    return " ".join("".join("1" if bits[b] else "0" for b in g) for g in readout_layout(circuit))


def string_to_bits(circuit: CircuitIR, string: str) -> List[int]:
    groups = readout_layout(circuit)
    parts = string.split()
    if len(parts) != len(groups) or any(len(p) != len(g) for p, g in zip(parts, groups)):
        raise ValueError(
            f"output string {string!r} does not match layout {layout_pattern(circuit)!r}"
        )
    bits = [0] * circuit.num_bits
    for part, group in zip(parts, groups):
        for ch, b in zip(part, group):
            if ch not in "01":
                raise ValueError(f"bad character {ch!r} in output string")
            bits[b] = int(ch)
    return bits
