"""Noisy Clifford simulation of :class:`~arcbench.circuit.CircuitIR`.

Two engines share one noise-realisation format:

* :class:`TableauSimulator` -- exact stabilizer tableau with phases. Used for
  the noiseless reference sample and as a slow per-shot path.
* Pauli frames -- every shot is the reference sample XOR the measurement
  flips produced by propagating that shot's Pauli errors. Vectorised across
  shots with numpy, and also used to propagate injected single faults.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .circuit import ONE_QUBIT_GATES, CircuitIR, bits_to_string

BATCH_SIZE = 4096

# two-qubit Pauli codes 1..15 -> (x0, z0, x1, z1); code = 4 * p0 + p1 with
# single-qubit codes I=0, X=1, Y=2, Z=3
_P1_X = np.array([0, 1, 1, 0], dtype=bool)
_P1_Z = np.array([0, 0, 1, 1], dtype=bool)
PAULI_CODE = {"I": 0, "X": 1, "Y": 2, "Z": 3}


@dataclass(frozen=True)
class NoiseModel:
    """Independent Pauli channels attached to circuit instructions."""

    p1: float = 0.0
    p2: float = 0.0
    p_meas: float = 0.0
    idle: float = 0.0
    idle_qubits: Tuple[Tuple[int, float], ...] = ()  # per-qubit idle overrides

    def __post_init__(self):
        items = self.idle_qubits.items() if isinstance(self.idle_qubits, dict) else self.idle_qubits
        object.__setattr__(self, "idle_qubits", tuple(sorted((int(q), float(v)) for q, v in items)))
        for name in ("p1", "p2", "p_meas", "idle"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} is not a probability")
        for q, v in self.idle_qubits:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"idle probability {v} for qubit {q} is not a probability")

    @classmethod
    def uniform(cls, p: float, idle: float = 0.0, convention: str = "total") -> "NoiseModel":
        """Every channel at strength ``p``.

        With ``convention='total'`` ``p`` is the total probability of a
        non-identity Pauli. With ``'mixing'`` it is the probability that the
        state is replaced by the maximally mixed one, so the Pauli totals are
        3p/4 (one qubit) and 15p/16 (two qubits); each qubit then sees bit
        and phase flips at p/2. Measurement flips use ``p`` either way.
        """
        if convention == "total":
            return cls(p1=p, p2=p, p_meas=p, idle=idle)
        if convention == "mixing":
            return cls(p1=0.75 * p, p2=15 * p / 16, p_meas=p, idle=0.75 * idle)
        raise ValueError(f"unknown depolarizing convention {convention!r}")

    @property
    def is_noiseless(self) -> bool:
        return self.p1 == self.p2 == self.p_meas == self.idle == 0.0 and all(v == 0.0 for _, v in self.idle_qubits)


@dataclass(frozen=True)
class Fault:
    """A single deterministic fault.

    ``kind='pauli'`` applies ``pauli`` to ``qubit`` right after op
    ``op_index`` (right before it if the op measures ``qubit``); op index -1
    means the start of the circuit. ``kind='assignment'``
    flips the recorded value of classical bit ``bit`` without touching the
    qubit.
    """

    op_index: int = -1
    qubit: int = -1
    pauli: str = "X"
    kind: str = "pauli"
    bit: int = -1


# ---------------------------------------------------------------------------
# stabilizer tableau


class TableauSimulator:
    """Aaronson-Gottesman tableau (destabilizers rows 0..n-1, stabilizers n..2n-1)."""

    def __init__(self, n: int, rng: Optional[np.random.Generator] = None):
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=bool)
        self.z = np.zeros((2 * n, n), dtype=bool)
        self.r = np.zeros(2 * n, dtype=bool)
        self.x[np.arange(n), np.arange(n)] = True
        self.z[np.arange(n) + n, np.arange(n)] = True
        self.rng = rng or np.random.default_rng()

    # gates -----------------------------------------------------------------
    def h(self, a):
        x, z = self.x[:, a].copy(), self.z[:, a].copy()
        self.r ^= x & z
        self.x[:, a], self.z[:, a] = z, x

    def s(self, a):
        x = self.x[:, a]
        self.r ^= x & self.z[:, a]
        self.z[:, a] ^= x

    def sdg(self, a):
        x = self.x[:, a]
        self.r ^= x & ~self.z[:, a]
        self.z[:, a] ^= x

    def pauli(self, a, p: str):
        if p in ("X", "Y"):
            self.r ^= self.z[:, a]
        if p in ("Z", "Y"):
            self.r ^= self.x[:, a]

    def cx(self, a, b):
        xa, za, xb, zb = self.x[:, a], self.z[:, a], self.x[:, b], self.z[:, b]
        self.r ^= xa & zb & ~(xb ^ za)
        self.x[:, b] ^= xa
        self.z[:, a] ^= zb

    # measurement -------------------------------------------------------------
    @staticmethod
    def _g_sum(x1, z1, x2, z2) -> np.ndarray:
        """Sum over columns of the AG phase exponent g, vectorised over rows."""
        x1 = x1.astype(np.int8)
        z1 = z1.astype(np.int8)
        x2 = x2.astype(np.int8)
        z2 = z2.astype(np.int8)
        g = np.where(
            (x1 == 1) & (z1 == 1),
            z2 - x2,
            np.where((x1 == 1) & (z1 == 0), z2 * (2 * x2 - 1), np.where((x1 == 0) & (z1 == 1), x2 * (1 - 2 * z2), 0)),
        )
        return g.sum(axis=-1)

    def _rowsum(self, h: np.ndarray, i: int):
        """Rows ``h`` <- rows ``h`` * row ``i``."""
        if len(h) == 0:
            return
        total = (
            2 * self.r[h].astype(np.int64)
            + 2 * int(self.r[i])
            + self._g_sum(self.x[i][None, :], self.z[i][None, :], self.x[h], self.z[h])
        )
        self.r[h] = (total % 4) == 2
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def peek_deterministic(self, a) -> bool:
        return not self.x[self.n :, a].any()

    def measure(self, a, forced: Optional[int] = None) -> int:
        n = self.n
        stab_x = self.x[n:, a]
        if stab_x.any():
            p = n + int(np.argmax(stab_x))
            rows = np.nonzero(self.x[:, a])[0]
            rows = rows[rows != p]
            self._rowsum(rows, p)
            self.x[p - n], self.z[p - n], self.r[p - n] = self.x[p], self.z[p], self.r[p]
            self.x[p] = False
            self.z[p] = False
            self.z[p, a] = True
            outcome = int(self.rng.integers(2)) if forced is None else int(forced)
            self.r[p] = bool(outcome)
            return outcome
        # deterministic: accumulate stabilizers selected by the destabilizers
        sx = np.zeros(n, dtype=bool)
        sz = np.zeros(n, dtype=bool)
        phase = 0
        for i in np.nonzero(self.x[:n, a])[0]:
            j = i + n
            phase += 2 * int(self.r[j]) + int(self._g_sum(self.x[j], self.z[j], sx, sz))
            sx ^= self.x[j]
            sz ^= self.z[j]
        return int((phase % 4) == 2)

    def reset(self, a):
        if self.measure(a):
            self.pauli(a, "X")


def _pauli_letter(code: int) -> str:
    return "IXYZ"[code]


# ---------------------------------------------------------------------------
# noise realisations


@dataclass
class NoiseHits:
    """Sparse noise realisation for one op: Pauli codes per (target slot, shot).

    For two-qubit ops ``slot`` indexes the pair and ``code`` is 1..15.
    """

    slot: np.ndarray
    shot: np.ndarray
    code: np.ndarray


def _op_channel(op, noise: NoiseModel) -> Tuple[str, float]:
    if op.name in ONE_QUBIT_GATES or op.name == "CP":
        return "dep1", noise.p1
    if op.name == "CX":
        return "dep2", noise.p2
    if op.name == "M":
        return "flip", noise.p_meas
    if op.name == "I":
        return "dep1", noise.idle
    return "", 0.0


def sample_noise(circuit: CircuitIR, noise: NoiseModel, shots: int, rng: np.random.Generator) -> List[Optional[NoiseHits]]:
    out: List[Optional[NoiseHits]] = []
    overrides = dict(noise.idle_qubits)
    for op in circuit.ops:
        kind, p = _op_channel(op, noise)
        if op.name == "I" and overrides:
            p = np.array([overrides.get(q, noise.idle) for q in op.qubits])[:, None]
        if np.all(p <= 0.0):
            out.append(None)
            continue
        slots = len(op.qubits) // 2 if kind == "dep2" else len(op.qubits)
        hit = rng.random((slots, shots)) < p
        slot, shot = np.nonzero(hit)
        if kind == "dep1":
            code = rng.integers(1, 4, size=len(slot), dtype=np.int8)
        elif kind == "dep2":
            code = rng.integers(1, 16, size=len(slot), dtype=np.int8)
        else:
            code = np.ones(len(slot), dtype=np.int8)
        out.append(NoiseHits(slot, shot, code))
    return out


# ---------------------------------------------------------------------------
# reference sample and per-shot tableau runs


def _run_tableau(circuit: CircuitIR, rng: np.random.Generator, hits_for_shot=None) -> np.ndarray:
    """One full tableau run. ``hits_for_shot[i]`` lists ``(slot, code)`` for op i."""
    sim = TableauSimulator(circuit.num_qubits, rng)
    bits = np.zeros(circuit.num_bits, dtype=np.uint8)
    for i, op in enumerate(circuit.ops):
        hits = hits_for_shot[i] if hits_for_shot is not None else ()
        name = op.name
        if name == "M":
            for slot, code in hits:
                sim.pauli(op.qubits[slot], "X")
            for q, b in zip(op.qubits, op.bits):
                bits[b] = sim.measure(q)
            continue
        if name == "H":
            for q in op.qubits:
                sim.h(q)
        elif name == "S":
            for q in op.qubits:
                sim.s(q)
        elif name == "SDG":
            for q in op.qubits:
                sim.sdg(q)
        elif name in ("X", "Y", "Z"):
            for q in op.qubits:
                sim.pauli(q, name)
        elif name == "CX":
            for k in range(0, len(op.qubits), 2):
                sim.cx(op.qubits[k], op.qubits[k + 1])
        elif name == "R":
            for q in op.qubits:
                sim.reset(q)
        elif name == "CP":
            if bits[op.bits[0]]:
                sim.pauli(op.qubits[0], op.pauli)
        if not hits:
            continue
        if name == "CX":
            for slot, code in hits:
                sim.pauli(op.qubits[2 * slot], _pauli_letter(code // 4))
                sim.pauli(op.qubits[2 * slot + 1], _pauli_letter(code % 4))
        else:
            for slot, code in hits:
                sim.pauli(op.qubits[slot], _pauli_letter(code))
    return bits


def reference_sample(circuit: CircuitIR, seed: int = 0) -> np.ndarray:
    """Noiseless measurement record; random outcomes drawn from ``seed``."""
    return _run_tableau(circuit, np.random.default_rng(seed))


# ---------------------------------------------------------------------------
# Pauli frames


def _apply_pauli_rows(x, z, qubits, cols, codes):
    """XOR single-qubit Pauli codes into frame entries ``(qubits[k], cols[k])``."""
    xs = _P1_X[codes]
    zs = _P1_Z[codes]
    x[qubits[xs], cols[xs]] ^= True
    z[qubits[zs], cols[zs]] ^= True


def _run_frames(
    circuit: CircuitIR,
    num_cols: int,
    hits: Optional[List[Optional[NoiseHits]]] = None,
    rng: Optional[np.random.Generator] = None,
    injections: Optional[Dict[Tuple[int, bool], List[Tuple[int, int, int]]]] = None,
    flips: Optional[Dict[int, np.ndarray]] = None,
) -> np.ndarray:
    """Propagate Pauli frames; returns measurement flips ``(num_bits, num_cols)``.

    ``rng`` randomises the Z part of frames after measurements and resets
    (needed to sample non-deterministic outcomes). Without it those parts
    are cleared, which is the canonical choice for single-fault deltas.
    ``injections[(op_index, before)]`` holds ``(qubit, column, pauli code)``.
    ``flips[bit]`` lists columns whose recorded ``bit`` is inverted.
    """
    n = circuit.num_qubits
    x = np.zeros((n, num_cols), dtype=bool)
    z = np.zeros((n, num_cols), dtype=bool)
    rec = np.zeros((circuit.num_bits, num_cols), dtype=bool)
    injections = injections or {}
    flips = flips or {}

    def inject(key):
        items = injections.get(key)
        if items:
            arr = np.asarray(items, dtype=np.int64)
            _apply_pauli_rows(x, z, arr[:, 0], arr[:, 1], arr[:, 2])

    for i, op in enumerate(circuit.ops):
        name = op.name
        q = np.asarray(op.qubits, dtype=np.int64)
        h = hits[i] if hits is not None else None
        inject((i, True))
        if name == "H":
            x[q], z[q] = z[q], x[q].copy()
        elif name in ("S", "SDG"):
            z[q] ^= x[q]
        elif name == "CX":
            c, t = q[0::2], q[1::2]
            x[t] ^= x[c]
            z[c] ^= z[t]
        elif name == "M":
            if h is not None and len(h.slot):
                x[q[h.slot], h.shot] ^= True
            b = np.asarray(op.bits, dtype=np.int64)
            rec[b] = x[q]
            for bit in op.bits:
                if bit in flips:
                    rec[bit, flips[bit]] ^= True
            if rng is not None:
                z[q] ^= rng.random((len(q), num_cols)) < 0.5
            else:
                z[q] = False
        elif name == "R":
            x[q] = False
            if rng is not None:
                z[q] = rng.random((len(q), num_cols)) < 0.5
            else:
                z[q] = False
        elif name == "CP":
            cond = rec[op.bits[0]]
            code = PAULI_CODE[op.pauli]
            if _P1_X[code]:
                x[q[0]] ^= cond
            if _P1_Z[code]:
                z[q[0]] ^= cond
        if h is not None and name != "M" and len(h.slot):
            if name == "CX":
                codes = h.code.astype(np.int64)
                _apply_pauli_rows(x, z, q[2 * h.slot], h.shot, codes // 4)
                _apply_pauli_rows(x, z, q[2 * h.slot + 1], h.shot, codes % 4)
            else:
                _apply_pauli_rows(x, z, q[h.slot], h.shot, h.code.astype(np.int64))
        inject((i, False))
    return rec


def _batch_seeds(seed: int, shots: int, batch_size: int):
    n_batches = max(1, -(-shots // batch_size))
    children = np.random.SeedSequence(seed).spawn(n_batches + 1)
    sizes = [min(batch_size, shots - k * batch_size) for k in range(n_batches)]
    return children[0], list(zip(children[1:], sizes))


def _frame_batch(circuit, noise, size, child, ref):
    rng = np.random.default_rng(child)
    hits = sample_noise(circuit, noise, size, rng)
    rec = _run_frames(circuit, size, hits=hits, rng=rng)
    return (rec.T ^ ref.astype(bool)).astype(np.uint8)


def _tableau_batch(circuit, noise, size, child, ref):
    rng = np.random.default_rng(child)
    hits = sample_noise(circuit, noise, size, rng)
    per_shot: List[List[List[Tuple[int, int]]]] = [[[] for _ in circuit.ops] for _ in range(size)]
    for i, h in enumerate(hits):
        if h is None:
            continue
        for slot, shot, code in zip(h.slot, h.shot, h.code):
            per_shot[shot][i].append((int(slot), int(code)))
    out = np.zeros((size, circuit.num_bits), dtype=np.uint8)
    for s in range(size):
        out[s] = _run_tableau(circuit, rng, per_shot[s])
    return out


def sample_bits(
    circuit: CircuitIR,
    noise: NoiseModel,
    shots: int,
    seed: int = 0,
    method: str = "frame",
    batch_size: int = BATCH_SIZE,
    workers: int = 1,
) -> np.ndarray:
    """Measurement records, shape ``(shots, num_bits)``.

    Shots are split into fixed-size batches, each with its own seed spawned
    from ``seed``; results do not depend on ``workers``. Both methods draw
    the same noise realisation for a batch, so they agree exactly on
    circuits without random measurement outcomes.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    ref_seed, batches = _batch_seeds(seed, shots, batch_size)
    ref = _run_tableau(circuit, np.random.default_rng(ref_seed))
    if method == "frame":
        fn = _frame_batch
    elif method == "tableau":
        fn = _tableau_batch
    else:
        raise ValueError(f"unknown method {method!r}")
    if workers > 1 and len(batches) > 1:
        from joblib import Parallel, delayed

        parts = Parallel(n_jobs=workers)(
            delayed(fn)(circuit, noise, size, child, ref) for child, size in batches
        )
    else:
        parts = [fn(circuit, noise, size, child, ref) for child, size in batches]
    return np.concatenate(parts, axis=0)


@dataclass
class CountsRecord:
    counts: Dict[str, int]
    shots: int
    seed: int
    noise: NoiseModel = field(default_factory=NoiseModel)
    circuit_id: str = ""

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not add up to shots")

    def to_json(self) -> dict:
        return {
            "counts": dict(sorted(self.counts.items())),
            "shots": self.shots,
            "seed": self.seed,
            "noise": asdict(self.noise),
            "circuit_id": self.circuit_id,
        }

    @classmethod
    def from_json(cls, data: dict) -> "CountsRecord":
        counts = {str(k): int(v) for k, v in data["counts"].items()}
        return cls(
            counts=counts,
            shots=int(data.get("shots", sum(counts.values()))),
            seed=int(data.get("seed", -1)),
            noise=NoiseModel(**data.get("noise", {})),
            circuit_id=str(data.get("circuit_id", "")),
        )


def circuit_id(circuit: CircuitIR) -> str:
    return hashlib.sha256(circuit.dumps().encode()).hexdigest()[:16]


def counts_from_bits(circuit: CircuitIR, bits: np.ndarray) -> Dict[str, int]:
    rows = Counter(bytes(row) for row in np.ascontiguousarray(bits, dtype=np.uint8))
    return {bits_to_string(circuit, np.frombuffer(k, dtype=np.uint8)): v for k, v in rows.items()}


def simulate(
    circuit: CircuitIR,
    noise: NoiseModel,
    shots: int,
    seed: int = 0,
    method: str = "frame",
    workers: int = 1,
) -> CountsRecord:
    bits = sample_bits(circuit, noise, shots, seed, method=method, workers=workers)
    return CountsRecord(counts_from_bits(circuit, bits), shots, seed, noise, circuit_id(circuit))


# ---------------------------------------------------------------------------
# single faults


def fault_locations(circuit: CircuitIR) -> List[Tuple[int, int, bool]]:
    """Every ``(op_index, qubit, before)`` slot where a Pauli can be inserted."""
    locs = []
    for i, op in enumerate(circuit.ops):
        if op.name == "BARRIER":
            continue
        before = op.name == "M"
        seen = set()
        for q in op.qubits:
            if q not in seen:
                seen.add(q)
                locs.append((i, q, before))
    return locs


def propagate_faults(circuit: CircuitIR, faults: Sequence[Fault]) -> np.ndarray:
    """Measurement flips for each fault, shape ``(len(faults), num_bits)``."""
    injections: Dict[Tuple[int, bool], List[Tuple[int, int, int]]] = {}
    flips: Dict[int, List[int]] = {}
    for col, f in enumerate(faults):
        if f.kind == "assignment":
            flips.setdefault(f.bit, []).append(col)
            continue
        if not 0 <= f.qubit < circuit.num_qubits:
            raise ValueError(f"no qubit {f.qubit}")
        if f.op_index < 0:
            key = (0, True)
        else:
            op = circuit.ops[f.op_index]
            key = (f.op_index, op.name == "M" and f.qubit in op.qubits)
        injections.setdefault(key, []).append((f.qubit, col, PAULI_CODE[f.pauli]))
    rec = _run_frames(
        circuit,
        len(faults),
        injections=injections,
        flips={b: np.asarray(c) for b, c in flips.items()},
    )
    return rec.T


def simulate_with_fault(circuit: CircuitIR, fault: Optional[Fault] = None) -> frozenset:
    """Classical bits whose value changes when ``fault`` is inserted."""
    if fault is None:
        return frozenset()
    if fault.kind == "pauli" and not -1 <= fault.op_index < len(circuit.ops):
        raise ValueError(f"no op with index {fault.op_index}")
    row = propagate_faults(circuit, [fault])[0]
    return frozenset(int(b) for b in np.nonzero(row)[0])
