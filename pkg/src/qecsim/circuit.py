"""Depth-layered gate schedules and their compilation to interpreter tapes.

Depth is the noise clock: every layer is followed by one depolarizing step on
every qubit of the register, including idle ones and layers that only hold
measurements or resets.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

from . import engine
from .statevector import KIND_H, KIND_MATRIX, KIND_X, KIND_Y, KIND_Z, StateVector

# ---------------------------------------------------------------------------
# angle parameterization
# ---------------------------------------------------------------------------

_NAMED = {
    "H": np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    "S": np.array([[1, 0], [0, 1j]], dtype=np.complex128),
    "Sdg": np.array([[1, 0], [0, -1j]], dtype=np.complex128),
}
_FAST = {"H": KIND_H, "X": KIND_X, "Y": KIND_Y, "Z": KIND_Z}
_INVERSE = {"H": "H", "X": "X", "Y": "Y", "Z": "Z", "S": "Sdg", "Sdg": "S"}


def euler_angles(u) -> tuple[float, float, float, float]:
    """Angles (alpha, beta, gamma, delta) with u = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta)."""
    u = np.asarray(u, dtype=np.complex128)
    alpha = 0.5 * np.angle(np.linalg.det(u))
    v = u * np.exp(-1j * alpha)
    gamma = 2.0 * np.arctan2(abs(v[1, 0]), abs(v[0, 0]))
    if abs(v[0, 0]) > 1e-12 and abs(v[1, 0]) > 1e-12:
        plus = 2.0 * np.angle(v[1, 1])
        minus = 2.0 * np.angle(v[1, 0])
    elif abs(v[0, 0]) > 1e-12:
        plus, minus = 2.0 * np.angle(v[1, 1]), 0.0
    else:
        plus, minus = 0.0, 2.0 * np.angle(v[1, 0])
    beta = 0.5 * (plus + minus)
    delta = 0.5 * (plus - minus)
    # det fixes alpha only modulo pi; absorb a residual sign into alpha
    rebuilt = engine.unitary_from_angles(alpha, beta, gamma, delta)
    if np.allclose(rebuilt, -u, atol=1e-9):
        alpha += np.pi
    return float(alpha), float(beta), float(gamma), float(delta)


CANONICAL_ANGLES = {name: euler_angles(m) for name, m in _NAMED.items()}


@dataclass(frozen=True)
class GateSpec:
    """A named or parameterized 2x2 gate with 0, 1 or 2 controls.

    ``qubits`` lists the controls first and the target last.
    """

    kind: str
    qubits: tuple[int, ...]
    angles: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if self.kind not in _NAMED and self.kind != "R":
            raise ValueError(f"unknown gate kind {self.kind!r}")
        qubits = tuple(int(q) for q in self.qubits)
        if not 1 <= len(qubits) <= 3:
            raise ValueError("a gate has a target and at most two controls")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"repeated qubit in {qubits}")
        object.__setattr__(self, "qubits", qubits)
        if self.angles is None:
            if self.kind == "R":
                raise ValueError("rotation gates need explicit angles")
            object.__setattr__(self, "angles", CANONICAL_ANGLES[self.kind])
        else:
            object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))

    @property
    def controls(self) -> tuple[int, ...]:
        return self.qubits[:-1]

    @property
    def target(self) -> int:
        return self.qubits[-1]

    def unitary(self) -> np.ndarray:
        return engine.unitary_from_angles(*self.angles)

    def is_canonical(self) -> bool:
        return self.kind in _NAMED and self.angles == CANONICAL_ANGLES[self.kind]

    def inverse(self) -> "GateSpec":
        if self.kind in _INVERSE and self.is_canonical():
            return GateSpec(_INVERSE[self.kind], self.qubits)
        a, b, g, d = self.angles
        return GateSpec("R", self.qubits, (-a, -d, -g, -b))

    def with_angles(self, angles) -> "GateSpec":
        return replace(self, angles=tuple(float(a) for a in angles))


def gate(kind: str, *qubits: int) -> GateSpec:
    return GateSpec(kind, tuple(qubits))


def H(q):
    return gate("H", q)


def X(q):
    return gate("X", q)


def Z(q):
    return gate("Z", q)


def CNOT(c, t):
    return gate("X", c, t)


def CZ(c, t):
    return gate("Z", c, t)


def TOFFOLI(c1, c2, t):
    return gate("X", c1, c2, t)


# ---------------------------------------------------------------------------
# circuits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Correction:
    """Classically controlled Pauli layer driven by a syndrome lookup table.

    ``table[s, k]`` is the Pauli code (0=I, 1=X, 2=Y, 3=Z) applied to
    ``first_qubit + k`` when the syndrome integer read from ``slots`` is ``s``
    (``slots[0]`` is the least significant bit).
    """

    table: np.ndarray
    slots: tuple[int, ...]
    first_qubit: int = 0

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(range(self.first_qubit, self.first_qubit + self.table.shape[1]))


@dataclass
class Layer:
    gates: list[GateSpec] = field(default_factory=list)
    measures: list[tuple[int, int]] = field(default_factory=list)
    resets: list[int] = field(default_factory=list)
    correction: Correction | None = None

    def qubits(self) -> set[int]:
        used = {q for g in self.gates for q in g.qubits}
        used.update(q for q, _ in self.measures)
        used.update(self.resets)
        if self.correction is not None:
            used.update(self.correction.qubits)
        return used


class Circuit:
    """An ordered list of layers on a fixed-width register."""

    def __init__(self, n_qubits: int, layers: Sequence[Layer] = ()):
        self.n_qubits = int(n_qubits)
        self.layers: list[Layer] = list(layers)

    def __repr__(self):
        return f"Circuit(n_qubits={self.n_qubits}, depth={self.depth()})"

    def depth(self) -> int:
        return len(self.layers)

    def _check(self, qubits):
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise IndexError(f"qubit {q} out of range for {self.n_qubits}-qubit circuit")

    def _slot_for(self, qubits, packing: str) -> Layer:
        if packing not in ("greedy", "new_layer"):
            raise ValueError(f"unknown packing {packing!r}")
        if packing == "new_layer" or not self.layers:
            self.layers.append(Layer())
            return self.layers[-1]
        wanted = set(qubits)
        pos = len(self.layers)
        while pos > 0:
            layer = self.layers[pos - 1]
            if layer.correction is not None or layer.qubits() & wanted:
                break
            pos -= 1
        if pos == len(self.layers):
            self.layers.append(Layer())
        return self.layers[pos]

    def append_gate(self, g: GateSpec, packing: str = "greedy") -> "Circuit":
        self._check(g.qubits)
        self._slot_for(g.qubits, packing).gates.append(g)
        return self

    def extend(self, gates: Sequence[GateSpec], packing: str = "greedy") -> "Circuit":
        for g in gates:
            self.append_gate(g, packing)
        return self

    def append_layer(self, gates: Sequence[GateSpec] = (), resets: Sequence[int] = ()) -> "Circuit":
        layer = Layer(gates=list(gates), resets=list(resets))
        self._check(layer.qubits())
        used: list[int] = [q for g in layer.gates for q in g.qubits] + list(layer.resets)
        if len(used) != len(set(used)):
            raise ValueError("gates in one layer must act on disjoint qubits")
        self.layers.append(layer)
        return self

    def append_measure(self, q: int, slot: int, packing: str = "greedy") -> "Circuit":
        self._check([q])
        self._slot_for([q], packing).measures.append((q, slot))
        return self

    def append_reset(self, q: int, packing: str = "greedy") -> "Circuit":
        self._check([q])
        self._slot_for([q], packing).resets.append(q)
        return self

    def append_correction(self, correction: Correction) -> "Circuit":
        self._check(correction.qubits)
        self.layers.append(Layer(correction=correction))
        return self

    def inverse(self) -> "Circuit":
        """Reverse the layer order and invert every gate (unitary circuits only)."""
        out = Circuit(self.n_qubits)
        for layer in reversed(self.layers):
            if layer.measures or layer.resets or layer.correction is not None:
                raise ValueError("only unitary circuits can be inverted")
            out.layers.append(Layer(gates=[g.inverse() for g in reversed(layer.gates)]))
        return out

    def widened(self, n_qubits: int) -> "Circuit":
        if n_qubits < self.n_qubits:
            raise ValueError("cannot narrow a circuit")
        return Circuit(n_qubits, self.layers)

    def gates(self):
        for layer in self.layers:
            yield from layer.gates

    def to_text(self) -> str:
        """One line per operation: ``layer kind qubits angles``."""
        lines = []
        for i, layer in enumerate(self.layers):
            for g in layer.gates:
                name = "C" * (len(g.qubits) - 1) + g.kind
                qs = ",".join(map(str, g.qubits))
                ang = " ".join(f"{a:.12g}" for a in g.angles)
                lines.append(f"{i} {name} {qs} {ang}")
            for q, s in layer.measures:
                lines.append(f"{i} MEASURE {q} -> c{s}")
            for q in layer.resets:
                lines.append(f"{i} RESET {q}")
            if layer.correction is not None:
                slots = ",".join(map(str, layer.correction.slots))
                lines.append(f"{i} CORRECT c[{slots}] -> q{layer.correction.first_qubit}+")
        return "\n".join(lines) + ("\n" if lines else "")

    def run(self, state: StateVector, noise=None, rng=None):
        """Run with noise; returns ``(state, measurement record)``."""
        if state.n_qubits != self.n_qubits:
            raise ValueError(
                f"circuit is {self.n_qubits} qubits wide but the state has {state.n_qubits}"
            )
        return execute([self], state, noise, rng)


@dataclass(frozen=True)
class Parity:
    """Classical XOR of ``slots`` into ``out``."""

    slots: tuple[int, ...]
    out: int


@dataclass(frozen=True)
class RepeatUntilZero:
    """Run ``body`` again while ``flag`` reads 1, at most ``max_attempts`` times."""

    body: tuple
    flag: int
    max_attempts: int = 64


Step = Union[Circuit, Parity, RepeatUntilZero]


@dataclass
class Procedure:
    """Circuit fragments interleaved with classical logic."""

    n_qubits: int
    steps: list = field(default_factory=list)

    def depth(self) -> int:
        """Layers on the path where every repeat succeeds first time."""
        return _depth(self.steps)

    def run(self, state: StateVector, noise=None, rng=None):
        return execute(self.steps, state, noise, rng)


def _depth(steps) -> int:
    total = 0
    for s in steps:
        if isinstance(s, Circuit):
            total += s.depth()
        elif isinstance(s, RepeatUntilZero):
            total += _depth(s.body)
        elif isinstance(s, Procedure):
            total += s.depth()
    return total


# ---------------------------------------------------------------------------
# compilation
# ---------------------------------------------------------------------------


@dataclass
class Tape:
    ops: np.ndarray
    mats: np.ndarray
    angles: np.ndarray
    tables: np.ndarray
    n_slots: int
    depth: int

    def as_args(self):
        return self.ops, self.mats, self.angles, self.tables


class _Builder:
    def __init__(self):
        self.ops: list[list[int]] = []
        self.mats: list[np.ndarray] = []
        self.angles: list[tuple] = []
        self.tables: list[np.ndarray] = []
        self.max_slot = -1
        self.depth = 0

    def emit(self, row, mat=None, angles=(0.0, 0.0, 0.0, 0.0)):
        self.ops.append(list(row) + [0] * (5 - len(row)))
        self.mats.append(np.zeros((2, 2), np.complex128) if mat is None else mat)
        self.angles.append(angles)

    def slot(self, s):
        self.max_slot = max(self.max_slot, s)
        return s

    def table_id(self, table):
        for i, t in enumerate(self.tables):
            if t is table:
                return i
        self.tables.append(table)
        return len(self.tables) - 1

    def add(self, steps):
        for s in steps:
            if isinstance(s, Procedure):
                self.add(s.steps)
            elif isinstance(s, Circuit):
                for layer in s.layers:
                    self.add_layer(layer)
            elif isinstance(s, Parity):
                for k in s.slots:
                    self.slot(k)
                first = s.slots[0]
                if tuple(s.slots) != tuple(range(first, first + len(s.slots))):
                    raise ValueError("parity slots must be contiguous")
                self.emit([engine.OP_PARITY, first, len(s.slots), self.slot(s.out)])
            elif isinstance(s, RepeatUntilZero):
                start = len(self.ops)
                self.add(s.body)
                self.emit([engine.OP_JUMP_IF, self.slot(s.flag), start, s.max_attempts])
            else:
                raise TypeError(f"cannot compile {type(s).__name__}")

    def add_layer(self, layer: Layer):
        for g in layer.gates:
            cmask = 0
            for c in g.controls:
                cmask |= 1 << c
            kind = _FAST.get(g.kind, KIND_MATRIX) if g.is_canonical() else KIND_MATRIX
            mat = _NAMED[g.kind] if g.is_canonical() else g.unitary()
            self.emit([engine.OP_GATE, kind, cmask, g.target], mat, g.angles)
        for q, s in layer.measures:
            self.emit([engine.OP_MEASURE, q, self.slot(s)])
        for q in layer.resets:
            self.emit([engine.OP_RESET, q])
        if layer.correction is not None:
            c = layer.correction
            first = c.slots[0]
            if tuple(c.slots) != tuple(range(first, first + len(c.slots))):
                raise ValueError("syndrome slots must be contiguous")
            for k in c.slots:
                self.slot(k)
            self.emit([engine.OP_CORRECT, self.table_id(c.table), first, len(c.slots), c.first_qubit])
        self.emit([engine.OP_LAYER])
        self.depth += 1

    def build(self) -> Tape:
        ops = np.array(self.ops, dtype=np.int64).reshape(-1, 5)
        mats = np.array(self.mats, dtype=np.complex128).reshape(-1, 2, 2)
        angles = np.array(self.angles, dtype=np.float64).reshape(-1, 4)
        if self.tables:
            width = max(t.shape[1] for t in self.tables)
            rows = max(t.shape[0] for t in self.tables)
            tables = np.zeros((len(self.tables), rows, width), dtype=np.int64)
            for i, t in enumerate(self.tables):
                tables[i, : t.shape[0], : t.shape[1]] = t
        else:
            tables = np.zeros((1, 1, 1), dtype=np.int64)
        return Tape(ops, mats, angles, tables, self.max_slot + 1, self.depth)


def compile_steps(steps) -> Tape:
    if isinstance(steps, (Circuit, Procedure)):
        steps = [steps]
    b = _Builder()
    b.add(steps)
    return b.build()


_NO_INJECTION = np.array([-1, 0, 0], dtype=np.int64)
_NO_FORCING = np.zeros(0, dtype=np.int64)


def run_compiled(tape: Tape, state: StateVector, p=0.0, sigma=0.0, rng=None, creg=None,
                 injection=None, forced=None):
    """Run a compiled tape on ``state`` in place; returns ``(status, creg, slots)``."""
    if rng is None:
        rng = np.random.default_rng(0)
    if creg is None:
        creg = np.zeros(max(tape.n_slots, 1), dtype=np.int64)
    inj = _NO_INJECTION if injection is None else np.asarray(injection, dtype=np.int64)
    frc = _NO_FORCING if forced is None else np.asarray(forced, dtype=np.int64)
    status, slots = engine.run_tape(
        state.amplitudes, state.n_qubits, *tape.as_args(), float(p), float(sigma), rng, creg, inj, frc
    )
    return status, creg, slots


class RetryBudgetExceeded(RuntimeError):
    pass


def raise_for_status(status: int) -> None:
    from .statevector import NumericalError

    if status == engine.STATUS_RETRY_EXHAUSTED:
        raise RetryBudgetExceeded("ancilla preparation failed too many times")
    if status == engine.STATUS_DEGENERATE:
        raise NumericalError("state norm collapsed during measurement")
    if status == engine.STATUS_IMPOSSIBLE_BRANCH:
        raise ValueError("forced measurement outcome has zero probability")


def execute(steps, state: StateVector, noise=None, rng=None):
    """Run circuit steps under ``noise`` (a NoiseConfig or None for ideal)."""
    p = 0.0 if noise is None else noise.p
    sigma = 0.0 if noise is None else noise.sigma
    if rng is None:
        seed = 0 if noise is None else noise.master_seed
        rng = np.random.default_rng(seed)
    tape = compile_steps(steps)
    status, creg, _ = run_compiled(tape, state, p, sigma, rng)
    raise_for_status(status)
    return state, [int(c) for c in creg[: tape.n_slots]]


def run(circuit: Circuit, state: StateVector, noise=None, rng=None):
    return circuit.run(state, noise, rng)


def depth(circuit) -> int:
    return circuit.depth()


def append_gate(circuit: Circuit, g: GateSpec, packing: str = "greedy") -> Circuit:
    return circuit.append_gate(g, packing)
