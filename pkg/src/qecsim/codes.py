"""The [[5,1,3]], [[7,1,3]] and [[9,1,3]] codes as executable circuit bundles.

Register layout: the code block occupies qubits ``0 .. n_block-1`` and the
syndrome ancillas follow it. Basis strings such as ``"1010101"`` are read
with the leftmost character as qubit 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .circuit import (
    CNOT,
    CZ,
    TOFFOLI,
    Circuit,
    Correction,
    GateSpec,
    H,
    Layer,
    Parity,
    Procedure,
    RepeatUntilZero,
    X,
    Z,
    compile_steps,
    gate,
    raise_for_status,
    run_compiled,
)
from .statevector import StateVector, data_fidelity, from_amplitudes, new_state

PAULI_CODE = {"I": 0, "X": 1, "Y": 2, "Z": 3}
PAULI_NAME = "IXYZ"

STEANE_SUPPORTS = ((0, 2, 4, 6), (1, 2, 5, 6), (3, 4, 5, 6))
FIVE_STABILIZERS = ("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ")
SHOR_RETRY_BUDGET = 64


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class SyndromeRecord:
    bits: tuple[int, ...]
    applied_correction: tuple[tuple[str, int], ...] = ()


@dataclass
class CodeSpec:
    name: str
    ancilla_mode: str
    n_block: int
    n_ancilla: int
    data_qubit: int
    stabilizers: tuple[str, ...]
    encoder: Circuit
    decoder: Circuit
    syndrome: Procedure | None = None
    recovery: Circuit | None = None
    correction_table: np.ndarray | None = None
    syndrome_slots: tuple[int, ...] = ()
    logical_zero: StateVector = field(default=None, repr=False)
    logical_one: StateVector = field(default=None, repr=False)

    @property
    def n_total(self) -> int:
        return self.n_block + self.n_ancilla

    @property
    def block_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.n_block))

    @property
    def ancilla_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.n_block, self.n_total))

    def correction_for(self, bits) -> tuple[tuple[str, int], ...]:
        s = sum(int(b) << k for k, b in enumerate(bits))
        row = self.correction_table[s]
        return tuple((PAULI_NAME[c], k) for k, c in enumerate(row) if c)


# ---------------------------------------------------------------------------
# Pauli bookkeeping
# ---------------------------------------------------------------------------


def anticommutes(a: str, b: str) -> bool:
    flips = sum(1 for x, y in zip(a, b) if x != "I" and y != "I" and x != y)
    return flips % 2 == 1


def pauli_product(a: str, b: str) -> str:
    """Product up to phase."""
    out = []
    for x, y in zip(a, b):
        xs = (x in "XY") ^ (y in "XY")
        zs = (x in "ZY") ^ (y in "ZY")
        out.append("Y" if xs and zs else "X" if xs else "Z" if zs else "I")
    return "".join(out)


def syndrome_of(error: str, stabilizers) -> int:
    return sum(1 << k for k, g in enumerate(stabilizers) if anticommutes(error, g))


def build_correction_table(stabilizers) -> np.ndarray:
    """Syndrome -> lowest-weight correction, found by enumerating errors.

    Candidates are products of at most one X-type and one Z-type single-qubit
    factor, which covers every weight-one Pauli and, for CSS codes, every pair
    of independent X and Z errors.
    """
    n = len(stabilizers[0])
    singles = ["I" * n]
    for q in range(n):
        for p in "XZ":
            singles.append("I" * q + p + "I" * (n - q - 1))
    candidates = {pauli_product(a, b) for a, b in product(singles, singles)}
    ordered = sorted(candidates, key=lambda e: (n - e.count("I"), e))
    table = np.full((1 << len(stabilizers), n), -1, dtype=np.int64)
    for err in ordered:
        s = syndrome_of(err, stabilizers)
        if table[s, 0] < 0:
            table[s] = [PAULI_CODE[c] for c in err]
    table[table < 0] = 0
    return table


# ---------------------------------------------------------------------------
# encoders
# ---------------------------------------------------------------------------


def _layers(n, layers) -> Circuit:
    c = Circuit(n)
    for gates in layers:
        c.append_layer(gates)
    return c


def seven_encoder() -> Circuit:
    # data on qubit 2; |1> is copied onto the odd codeword 0010110 first
    return _layers(7, [
        [H(0), H(1), H(3), CNOT(2, 4)],
        [CNOT(2, 5), CNOT(0, 6), CNOT(3, 4)],
        [CNOT(0, 2), CNOT(1, 5), CNOT(3, 6)],
        [CNOT(0, 4), CNOT(1, 2), CNOT(3, 5)],
        [CNOT(1, 6)],
    ])


def nine_encoder() -> Circuit:
    return _layers(9, [
        [CNOT(0, 3)],
        [CNOT(0, 6)],
        [H(0), H(3), H(6)],
        [CNOT(0, 1), CNOT(3, 4), CNOT(6, 7)],
        [CNOT(0, 2), CNOT(3, 5), CNOT(6, 8)],
    ])


def nine_decode_and_recover() -> Circuit:
    """Inverse encoder with majority-vote Toffolis after each decoding stage."""
    return _layers(9, [
        [CNOT(0, 2), CNOT(3, 5), CNOT(6, 8)],
        [CNOT(0, 1), CNOT(3, 4), CNOT(6, 7)],
        [TOFFOLI(1, 2, 0), TOFFOLI(4, 5, 3), TOFFOLI(7, 8, 6)],
        [H(0), H(3), H(6)],
        [CNOT(0, 6)],
        [CNOT(0, 3)],
        [TOFFOLI(3, 6, 0)],
    ])


def five_encoder() -> Circuit:
    """Encoder built from the standard form of the XZZXI stabilizers.

    Rows YZIZY, IXZZX, ZZXIX, ZIZYY have identity X-part on qubits 0-3, so
    each pivot gets H (plus S where the pivot carries Y) and then controls the
    rest of its row. The leading Z on the data qubit aligns the phase of
    |1_L> with XXXXX|0_L>.
    """
    c = Circuit(5)
    c.extend([
        Z(4),
        H(0), gate("S", 0), CZ(0, 1), CZ(0, 3), gate("Y", 0, 4),
        H(1), CZ(1, 2), CZ(1, 3), CNOT(1, 4),
        H(2), CZ(2, 0), CZ(2, 1), CNOT(2, 4),
        H(3), gate("S", 3), CZ(3, 0), CZ(3, 2), gate("Y", 3, 4),
    ])
    return c


# ---------------------------------------------------------------------------
# syndrome extraction
# ---------------------------------------------------------------------------


def _controlled_pauli(p: str, control: int, target: int) -> GateSpec:
    return gate(p, control, target)


def one_ancilla_round(stabilizers, ancilla: int, n_total: int, table: np.ndarray) -> Circuit:
    """Sequential generator measurements through a single reusable ancilla.

    Each generator: reset, H, controlled Paulis from the ancilla, H, measure.
    The round ends with the lookup-table correction, while the ancilla is
    reset in the same layer.
    """
    c = Circuit(n_total)
    for k, g in enumerate(stabilizers):
        c.append_layer(resets=[ancilla])
        c.append_layer([H(ancilla)])
        for q, p in enumerate(g):
            if p != "I":
                c.append_layer([_controlled_pauli(p, ancilla, q)])
        c.append_layer([H(ancilla)])
        c.layers.append(Layer(measures=[(ancilla, k)]))
    corr = Correction(table, tuple(range(len(stabilizers))), 0)
    c.layers.append(Layer(resets=[ancilla], correction=corr))
    return c


def shor_state_steps(ancillas, check_slot: int, n_total: int, max_attempts=SHOR_RETRY_BUDGET):
    """Verified preparation of the 4-qubit even-parity (Shor) state.

    A 3-qubit cat state is checked by copying the parity of its two ends onto
    the fourth ancilla; a nonzero check restarts the preparation. On success
    the fourth qubit joins the cat and H on all four gives the Shor state.
    """
    a0, a1, a2, a3 = ancillas
    body = Circuit(n_total)
    body.append_layer(resets=list(ancillas))
    body.append_layer([H(a0)])
    body.append_layer([CNOT(a0, a1)])
    body.append_layer([CNOT(a1, a2), CNOT(a0, a3)])
    body.append_layer([CNOT(a2, a3)])
    body.layers.append(Layer(measures=[(a3, check_slot)]))
    finish = Circuit(n_total)
    finish.append_layer([CNOT(a0, a3)])
    finish.append_layer([H(a) for a in ancillas])
    return [RepeatUntilZero((body,), check_slot, max_attempts), finish]


def four_ancilla_round(ancillas, n_total: int, table: np.ndarray, stabilizers) -> Procedure:
    """Shor-state syndrome extraction, one weight-4 generator per round.

    Slots 0..m-1 receive the syndrome parities, slot m the verification flag,
    and the raw ancilla outcomes follow.
    """
    m = len(stabilizers)
    check = m
    steps = []
    for k, g in enumerate(stabilizers):
        support = [q for q, p in enumerate(g) if p != "I"]
        kind = {g[q] for q in support}
        if len(kind) != 1 or len(support) != len(ancillas):
            raise ConfigurationError("Shor-state extraction needs weight-4 X- or Z-type generators")
        kind = kind.pop()
        first = m + 1 + 4 * k
        steps.extend(shor_state_steps(ancillas, check, n_total))
        c = Circuit(n_total)
        if kind == "X":
            c.append_layer([H(a) for a in ancillas])
            c.append_layer([CNOT(a, q) for a, q in zip(ancillas, support)])
            c.append_layer([H(a) for a in ancillas])
        else:
            c.append_layer([CNOT(q, a) for a, q in zip(ancillas, support)])
        c.layers.append(Layer(measures=[(a, first + i) for i, a in enumerate(ancillas)]))
        steps.append(c)
        steps.append(Parity(tuple(range(first, first + 4)), k))
    tail = Circuit(n_total)
    tail.layers.append(Layer(resets=list(ancillas), correction=Correction(table, tuple(range(m)), 0)))
    steps.append(tail)
    return Procedure(n_total, steps)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def steane_stabilizers() -> tuple[str, ...]:
    def word(p, support):
        return "".join(p if q in support else "I" for q in range(7))

    return tuple(word("X", s) for s in STEANE_SUPPORTS) + tuple(word("Z", s) for s in STEANE_SUPPORTS)


def _logical_states(encoder: Circuit, data_qubit: int):
    zero = new_state(encoder.n_qubits)
    compile_and_run(encoder, zero)
    one = new_state(encoder.n_qubits)
    one.amplitudes[:] = 0
    one.amplitudes[1 << data_qubit] = 1
    compile_and_run(encoder, one)
    return zero, one


def compile_and_run(steps, state, noise=None, rng=None, forced=None):
    tape = compile_steps(steps)
    p = 0.0 if noise is None else noise.p
    sigma = 0.0 if noise is None else noise.sigma
    if rng is None:
        rng = np.random.default_rng(0 if noise is None else noise.master_seed)
    status, creg, _ = run_compiled(tape, state, p, sigma, rng, forced=forced)
    raise_for_status(status)
    return creg


_MODES = {"one_qubit": "one_qubit", "one": "one_qubit", "four_qubit_shor": "four_qubit_shor", "four": "four_qubit_shor"}


def build_code(name: str, ancilla_mode: str = "one_qubit") -> CodeSpec:
    mode = _MODES.get(ancilla_mode)
    if mode is None:
        raise ConfigurationError(f"unknown ancilla mode {ancilla_mode!r}")
    if mode == "four_qubit_shor" and name != "seven":
        raise ConfigurationError("the four-qubit Shor ancilla is only built for the seven-qubit code")

    if name == "seven":
        stabs = steane_stabilizers()
        table = build_correction_table(stabs)
        enc = seven_encoder()
        if mode == "one_qubit":
            n_total = 8
            syndrome = Procedure(n_total, [one_ancilla_round(stabs, 7, n_total, table)])
        else:
            n_total = 11
            syndrome = four_ancilla_round((7, 8, 9, 10), n_total, table, stabs)
        spec = CodeSpec("seven", mode, 7, n_total - 7, 2, stabs, enc, enc.inverse(),
                        syndrome=syndrome, correction_table=table,
                        syndrome_slots=tuple(range(len(stabs))))
    elif name == "five":
        stabs = FIVE_STABILIZERS
        table = build_correction_table(stabs)
        enc = five_encoder()
        syndrome = Procedure(6, [one_ancilla_round(stabs, 5, 6, table)])
        spec = CodeSpec("five", mode, 5, 1, 4, stabs, enc, enc.inverse(),
                        syndrome=syndrome, correction_table=table,
                        syndrome_slots=tuple(range(len(stabs))))
    elif name == "nine":
        stabs = (
            "ZZIIIIIII", "IZZIIIIII", "IIIZZIIII", "IIIIZZIII", "IIIIIIZZI", "IIIIIIIZZ",
            "XXXXXXIII", "IIIXXXXXX",
        )
        enc = nine_encoder()
        spec = CodeSpec("nine", mode, 9, 0, 0, stabs, enc, enc.inverse(),
                        recovery=nine_decode_and_recover())
    else:
        raise ConfigurationError(f"unknown code {name!r}")
    spec.logical_zero, spec.logical_one = _logical_states(enc, spec.data_qubit)
    return spec


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def encode(spec: CodeSpec, state: StateVector, noise=None, rng=None) -> StateVector:
    """Encode the data qubit into the block (ideal unless ``noise`` is given)."""
    compile_and_run(spec.encoder, state, noise, rng)
    return state


def decode(spec: CodeSpec, state: StateVector, noise=None, rng=None) -> StateVector:
    compile_and_run(spec.decoder, state, noise, rng)
    return state


def syndrome_and_recover(spec: CodeSpec, state: StateVector, noise=None, rng=None, forced=None):
    if spec.syndrome is None:
        raise ValueError("the nine-qubit recovery only exists fused with decoding")
    if state.n_qubits != spec.n_total:
        raise ValueError(f"expected a {spec.n_total}-qubit register")
    creg = compile_and_run(spec.syndrome, state, noise, rng, forced)
    bits = tuple(int(creg[s]) for s in spec.syndrome_slots)
    return state, SyndromeRecord(bits, spec.correction_for(bits))


def decode_and_recover_nine(spec: CodeSpec, state: StateVector, noise=None, rng=None) -> StateVector:
    if spec.recovery is None:
        raise ValueError("decode_and_recover_nine needs the nine-qubit code")
    compile_and_run(spec.recovery, state, noise, rng)
    return state


def logical_hadamard_seven(spec: CodeSpec, n_qubits: int | None = None) -> Circuit:
    if spec.name != "seven":
        raise ValueError("transversal H is only available for the seven-qubit code")
    c = Circuit(spec.n_block if n_qubits is None else n_qubits)
    c.append_layer([H(q) for q in spec.block_qubits])
    return c


def prepare_shor_ancilla(state: StateVector, ancilla_qubits, noise=None, rng=None,
                         check_slot: int = 0, max_attempts: int = SHOR_RETRY_BUDGET) -> StateVector:
    ancilla_qubits = tuple(int(q) for q in ancilla_qubits)
    if len(ancilla_qubits) != 4:
        raise ValueError("the Shor state uses exactly four ancillas")
    steps = shor_state_steps(ancilla_qubits, check_slot, state.n_qubits, max_attempts)
    compile_and_run(steps, state, noise, rng)
    return state


def encoded_input(spec: CodeSpec, alpha: complex, beta: complex, n_qubits: int | None = None) -> StateVector:
    """Unencoded register with alpha|0> + beta|1> on the data qubit."""
    n = spec.n_total if n_qubits is None else n_qubits
    st = new_state(n)
    st.amplitudes[0] = alpha
    st.amplitudes[1 << spec.data_qubit] = beta
    return st


def logical_state(spec: CodeSpec, alpha: complex, beta: complex) -> StateVector:
    amps = alpha * spec.logical_zero.amplitudes + beta * spec.logical_one.amplitudes
    return from_amplitudes(amps)


def decoded_fidelity(spec: CodeSpec, state: StateVector, reference: StateVector | None = None) -> float:
    """Fidelity of the data qubit after ideal decoding of a copy of the state.

    Every other qubit (the rest of the block and any ancillas) is traced out.
    ``reference`` is a one-qubit state, |0> by default.
    """
    work = state.copy()
    compile_and_run(spec.decoder, work)
    ref = new_state(1) if reference is None else reference
    others = [q for q in range(state.n_qubits) if q != spec.data_qubit]
    return data_fidelity(work, ref, [spec.data_qubit], others)


def block_fidelity(spec: CodeSpec, state: StateVector, logical: StateVector) -> float:
    """Overlap with a block-level logical state, ancillas traced out."""
    return data_fidelity(state, logical, spec.block_qubits, spec.ancilla_qubits)
