"""Dense pure-state storage and the in-place amplitude kernels.

Basis convention: for basis index ``b``, bit ``k`` of ``b`` is the value of
qubit ``k`` (qubit 0 is the least significant bit). Every circuit in the
package is written against this convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

MAX_QUBITS = 26

# Fast-path selectors shared with the tape interpreter.
KIND_MATRIX = 0
KIND_H = 1
KIND_X = 2
KIND_Y = 3
KIND_Z = 4

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


class NumericalError(RuntimeError):
    """Raised when a state becomes numerically degenerate."""


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def new_state(n_qubits: int) -> StateVector:
    if not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits!r}")
    amps = np.zeros(1 << int(n_qubits), dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(int(n_qubits), amps)


def from_amplitudes(amplitudes, normalize: bool = False) -> StateVector:
    amps = np.ascontiguousarray(amplitudes, dtype=np.complex128).copy()
    n = amps.shape[0].bit_length() - 1
    if amps.ndim != 1 or (1 << n) != amps.shape[0] or n < 1:
        raise ValueError("amplitude count must be a power of two >= 2")
    if normalize:
        amps /= np.linalg.norm(amps)
    return StateVector(n, amps)


def basis_index(bits: str) -> int:
    """Index of a basis string whose leftmost character is qubit 0."""
    return sum(1 << k for k, ch in enumerate(bits) if ch == "1")


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


@njit(cache=True)
def kernel_apply(amps, kind, u, cmask, target):
    """Apply a (multi-)controlled 2x2 operator in place.

    ``cmask`` holds the control bits (0 for an uncontrolled gate); ``kind``
    selects a specialised loop for H and the Paulis, otherwise ``u`` is used.
    """
    tmask = 1 << target
    n = amps.shape[0]
    if kind == KIND_MATRIX:
        u00 = u[0, 0]
        u01 = u[0, 1]
        u10 = u[1, 0]
        u11 = u[1, 1]
    for i in range(n):
        if (i & tmask) != 0 or (i & cmask) != cmask:
            continue
        j = i | tmask
        a = amps[i]
        b = amps[j]
        if kind == KIND_X:
            amps[i] = b
            amps[j] = a
        elif kind == KIND_Z:
            amps[j] = -b
        elif kind == KIND_H:
            amps[i] = (a + b) * _INV_SQRT2
            amps[j] = (a - b) * _INV_SQRT2
        elif kind == KIND_Y:
            amps[i] = -1j * b
            amps[j] = 1j * a
        else:
            amps[i] = u00 * a + u01 * b
            amps[j] = u10 * a + u11 * b


@njit(cache=True)
def kernel_single_strided(amps, u, target):
    """Uncontrolled 2x2 update walking the amplitude pairs block by block."""
    stride = 1 << target
    n = amps.shape[0]
    u00 = u[0, 0]
    u01 = u[0, 1]
    u10 = u[1, 0]
    u11 = u[1, 1]
    for base in range(0, n, 2 * stride):
        for i in range(base, base + stride):
            a = amps[i]
            b = amps[i + stride]
            amps[i] = u00 * a + u01 * b
            amps[i + stride] = u10 * a + u11 * b


@njit(cache=True)
def kernel_prob_one(amps, q):
    mask = 1 << q
    p1 = 0.0
    for i in range(amps.shape[0]):
        if i & mask:
            p1 += amps[i].real * amps[i].real + amps[i].imag * amps[i].imag
    return p1


@njit(cache=True)
def kernel_collapse(amps, q, outcome, prob):
    """Project qubit ``q`` onto ``outcome`` and rescale by ``1/sqrt(prob)``."""
    mask = 1 << q
    scale = 1.0 / np.sqrt(prob)
    want = mask if outcome == 1 else 0
    for i in range(amps.shape[0]):
        if (i & mask) == want:
            amps[i] *= scale
        else:
            amps[i] = 0.0


@njit(cache=True)
def kernel_measure(amps, q, r):
    """Measure qubit ``q`` using the uniform draw ``r``.

    Returns the outcome, or -1 if the register norm has degenerated.
    """
    p1 = kernel_prob_one(amps, q)
    total = 0.0
    for i in range(amps.shape[0]):
        total += amps[i].real * amps[i].real + amps[i].imag * amps[i].imag
    if total < 1e-12:
        return -1
    p0 = total - p1
    outcome = 0 if r * total < p0 else 1
    # rounding noise can select an (essentially) empty branch
    if outcome == 0 and p0 < 1e-14:
        outcome = 1
    elif outcome == 1 and p1 < 1e-14:
        outcome = 0
    kernel_collapse(amps, q, outcome, p1 if outcome == 1 else p0)
    return outcome


@njit(cache=True)
def kernel_block_fidelity(amps, ref, data_idx, n_rest, rest_idx):
    """Sum over ancilla basis states of |<ref (x) a|psi>|^2.

    ``data_idx[j]`` is the register offset of reference basis state ``j`` and
    ``rest_idx[a]`` the offset contributed by ancilla basis state ``a``.
    """
    total = 0.0
    for a in range(n_rest):
        off = rest_idx[a]
        acc = 0.0 + 0.0j
        for j in range(ref.shape[0]):
            acc += np.conj(ref[j]) * amps[data_idx[j] + off]
        total += acc.real * acc.real + acc.imag * acc.imag
    return total


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def _check_qubit(state: StateVector, q: int, what: str = "qubit") -> None:
    if not 0 <= q < state.n_qubits:
        raise IndexError(f"{what} {q} out of range for {state.n_qubits}-qubit register")


def _as_unitary(u) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2, 2):
        raise ValueError("expected a 2x2 operator")
    return np.ascontiguousarray(u)


def apply_single(state: StateVector, u, target: int) -> StateVector:
    _check_qubit(state, target, "target")
    kernel_single_strided(state.amplitudes, _as_unitary(u), target)
    return state


def apply_controlled(state: StateVector, u, control: int, target: int) -> StateVector:
    _check_qubit(state, control, "control")
    _check_qubit(state, target, "target")
    if control == target:
        raise ValueError("control and target must differ")
    kernel_apply(state.amplitudes, KIND_MATRIX, _as_unitary(u), 1 << control, target)
    return state


def apply_double_controlled(state: StateVector, u, c1: int, c2: int, target: int) -> StateVector:
    for q, what in ((c1, "control"), (c2, "control"), (target, "target")):
        _check_qubit(state, q, what)
    if len({c1, c2, target}) != 3:
        raise ValueError("controls and target must be pairwise distinct")
    kernel_apply(state.amplitudes, KIND_MATRIX, _as_unitary(u), (1 << c1) | (1 << c2), target)
    return state


def measure(state: StateVector, q: int, r: float) -> tuple[int, StateVector]:
    """Projective Z measurement; outcome 0 iff ``r < P(q = 0)``."""
    _check_qubit(state, q)
    outcome = kernel_measure(state.amplitudes, q, float(r))
    if outcome < 0:
        raise NumericalError("cannot measure a state with vanishing norm")
    return int(outcome), state


def _offsets(qubits) -> np.ndarray:
    qubits = list(qubits)
    idx = np.zeros(1 << len(qubits), dtype=np.int64)
    for k, q in enumerate(qubits):
        idx[1 << k:1 << (k + 1)] = idx[: 1 << k] + (1 << q)
    return idx


def data_fidelity(state: StateVector, reference: StateVector, data_qubits, ancilla_qubits=()) -> float:
    """Overlap of ``state`` with ``reference`` on ``data_qubits``, tracing out the rest.

    Reference qubit ``k`` is placed on register qubit ``data_qubits[k]``.
    The state is read only.
    """
    data_qubits = [int(q) for q in data_qubits]
    ancilla_qubits = [int(q) for q in ancilla_qubits]
    everything = data_qubits + ancilla_qubits
    if sorted(everything) != list(range(state.n_qubits)):
        raise ValueError("data and ancilla qubits must partition the register")
    if reference.n_qubits != len(data_qubits):
        raise ValueError("reference width does not match the data qubits")
    rest = _offsets(ancilla_qubits)
    value = kernel_block_fidelity(
        state.amplitudes, reference.amplitudes, _offsets(data_qubits), rest.shape[0], rest
    )
    return float(min(max(value, 0.0), 1.0))
