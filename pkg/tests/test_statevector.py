import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_state, random_unitary
from qecsim.statevector import (
    NumericalError,
    StateVector,
    apply_controlled,
    apply_double_controlled,
    apply_single,
    basis_index,
    data_fidelity,
    from_amplitudes,
    measure,
    new_state,
)

HAD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
PX = np.array([[0, 1], [1, 0]], dtype=complex)
PZ = np.diag([1, -1]).astype(complex)


def basis(n, i):
    st_ = new_state(n)
    st_.amplitudes[:] = 0
    st_.amplitudes[i] = 1
    return st_


def dense_single(u, n, target):
    """Reference operator built from Kronecker products (qubit 0 is the rightmost factor)."""
    op = np.eye(1)
    for q in reversed(range(n)):
        op = np.kron(op, u if q == target else np.eye(2))
    return op


def test_new_state():
    assert np.array_equal(new_state(1).amplitudes, [1, 0])
    s = new_state(3)
    assert s.amplitudes[0] == 1 and not s.amplitudes[1:].any()
    for n in range(1, 10):
        assert new_state(n).norm() == 1.0


@pytest.mark.parametrize("n", [0, -1, 27, 2.5])
def test_new_state_rejects_bad_width(n):
    with pytest.raises(ValueError):
        new_state(n)


def test_single_qubit_examples():
    s = apply_single(new_state(1), HAD, 0)
    assert np.allclose(s.amplitudes, [1 / np.sqrt(2), 1 / np.sqrt(2)])
    s = apply_single(new_state(2), PX, 1)
    assert np.allclose(s.amplitudes, basis(2, 2).amplitudes)
    s = apply_single(basis(1, 1), PZ, 0)
    assert np.allclose(s.amplitudes, [0, -1])


def test_target_out_of_range():
    with pytest.raises((ValueError, IndexError)):
        apply_single(new_state(2), PX, 2)


def test_controlled_examples():
    s = apply_controlled(basis(2, 1), PX, 0, 1)
    assert np.allclose(s.amplitudes, basis(2, 3).amplitudes)
    s = apply_controlled(new_state(2), PX, 0, 1)
    assert np.allclose(s.amplitudes, new_state(2).amplitudes)
    s = apply_controlled(basis(2, 3), PZ, 0, 1)
    assert np.allclose(s.amplitudes, -basis(2, 3).amplitudes)
    with pytest.raises(ValueError):
        apply_controlled(new_state(2), PX, 1, 1)


def test_toffoli_examples():
    s = apply_double_controlled(basis(3, 3), PX, 0, 1, 2)
    assert np.allclose(s.amplitudes, basis(3, 7).amplitudes)
    s = apply_double_controlled(basis(3, 1), PX, 0, 1, 2)
    assert np.allclose(s.amplitudes, basis(3, 1).amplitudes)
    for c1, c2, t in [(0, 0, 1), (0, 1, 1), (2, 1, 2)]:
        with pytest.raises(ValueError):
            apply_double_controlled(new_state(3), PX, c1, c2, t)


def test_toffoli_twice_is_identity(rng):
    s = random_state(rng, 4)
    ref = s.copy()
    apply_double_controlled(s, PX, 3, 0, 2)
    apply_double_controlled(s, PX, 3, 0, 2)
    assert np.allclose(s.amplitudes, ref.amplitudes, atol=1e-14)


def test_kernel_matches_dense_operator(rng):
    for n in (1, 3, 5):
        for target in range(n):
            u = random_unitary(rng)
            s = random_state(rng, n)
            expect = dense_single(u, n, target) @ s.amplitudes
            assert np.allclose(apply_single(s, u, target).amplitudes, expect, atol=1e-12)


def test_named_fast_paths_match_matrices(rng):
    from qecsim.statevector import KIND_H, KIND_X, KIND_Y, KIND_Z, kernel_apply

    mats = {KIND_H: HAD, KIND_X: PX, KIND_Y: np.array([[0, -1j], [1j, 0]]), KIND_Z: PZ}
    dummy = np.zeros((2, 2), complex)
    for kind, m in mats.items():
        for cmask, target in [(0, 2), (1, 2), (0b1001, 1)]:
            s = random_state(rng, 4)
            a = s.amplitudes.copy()
            kernel_apply(a, kind, dummy, cmask, target)
            b = s.amplitudes.copy()
            kernel_apply(b, 0, np.ascontiguousarray(m, dtype=complex), cmask, target)
            assert np.allclose(a, b, atol=1e-14)


def test_norm_preserved_over_many_gates(rng):
    s = random_state(rng, 6)
    for _ in range(10_000):
        u = random_unitary(rng)
        q = int(rng.integers(6))
        if rng.random() < 0.5:
            apply_single(s, u, q)
        else:
            c = int((q + 1 + rng.integers(5)) % 6)
            apply_controlled(s, u, c, q)
    assert abs(s.norm() - 1.0) < 1e-9


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 3),
       st.complex_numbers(max_magnitude=3, allow_nan=False),
       st.complex_numbers(max_magnitude=3, allow_nan=False))
def test_linearity(seed, target, alpha, beta):
    rng = np.random.default_rng(seed)
    u = random_unitary(rng)
    v, w = random_state(rng, 4), random_state(rng, 4)
    combo = StateVector(4, alpha * v.amplitudes + beta * w.amplitudes)
    lhs = apply_single(combo, u, target).amplitudes
    rhs = alpha * apply_single(v, u, target).amplitudes + beta * apply_single(w, u, target).amplitudes
    assert np.allclose(lhs, rhs, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_unitary_round_trip(seed, n):
    rng = np.random.default_rng(seed)
    s = random_state(rng, n)
    ref = s.copy()
    u = random_unitary(rng)
    t, c = rng.choice(n, 2, replace=False)
    apply_controlled(s, u, int(c), int(t))
    apply_controlled(s, u.conj().T, int(c), int(t))
    assert np.allclose(s.amplitudes, ref.amplitudes, atol=1e-10)


def test_measure_examples():
    for r in (0.0, 0.5, 0.999):
        bit, s = measure(new_state(1), 0, r)
        assert bit == 0 and np.allclose(s.amplitudes, [1, 0])
    plus = apply_single(new_state(1), HAD, 0)
    bit, s = measure(plus, 0, 0.3)
    assert bit == 0 and np.allclose(s.amplitudes, [1, 0])
    plus = apply_single(new_state(1), HAD, 0)
    bit, s = measure(plus, 0, 0.7)
    assert bit == 1 and np.allclose(s.amplitudes, [0, 1])


def test_measure_renormalizes(rng):
    for _ in range(20):
        s = random_state(rng, 5)
        _, s = measure(s, int(rng.integers(5)), float(rng.random()))
        assert abs(s.norm() - 1) < 1e-10


def test_measure_degenerate_state():
    s = StateVector(1, np.zeros(2, complex))
    with pytest.raises(NumericalError):
        measure(s, 0, 0.5)


def test_fidelity_examples():
    ref = from_amplitudes([0.6, 0.8j])
    assert data_fidelity(ref.copy(), ref, [0], []) == pytest.approx(1.0)
    perp = from_amplitudes([0.8j, 0.6])
    assert data_fidelity(perp, ref, [0]) == pytest.approx(0.0, abs=1e-15)
    theta = 0.3
    mix = np.cos(theta) * ref.amplitudes + np.sin(theta) * perp.amplitudes
    state = from_amplitudes(np.kron([1, 0, 0, 0], mix))  # two ancillas above the data qubit
    assert data_fidelity(state, ref, [0], [1, 2]) == pytest.approx(np.cos(theta) ** 2)


def test_fidelity_traces_out_ancillas(rng):
    # data on qubits 1 and 3, ancillas on 0 and 2 in a random entangled state
    s = random_state(rng, 4)
    ref = random_state(rng, 2)
    psi = s.amplitudes.reshape(2, 2, 2, 2)  # axes q3 q2 q1 q0
    refm = ref.amplitudes.reshape(2, 2)  # axes r1 r0 -> r0 on q1, r1 on q3
    amp = np.einsum("ab,acbd->cd", refm.conj(), psi)
    assert data_fidelity(s, ref, [1, 3], [0, 2]) == pytest.approx(np.sum(np.abs(amp) ** 2))


def test_fidelity_matches_naive_overlap(rng):
    for n in range(1, 7):
        a, b = random_state(rng, n), random_state(rng, n)
        naive = abs(np.vdot(b.amplitudes, a.amplitudes)) ** 2
        assert data_fidelity(a, b, list(range(n)), []) == pytest.approx(naive, abs=1e-13)


def test_fidelity_does_not_modify_state(rng):
    s = random_state(rng, 3)
    before = s.amplitudes.copy()
    data_fidelity(s, new_state(1), [1], [0, 2])
    assert np.array_equal(before, s.amplitudes)


def test_fidelity_rejects_bad_partition():
    with pytest.raises(ValueError):
        data_fidelity(new_state(3), new_state(1), [0], [1])
    with pytest.raises(ValueError):
        data_fidelity(new_state(3), new_state(1), [0, 1], [1, 2])
    with pytest.raises(ValueError):
        data_fidelity(new_state(3), new_state(2), [0], [1, 2])


def test_basis_index_reads_qubit_zero_first():
    assert basis_index("100") == 1
    assert basis_index("001") == 4
    assert basis_index("1010101") == 0b1010101
