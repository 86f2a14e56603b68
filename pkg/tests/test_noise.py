import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qecsim import engine
from qecsim.circuit import CNOT, GateSpec, gate
from qecsim.noise import NOISELESS, NoiseConfig, depolarize_step, derive_stream, perturb_angles
from qecsim.statevector import new_state


def test_config_validation():
    assert NOISELESS.p == 0 and NOISELESS.sigma == 0
    for bad in ({"p": -0.1}, {"p": 1.5}, {"sigma": -1e-3}, {"master_seed": -1}):
        with pytest.raises(ValueError):
            NoiseConfig(**bad)


def test_zero_p_leaves_state_and_draws_nothing():
    class NoDraws:
        def random(self, size=None):
            raise AssertionError("no draw expected")

    s = new_state(3)
    depolarize_step(s, 0.0, NoDraws())
    assert s.amplitudes[0] == 1


def test_forced_first_branch_is_x_everywhere():
    class Zero:
        def random(self, size=None):
            return np.zeros(size)

    s = depolarize_step(new_state(3), 1.0, Zero())
    assert abs(s.amplitudes[7]) == pytest.approx(1.0)


def test_branch_map():
    p = 0.3
    assert engine.depolarize_branch(0.0, p) == engine.PAULI_X
    assert engine.depolarize_branch(0.15, p) == engine.PAULI_Z
    assert engine.depolarize_branch(0.25, p) == engine.PAULI_Y
    assert engine.depolarize_branch(0.3, p) == engine.PAULI_I


def test_error_frequency_binomial():
    p, n = 0.01, 10**6
    draws = derive_stream(5, 0).random(n)
    errors = sum(engine.depolarize_branch(r, p) != engine.PAULI_I for r in draws[:1000])
    assert errors <= 1000  # sanity on the scalar path
    hits = np.count_nonzero(draws < p)
    assert abs(hits / n - p) < 3 * np.sqrt(p * (1 - p) / n)


def test_branch_ratios_multinomial():
    p, n = 1.0, 10**6
    draws = derive_stream(6, 0).random(n)
    counts = np.bincount([engine.depolarize_branch(r, p) for r in draws[:200_000]], minlength=4)
    # vectorized count over the full sample, same thresholds as the kernel
    x = np.count_nonzero(draws < p / 3)
    z = np.count_nonzero((draws >= p / 3) & (draws < 2 * p / 3))
    y = n - x - z
    sd = np.sqrt(n * (1 / 3) * (2 / 3))
    for c in (x, y, z):
        assert abs(c - n / 3) < 3 * sd
    assert counts[engine.PAULI_I] == 0


def test_perturb_zero_sigma_is_identity():
    g = gate("H", 0)
    assert perturb_angles(g, 0.0, np.random.default_rng(0)) is g


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-6, 3.0), st.sampled_from(["H", "X", "Y", "Z", "S"]))
def test_perturbed_gate_is_unitary(seed, sigma, name):
    g = perturb_angles(gate(name, 0), sigma, np.random.default_rng(seed))
    u = g.unitary()
    assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-12)


def test_perturbation_mean_is_zero():
    sigma, n = 0.01, 10**5
    rng = np.random.default_rng(3)
    base = np.array(gate("H", 0).angles)
    devs = np.array([perturb_angles(gate("H", 0), sigma, rng).angles for _ in range(n)]) - base
    assert np.all(np.abs(devs.mean(axis=0)) < 3 * sigma / np.sqrt(n))
    assert np.allclose(devs.std(axis=0), sigma, rtol=0.02)


def test_controlled_gate_keeps_controls():
    g = perturb_angles(CNOT(0, 1), 0.1, np.random.default_rng(1))
    assert g.qubits == (0, 1) and g.controls == (0,)
    assert g.angles != CNOT(0, 1).angles


def test_stream_is_pure_function():
    a = derive_stream(42, 7).random(100)
    b = derive_stream(42, 7).random(100)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, derive_stream(42, 8).random(100))
    assert not np.array_equal(a, derive_stream(43, 7).random(100))


def test_stream_uniformity_chi_square():
    draws = derive_stream(0, 0).random(10**5)
    observed = np.bincount((draws * 16).astype(int), minlength=16)
    chi2 = np.sum((observed - 10**5 / 16) ** 2 / (10**5 / 16))
    assert chi2 < 30.578  # 99% quantile of chi-square with 15 dof


def test_adjacent_streams_uncorrelated():
    a = derive_stream(0, 0).random(10**5)
    b = derive_stream(0, 1).random(10**5)
    assert abs(np.corrcoef(a, b)[0, 1]) < 3 / np.sqrt(10**5)


def test_generic_rotation_kind():
    g = GateSpec("R", (0,), (0.0, 0.0, 0.0, 0.0))
    assert np.allclose(g.unitary(), np.eye(2))
