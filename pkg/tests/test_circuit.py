import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_state
from qecsim.circuit import (
    CANONICAL_ANGLES,
    CNOT,
    Circuit,
    GateSpec,
    H,
    Parity,
    Procedure,
    RepeatUntilZero,
    RetryBudgetExceeded,
    X,
    append_gate,
    depth,
    euler_angles,
    gate,
    run,
)
from qecsim.noise import NoiseConfig
from qecsim.statevector import apply_controlled, apply_single, new_state

NAMED = {
    "H": np.array([[1, 1], [1, -1]]) / np.sqrt(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1, -1]),
    "S": np.diag([1, 1j]),
    "Sdg": np.diag([1, -1j]),
}


def draws_used(seed, rng, limit=10_000):
    """Uniform draws consumed from ``rng`` since it was seeded with ``seed``."""
    nxt = rng.random()
    replay = np.random.default_rng(seed).random(limit + 1)
    hits = np.flatnonzero(replay == nxt)
    assert hits.size, "stream position not found"
    return int(hits[0])


@pytest.mark.parametrize("name", sorted(NAMED))
def test_canonical_angles_rebuild_named_gates(name):
    assert np.allclose(gate(name, 0).unitary(), NAMED[name], atol=1e-12)
    assert gate(name, 0).is_canonical()


def test_euler_round_trip_random(rng):
    from conftest import random_unitary

    for _ in range(200):
        u = random_unitary(rng)
        assert np.allclose(GateSpec("R", (0,), euler_angles(u)).unitary(), u, atol=1e-12)


def test_gate_validation():
    with pytest.raises(ValueError):
        GateSpec("Q", (0,))
    with pytest.raises(ValueError):
        GateSpec("X", (0, 0))
    with pytest.raises(ValueError):
        GateSpec("R", (0,))
    with pytest.raises(ValueError):
        GateSpec("X", (0, 1, 2, 3))


def test_inverse_gates(rng):
    for name in NAMED:
        g = gate(name, 0)
        assert np.allclose(g.inverse().unitary() @ g.unitary(), np.eye(2), atol=1e-12)
    g = GateSpec("R", (0,), tuple(rng.uniform(-3, 3, 4)))
    assert np.allclose(g.inverse().unitary() @ g.unitary(), np.eye(2), atol=1e-12)


def test_append_gate_examples():
    c = Circuit(2)
    assert depth(c) == 0
    append_gate(c, H(0))
    assert depth(c) == 1
    append_gate(c, H(1))
    assert depth(c) == 1
    append_gate(c, X(0))
    assert depth(c) == 2
    c.append_gate(X(1), packing="new_layer")
    assert c.depth() == 3
    with pytest.raises(IndexError):
        c.append_gate(H(2))
    with pytest.raises(ValueError):
        c.append_gate(H(0), packing="sideways")


def test_greedy_fills_earliest_free_layer():
    c = Circuit(3)
    c.extend([H(0), CNOT(0, 1), H(2)])
    assert c.depth() == 2
    assert [g.qubits for g in c.layers[0].gates] == [(0,), (2,)]


def test_layers_never_share_qubits(rng):
    c = Circuit(6)
    for _ in range(300):
        qs = rng.choice(6, int(rng.integers(1, 3)), replace=False)
        g = H(int(qs[0])) if len(qs) == 1 else CNOT(int(qs[0]), int(qs[1]))
        c.append_gate(g)
    for layer in c.layers:
        used = [q for g in layer.gates for q in g.qubits]
        assert len(used) == len(set(used))


def test_append_layer_rejects_overlap():
    with pytest.raises(ValueError):
        Circuit(2).append_layer([H(0), CNOT(1, 0)])


def sample_circuit():
    c = Circuit(2)
    c.extend([H(0), CNOT(0, 1), H(0)])
    c.append_measure(0, 0)
    return c


def test_sample_circuit_depth_and_outcomes():
    c = sample_circuit()
    assert c.depth() == 4
    # H CNOT H on |00> puts qubit 0 in an equal mixture of 0 and 1
    counts = np.zeros(2)
    for seed in range(400):
        _, rec = run(c, new_state(2), rng=np.random.default_rng(seed))
        counts[rec[0]] += 1
    assert abs(counts[0] / 400 - 0.5) < 3 * 0.5 / np.sqrt(400)


def test_noise_free_run_matches_direct_kernels(rng):
    c = Circuit(3)
    c.extend([H(0), CNOT(0, 2), gate("S", 1), GateSpec("R", (1, 2), (0.1, 0.2, 0.3, 0.4))])
    s = random_state(rng, 3)
    ref = s.copy()
    run(c, s)
    apply_single(ref, NAMED["H"], 0)
    apply_controlled(ref, NAMED["X"], 0, 2)
    apply_single(ref, NAMED["S"], 1)
    apply_controlled(ref, GateSpec("R", (0,), (0.1, 0.2, 0.3, 0.4)).unitary(), 1, 2)
    assert np.allclose(s.amplitudes, ref.amplitudes, atol=1e-12)


def test_width_mismatch():
    with pytest.raises(ValueError):
        run(Circuit(2), new_state(3))


def test_forced_x_branch_on_identity_layer():
    c = Circuit(1)
    c.append_layer([])
    # pick a stream whose first uniform falls in the X branch (r < p/3 with p = 1)
    seed = next(s for s in range(100) if np.random.default_rng(s).random() < 1 / 3)
    state = new_state(1)
    c.run(state, NoiseConfig(p=1.0), np.random.default_rng(seed))
    assert np.allclose(state.amplitudes, [0, 1])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.permutations(range(4)))
def test_layer_permutation_invariance(seed, perm):
    rng = np.random.default_rng(seed)
    gates = [CNOT(0, 1), H(2), GateSpec("R", (3,), tuple(rng.uniform(-3, 3, 4))), gate("Y", 4)]
    a, b = Circuit(5), Circuit(5)
    a.append_layer(gates)
    b.append_layer([gates[i] for i in perm])
    s = random_state(rng, 5)
    t = s.copy()
    run(a, s)
    run(b, t)
    assert np.allclose(s.amplitudes, t.amplitudes, atol=1e-12)


def test_determinism():
    c = Circuit(3)
    for _ in range(10):
        c.extend([H(0), CNOT(0, 1), CNOT(1, 2)])
        c.append_measure(2, 0)
    noise = NoiseConfig(p=0.05, sigma=0.05, master_seed=9)
    s1, r1 = run(c, new_state(3), noise)
    s2, r2 = run(c, new_state(3), noise)
    assert r1 == r2
    assert np.array_equal(s1.amplitudes, s2.amplitudes)


def test_one_depolarizing_step_per_layer_per_qubit():
    c = Circuit(4)
    for _ in range(7):
        c.extend([H(0), CNOT(1, 2)])
        c.append_layer([])
    rng = np.random.default_rng(0)
    run(c, new_state(4), NoiseConfig(p=0.01), rng)
    assert draws_used(0, rng) == c.depth() * 4
    rng = np.random.default_rng(0)
    run(c, new_state(4), NoiseConfig(p=0.0), rng)
    assert draws_used(0, rng) == 0


def test_measure_and_reset_layers_also_decohere():
    c = Circuit(2)
    c.append_measure(0, 0)
    c.append_reset(1)
    rng = np.random.default_rng(0)
    run(c, new_state(2), NoiseConfig(p=0.1), rng)
    # one draw per measurement or reset plus two per layer (the two share a layer)
    assert c.depth() == 1
    assert draws_used(0, rng) == 2 + 2


def test_to_text_lists_every_operation():
    text = sample_circuit().to_text().splitlines()
    assert text[0].startswith("0 H 0")
    assert text[1].startswith("1 CX 0,1")
    assert text[-1] == "3 MEASURE 0 -> c0"


def test_circuit_inverse(rng):
    c = Circuit(3)
    c.extend([H(0), CNOT(0, 1), gate("S", 2), GateSpec("R", (2, 1), (0.3, 0.1, 0.9, -0.4))])
    s = random_state(rng, 3)
    ref = s.copy()
    run(c, s)
    run(c.inverse(), s)
    assert np.allclose(s.amplitudes, ref.amplitudes, atol=1e-12)


def test_repeat_until_zero_budget():
    body = Circuit(1)
    body.append_reset(0)
    body.append_layer([X(0)])
    body.append_measure(0, 0)
    # the flag reads 1 after every attempt, so the budget runs out
    proc = Procedure(1, [RepeatUntilZero((body,), flag=0, max_attempts=5)])
    with pytest.raises(RetryBudgetExceeded):
        proc.run(new_state(1))


def test_parity_step():
    c = Circuit(3)
    c.append_layer([X(0), X(2)])
    for q in range(3):
        c.append_measure(q, q)
    proc = Procedure(3, [c, Parity((0, 1, 2), 3)])
    _, rec = proc.run(new_state(3))
    assert rec == [1, 0, 1, 0]


def test_canonical_table_complete():
    assert set(CANONICAL_ANGLES) == set(NAMED)
