"""Depolarizing and gate-angle error models plus per-trial random streams."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import engine
from .circuit import GateSpec
from .statevector import StateVector


@dataclass(frozen=True)
class NoiseConfig:
    p: float = 0.0
    sigma: float = 0.0
    master_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"depolarizing probability must lie in [0, 1], got {self.p}")
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must fit in 64 unsigned bits")


NOISELESS = NoiseConfig()


def derive_stream(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent generator for one trial; a pure function of its arguments."""
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(trial_index),))
    return np.random.Generator(np.random.PCG64(seq))


def depolarize_step(state: StateVector, p: float, rng) -> StateVector:
    """One depolarizing step on every qubit: X, Z, Y with probability p/3 each.

    One uniform is drawn per qubit, in qubit order, the same way the circuit
    interpreter does. No draws are made when ``p == 0``.
    """
    if p <= 0.0:
        return state
    draws = np.asarray(rng.random(state.n_qubits), dtype=np.float64)
    engine.depolarize_with(state.amplitudes, float(p), draws)
    return state


def perturb_angles(g: GateSpec, sigma: float, rng) -> GateSpec:
    """Add independent N(0, sigma^2) deviations to the four gate angles.

    For controlled gates only the target operator is perturbed, including its
    phase, which becomes a relative phase once controlled.
    """
    if sigma <= 0.0:
        return g
    deltas = sigma * np.asarray(rng.standard_normal(4))
    return g.with_angles(np.asarray(g.angles) + deltas)
