"""Compiled tape interpreter shared by circuit runs, QEC procedures and trials.

A tape is a flat ``int64`` op table plus per-op gate data. Layers end with an
``OP_LAYER`` marker, which is where one depolarizing step hits every qubit of
the register the tape runs on.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .statevector import (
    KIND_MATRIX,
    KIND_X,
    KIND_Y,
    KIND_Z,
    kernel_apply,
    kernel_measure,
)

OP_GATE = 1  # a=fast kind, b=control mask, c=target
OP_MEASURE = 2  # a=qubit, b=classical slot
OP_RESET = 3  # a=qubit
OP_LAYER = 4
OP_CORRECT = 5  # a=table id, b=first syndrome slot, c=syndrome bits, d=first block qubit
OP_PARITY = 6  # a=first slot, b=count, c=output slot
OP_JUMP_IF = 7  # a=flag slot, b=target pc, c=attempt budget

PAULI_I = 0
PAULI_X = 1
PAULI_Y = 2
PAULI_Z = 3

STATUS_OK = 0
STATUS_RETRY_EXHAUSTED = 1
STATUS_DEGENERATE = 2
STATUS_IMPOSSIBLE_BRANCH = 3

_DUMMY = np.zeros((2, 2), dtype=np.complex128)


@njit(cache=True)
def unitary_from_angles(alpha, beta, gamma, delta):
    """exp(i alpha) Rz(beta) Ry(gamma) Rz(delta)."""
    c = np.cos(gamma / 2.0)
    s = np.sin(gamma / 2.0)
    u = np.empty((2, 2), dtype=np.complex128)
    g = np.exp(1j * alpha)
    u[0, 0] = g * np.exp(-0.5j * (beta + delta)) * c
    u[0, 1] = -g * np.exp(-0.5j * (beta - delta)) * s
    u[1, 0] = g * np.exp(0.5j * (beta - delta)) * s
    u[1, 1] = g * np.exp(0.5j * (beta + delta)) * c
    return u


@njit(cache=True)
def apply_pauli(amps, pauli, q):
    if pauli == PAULI_X:
        kernel_apply(amps, KIND_X, _DUMMY, 0, q)
    elif pauli == PAULI_Y:
        kernel_apply(amps, KIND_Y, _DUMMY, 0, q)
    elif pauli == PAULI_Z:
        kernel_apply(amps, KIND_Z, _DUMMY, 0, q)


@njit(cache=True)
def depolarize_branch(r, p):
    """Map a uniform draw to I / X / Z / Y with weights 1-p, p/3, p/3, p/3."""
    if r >= p:
        return PAULI_I
    third = p / 3.0
    if r < third:
        return PAULI_X
    if r < 2.0 * third:
        return PAULI_Z
    return PAULI_Y


@njit(cache=True)
def depolarize_with(amps, p, draws):
    for q in range(draws.shape[0]):
        apply_pauli(amps, depolarize_branch(draws[q], p), q)


@njit(cache=True)
def run_tape(amps, width, ops, mats, angles, tables, p, sigma, rng, creg, inj, forced):
    """Execute a tape in place.

    ``inj = (slot, qubit, pauli)`` inserts one Pauli at the given depolarizing
    slot (slot -1 disables it). ``forced[k] >= 0`` fixes the outcome of the
    k-th measurement. Returns ``(status, depolarizing slots executed)``.
    """
    n_ops = ops.shape[0]
    attempts = np.zeros(n_ops, dtype=np.int64)
    slot = 0
    n_meas = 0
    pc = 0
    while pc < n_ops:
        code = ops[pc, 0]
        if code == OP_GATE:
            kind = ops[pc, 1]
            cmask = ops[pc, 2]
            target = ops[pc, 3]
            if sigma > 0.0:
                a0 = angles[pc, 0] + sigma * rng.standard_normal()
                a1 = angles[pc, 1] + sigma * rng.standard_normal()
                a2 = angles[pc, 2] + sigma * rng.standard_normal()
                a3 = angles[pc, 3] + sigma * rng.standard_normal()
                kernel_apply(amps, KIND_MATRIX, unitary_from_angles(a0, a1, a2, a3), cmask, target)
            else:
                kernel_apply(amps, kind, mats[pc], cmask, target)
        elif code == OP_MEASURE:
            q = ops[pc, 1]
            r = rng.random()
            if n_meas < forced.shape[0] and forced[n_meas] >= 0:
                r = 0.0 if forced[n_meas] == 0 else 1.0
            outcome = kernel_measure(amps, q, r)
            if outcome < 0:
                return STATUS_DEGENERATE, slot
            if n_meas < forced.shape[0] and forced[n_meas] >= 0 and outcome != forced[n_meas]:
                return STATUS_IMPOSSIBLE_BRANCH, slot
            creg[ops[pc, 2]] = outcome
            n_meas += 1
        elif code == OP_RESET:
            q = ops[pc, 1]
            outcome = kernel_measure(amps, q, rng.random())
            if outcome < 0:
                return STATUS_DEGENERATE, slot
            if outcome == 1:
                apply_pauli(amps, PAULI_X, q)
        elif code == OP_LAYER:
            if p > 0.0:
                for q in range(width):
                    apply_pauli(amps, depolarize_branch(rng.random(), p), q)
            if slot == inj[0]:
                apply_pauli(amps, inj[2], inj[1])
            slot += 1
        elif code == OP_CORRECT:
            table = ops[pc, 1]
            first = ops[pc, 2]
            nbits = ops[pc, 3]
            offset = ops[pc, 4]
            s = 0
            for k in range(nbits):
                s |= creg[first + k] << k
            for k in range(tables.shape[2]):
                apply_pauli(amps, tables[table, s, k], offset + k)
        elif code == OP_PARITY:
            first = ops[pc, 1]
            acc = 0
            for k in range(ops[pc, 2]):
                acc ^= creg[first + k]
            creg[ops[pc, 3]] = acc
        elif code == OP_JUMP_IF:
            if creg[ops[pc, 1]] != 0:
                attempts[pc] += 1
                if attempts[pc] >= ops[pc, 3]:
                    return STATUS_RETRY_EXHAUSTED, slot
                pc = ops[pc, 2]
                continue
            attempts[pc] = 0
        pc += 1
    return STATUS_OK, slot
