"""Monte Carlo fidelity experiments and the single-fault injection oracle.

A trial encodes |0_L>, runs ``n_gates`` logical Hadamards with a QEC round
after every ``qec_period`` gates, and records the ideally decoded data-qubit
fidelity every ``sample_stride`` gates. Trials are grouped into fixed-size
chunks so that results do not depend on the number of worker processes.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from numba import njit

from . import engine
from .circuit import Circuit, H, Layer, Procedure, compile_steps, raise_for_status
from .codes import CodeSpec, build_code, compile_and_run, decoded_fidelity, encoded_input
from .noise import derive_stream
from .statevector import StateVector, new_state

log = logging.getLogger(__name__)

WORKERS_ENV = "QECSIM_WORKERS"
CHUNK_TRIALS = 250
CODES = ("physical", "five", "seven", "nine")
ANCILLA_MODES = ("one", "four")


@dataclass(frozen=True)
class ExperimentConfig:
    code: str = "seven"
    ancilla_mode: str = "one"
    p: float = 0.0
    sigma: float = 0.0
    qec_period: int | None = None
    n_gates: int = 4000
    trials: int = 10_000
    master_seed: int = 0
    sample_stride: int = 2

    def __post_init__(self):
        if self.code not in CODES:
            raise ValueError(f"unknown code {self.code!r}")
        if self.ancilla_mode not in ANCILLA_MODES:
            raise ValueError(f"unknown ancilla mode {self.ancilla_mode!r}")
        if self.ancilla_mode == "four" and self.code != "seven":
            raise ValueError("the four-qubit ancilla is only available for the seven-qubit code")
        if not 0.0 <= self.p <= 1.0 or self.sigma < 0.0:
            raise ValueError("need 0 <= p <= 1 and sigma >= 0")
        if self.n_gates < 0 or self.n_gates % 2:
            raise ValueError("n_gates must be a non-negative even number")
        if self.sample_stride <= 0 or self.sample_stride % 2:
            raise ValueError("sample_stride must be a positive even number")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.qec_period is not None and self.qec_period < 1:
            raise ValueError("qec_period must be a positive integer or None")
        if self.code == "physical" and self.qec_period is not None:
            raise ValueError("the physical baseline has no error correction")
        if self.code == "nine":
            if self.qec_period not in (None, 1):
                raise ValueError("the nine-qubit code corrects at every gate")
            object.__setattr__(self, "qec_period", 1)

    def label(self) -> str:
        if self.code == "physical":
            return f"physical p={self.p:g} sigma={self.sigma:g}"
        y = "never" if self.qec_period is None else self.qec_period
        return f"{self.code}/{self.ancilla_mode} p={self.p:g} sigma={self.sigma:g} y={y}"


@dataclass
class FidelitySeries:
    gate_index: np.ndarray
    mean_fidelity: np.ndarray
    std_error: np.ndarray
    config: ExperimentConfig
    metadata: dict = field(default_factory=dict)

    @property
    def final(self) -> float:
        return float(self.mean_fidelity[-1])

    @property
    def final_se(self) -> float:
        return float(self.std_error[-1])

    def at(self, gate: int) -> tuple[float, float]:
        k = int(np.searchsorted(self.gate_index, gate))
        if k >= len(self.gate_index) or self.gate_index[k] != gate:
            raise KeyError(f"gate {gate} was not sampled")
        return float(self.mean_fidelity[k]), float(self.std_error[k])


# ---------------------------------------------------------------------------
# circuits of one main step
# ---------------------------------------------------------------------------


def physical_qubit() -> CodeSpec:
    empty = Circuit(1)
    spec = CodeSpec("physical", "one_qubit", 1, 0, 0, (), empty, Circuit(1))
    spec.logical_zero = new_state(1)
    spec.logical_one = StateVector(1, np.array([0, 1], dtype=np.complex128))
    return spec


def code_for(config: ExperimentConfig) -> CodeSpec:
    if config.code == "physical":
        return physical_qubit()
    return build_code(config.code, config.ancilla_mode)


def main_gate_steps(spec: CodeSpec) -> list:
    """One logical Hadamard on the compact (block-only) register."""
    n = spec.n_block
    if spec.name in ("physical", "seven"):
        c = Circuit(n)
        c.append_layer([H(q) for q in range(n)])
        return [c]
    # five and nine: decode, H on the data qubit while the freed qubits are reset, encode
    middle = Circuit(n)
    middle.append_layer([H(spec.data_qubit)], resets=[q for q in range(n) if q != spec.data_qubit])
    first = spec.recovery if spec.name == "nine" else spec.decoder
    return [first, middle, spec.encoder]


def hadamard_layers(spec: CodeSpec, count: int, n_qubits: int | None = None) -> Circuit:
    c = Circuit(spec.n_block if n_qubits is None else n_qubits)
    for _ in range(count):
        c.append_layer([H(q) for q in range(spec.n_block)])
    return c


def two_hadamard_unit(spec: CodeSpec) -> list:
    return [hadamard_layers(spec, 2)]


def qec_unit(spec: CodeSpec, y: int) -> list:
    """y logical H layers, a QEC round, y more layers, a second QEC round."""
    if spec.syndrome is None:
        raise ValueError("this code has no standalone QEC round")
    layers = hadamard_layers(spec, y, spec.n_total)
    return [layers, spec.syndrome, layers, spec.syndrome]


# ---------------------------------------------------------------------------
# compiled trial loop
# ---------------------------------------------------------------------------

_NO_INJ = np.array([-1, 0, 0], dtype=np.int64)
_NO_FORCE = np.zeros(0, dtype=np.int64)


@njit(cache=True)
def _compact(amps, n_block, n_total):
    """Move the block amplitudes to the ancilla-|0> slice.

    Only valid when the ancillas sit in a computational basis state, which
    holds after every QEC round (the last ancilla operations are measurements
    and resets).
    """
    size = 1 << n_block
    for a in range(1, 1 << (n_total - n_block)):
        off = a * size
        w = 0.0
        for i in range(size):
            w += amps[off + i].real ** 2 + amps[off + i].imag ** 2
        if w > 0.5:
            for i in range(size):
                amps[i] = amps[off + i]
                amps[off + i] = 0.0
            return


@njit(cache=True)
def _prob_zero(amps, q):
    mask = 1 << q
    acc = 0.0
    for i in range(amps.shape[0]):
        if (i & mask) == 0:
            acc += amps[i].real ** 2 + amps[i].imag ** 2
    return acc


@njit(cache=True)
def _trial(amps, scratch, n_block, n_total, prep, step, qec, dec, n_gates, period, stride,
           p, sigma, rng, creg, data_qubit, out):
    amps[:] = 0.0
    amps[0] = 1.0
    block = amps[: 1 << n_block]
    status, _ = engine.run_tape(block, n_block, prep[0], prep[1], prep[2], prep[3], p, sigma,
                                rng, creg, _NO_INJ, _NO_FORCE)
    if status != 0:
        return status
    k = 0
    for g in range(1, n_gates + 1):
        status, _ = engine.run_tape(block, n_block, step[0], step[1], step[2], step[3], p, sigma,
                                    rng, creg, _NO_INJ, _NO_FORCE)
        if status != 0:
            return status
        if period > 0 and g % period == 0:
            status, _ = engine.run_tape(amps, n_total, qec[0], qec[1], qec[2], qec[3], p, sigma,
                                        rng, creg, _NO_INJ, _NO_FORCE)
            if status != 0:
                return status
            _compact(amps, n_block, n_total)
        if g % stride == 0:
            scratch[:] = block
            engine.run_tape(scratch, n_block, dec[0], dec[1], dec[2], dec[3], 0.0, 0.0,
                            rng, creg, _NO_INJ, _NO_FORCE)
            out[k] = _prob_zero(scratch, data_qubit)
            k += 1
    return 0


class _TrialRunner:
    def __init__(self, config: ExperimentConfig):
        self.config = config
        spec = code_for(config)
        self.spec = spec
        self.prep = compile_steps([spec.encoder]).as_args()
        self.step = compile_steps(main_gate_steps(spec)).as_args()
        # a period as long as the whole run means no correction at all
        use_qec = (spec.syndrome is not None and config.qec_period is not None
                   and config.qec_period < config.n_gates)
        qec_tape = compile_steps([spec.syndrome] if use_qec else [])
        self.qec = qec_tape.as_args()
        self.period = config.qec_period if use_qec else 0
        self.dec = compile_steps([spec.decoder]).as_args()
        self.n_total = spec.n_total if use_qec else spec.n_block
        self.creg = np.zeros(max(qec_tape.n_slots, 1), dtype=np.int64)
        self.n_samples = config.n_gates // config.sample_stride

    def run(self, start: int, stop: int) -> np.ndarray:
        c = self.config
        out = np.zeros((stop - start, self.n_samples))
        amps = np.zeros(1 << self.n_total, dtype=np.complex128)
        scratch = np.zeros(1 << self.spec.n_block, dtype=np.complex128)
        for row, trial in enumerate(range(start, stop)):
            rng = derive_stream(c.master_seed, trial)
            status = _trial(amps, scratch, self.spec.n_block, self.n_total, self.prep, self.step,
                            self.qec, self.dec, c.n_gates, self.period, c.sample_stride,
                            c.p, c.sigma, rng, self.creg, self.spec.data_qubit, out[row])
            raise_for_status(status)
        return out


def _run_chunk(args):
    config, start, stop = args
    rows = _TrialRunner(config).run(start, stop)
    mean = rows.mean(axis=0)
    m2 = ((rows - mean) ** 2).sum(axis=0)
    return stop - start, mean, m2


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    n = int(raw)
    return max(1, n)


def _reduce(parts):
    """Chan et al. pairwise-free sequential merge, in chunk order."""
    count, mean, m2 = 0, None, None
    for n, mu, sq in parts:
        if mean is None:
            count, mean, m2 = n, mu.copy(), sq.copy()
            continue
        delta = mu - mean
        total = count + n
        mean = mean + delta * (n / total)
        m2 = m2 + sq + delta**2 * (count * n / total)
        count = total
    return count, mean, m2


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> FidelitySeries:
    workers = worker_count() if workers is None else max(1, int(workers))
    chunks = [
        (config, s, min(s + CHUNK_TRIALS, config.trials))
        for s in range(0, config.trials, CHUNK_TRIALS)
    ]
    log.info("running %s with %d trials on %d worker(s)", config.label(), config.trials, workers)
    if workers == 1 or len(chunks) == 1:
        parts = [_run_chunk(c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, chunks))
    n, mean, m2 = _reduce(parts)
    if n > 1:
        se = np.sqrt(np.maximum(m2, 0.0) / (n - 1)) / np.sqrt(n)
    else:
        se = np.zeros_like(mean)
    gates = np.arange(1, config.n_gates // config.sample_stride + 1) * config.sample_stride
    return FidelitySeries(gates, np.clip(mean, 0.0, 1.0), se, config, {"trials": n})


def run_physical_baseline(config: ExperimentConfig, workers: int | None = None) -> FidelitySeries:
    if config.code != "physical":
        raise ValueError("run_physical_baseline needs code='physical'")
    return run_experiment(config, workers)


def run_encoded_experiment(config: ExperimentConfig, workers: int | None = None) -> FidelitySeries:
    if config.code == "physical":
        raise ValueError("run_encoded_experiment needs an encoded code")
    return run_experiment(config, workers)


# ---------------------------------------------------------------------------
# single-fault oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DegradingCount:
    count: int
    locations: int
    slots: int
    width: int
    faults: tuple[tuple[int, int, str], ...] = ()

    @property
    def candidates(self) -> int:
        return 3 * self.locations


def count_degrading_errors(spec: CodeSpec, unit, reference: StateVector | None = None,
                           seed: int = 0) -> DegradingCount:
    """Inject every single Pauli at every (slot, qubit) and count the harmful ones.

    The unit starts from ideal |0_L> (ancillas in |0>). A fault is degrading
    when the ideally decoded data qubit ends with fidelity below 1 - 1e-9
    against ``reference`` (|0> by default). Measurement randomness comes from
    a fixed seed, identical for every injection.
    """
    if isinstance(unit, (Circuit, Procedure)):
        unit = [unit]
    tape = compile_steps(unit)
    width = max([spec.n_block] + [s.n_qubits for s in unit if hasattr(s, "n_qubits")])
    start = encoded_input(spec, 1.0, 0.0, width)
    compile_and_run(spec.encoder, start)
    probe = start.copy()
    from .circuit import run_compiled

    status, _, slots = run_compiled(tape, probe, rng=np.random.default_rng(seed))
    raise_for_status(status)
    faults = []
    for slot in range(slots):
        for q in range(width):
            for pauli, name in ((engine.PAULI_X, "X"), (engine.PAULI_Z, "Z"), (engine.PAULI_Y, "Y")):
                st = start.copy()
                status, _, _ = run_compiled(tape, st, rng=np.random.default_rng(seed),
                                            injection=(slot, q, pauli))
                raise_for_status(status)
                if decoded_fidelity(spec, st, reference) < 1.0 - 1e-9:
                    faults.append((slot, q, name))
    return DegradingCount(len(faults), slots * width, slots, width, tuple(faults))


def config_dict(config: ExperimentConfig) -> dict:
    return asdict(config)


def with_overrides(config: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(config, **kw)
