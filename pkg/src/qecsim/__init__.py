"""State-vector simulation of noisy quantum error-correcting codes."""

from .analysis import ApproxParams, encoded_noqec_fidelity, physical_fidelity, qec_period_fidelity
from .circuit import Circuit, GateSpec, Layer, Procedure
from .codes import CodeSpec, build_code
from .experiment import ExperimentConfig, FidelitySeries, count_degrading_errors, run_experiment
from .noise import NoiseConfig, derive_stream
from .statevector import StateVector, new_state

__all__ = [
    "ApproxParams", "Circuit", "CodeSpec", "ExperimentConfig", "FidelitySeries", "GateSpec",
    "Layer", "NoiseConfig", "Procedure", "StateVector", "build_code", "count_degrading_errors",
    "derive_stream", "encoded_noqec_fidelity", "new_state", "physical_fidelity",
    "qec_period_fidelity", "run_experiment",
]
