"""Importance Clifford sampling and optimised error-mitigation formulas.

Modules:

- ``pauli``: Pauli strings, the single-qubit Clifford group and two-qubit gates.
- ``circuits``: circuit frames, bindings and statevector ideal values.
- ``stabilizer``: Heisenberg-picture propagation and exact Pauli-noise expectations.
- ``noise``: channels and noise models.
- ``density``: batched density-matrix simulation.
- ``ics``: error-sensitive circuit sampling and phenomenological estimates.
- ``mitigation``: mitigation formulas, training and the covariance bound.
- ``harness``: config-driven experiments, CSV output and scaling fits.
"""

__version__ = "0.1.0"

from .circuits import (  # noqa: E402
    Circuit,
    CircuitFrame,
    FrameFamily,
    FrameKind,
    Slot,
    bind_near_one_fc,
    bind_random_clifford,
    bind_random_unitary,
    build_frame,
    frame_from_gates,
    ideal_value,
    ideal_values,
)
from .density import DensityState, evolve_batch, expectation, expectations, purity_pair, run  # noqa: E402
from .ics import (  # noqa: E402
    ICSSamples,
    PhenomenologicalEstimate,
    es_circuit,
    estimate_phenomenological,
    exact_eta,
    mse,
    sample_nonuniform,
    sample_nonuniform_indices,
    sample_uniform,
    sample_uniform_indices,
)
from .mitigation import (  # noqa: E402
    CovarianceEstimate,
    MitigationFormula,
    extrapolate_linear,
    optimal_lambda_from_rates,
    pec_mitigate,
    pemi,
    richardson_coefficients,
    theorem1_bound,
    train_lambda,
    train_lambda_single,
    virtual_distillation,
    vd_pemi,
)
from .noise import Channel, CompositeParams, NoiseKind, NoiseModel  # noqa: E402
from .pauli import CNOT, CZ, PauliString, SingleQubitClifford  # noqa: E402
from .stabilizer import (  # noqa: E402
    build_channels,
    circuit_weight,
    effective_observable,
    ideal_expectation,
    noisy_expectation,
    noisy_expectations,
    pauli_noise_expectation,
    propagate_error,
)

__all__ = [
    "CNOT",
    "CZ",
    "Channel",
    "Circuit",
    "CircuitFrame",
    "CompositeParams",
    "CovarianceEstimate",
    "DensityState",
    "FrameFamily",
    "FrameKind",
    "ICSSamples",
    "MitigationFormula",
    "NoiseKind",
    "NoiseModel",
    "PauliString",
    "PhenomenologicalEstimate",
    "SingleQubitClifford",
    "Slot",
    "bind_near_one_fc",
    "bind_random_clifford",
    "bind_random_unitary",
    "build_channels",
    "build_frame",
    "circuit_weight",
    "effective_observable",
    "es_circuit",
    "estimate_phenomenological",
    "evolve_batch",
    "exact_eta",
    "expectation",
    "expectations",
    "extrapolate_linear",
    "frame_from_gates",
    "ideal_expectation",
    "ideal_value",
    "ideal_values",
    "mse",
    "noisy_expectation",
    "noisy_expectations",
    "optimal_lambda_from_rates",
    "pauli_noise_expectation",
    "pec_mitigate",
    "pemi",
    "propagate_error",
    "purity_pair",
    "richardson_coefficients",
    "run",
    "sample_nonuniform",
    "sample_nonuniform_indices",
    "sample_uniform",
    "sample_uniform_indices",
    "theorem1_bound",
    "train_lambda",
    "train_lambda_single",
    "vd_pemi",
    "virtual_distillation",
]
