"""Squared-distribution error mitigation with virtual-distillation oracles,
noisy circuit simulators and moments-based ground-state estimation."""

__version__ = "0.1.0"

from .circuits import Circuit, Gate, neel_circuit
from .frame import PauliNoiseSpec, frame_sample, spin_correlation
from .mitigation import (
    CorrectedValue,
    FcqemConfig,
    fcqem_expectation,
    fcqem_joint,
    raw_expectation,
    square_normalize,
    truncated_vd,
    vd_exact,
)
from .models import TfimSpec, build_tfim
from .pauli import PauliString, PauliSum, group_tpb, hamiltonian_powers, outcome_eigenvalue
from .qcm import (
    Cumulants,
    Moments,
    QcmEstimate,
    cumulants,
    moments_from_measurements,
    qcm_energy,
    qcm_with_fcqem,
)
from .simulator import (
    NoiseModel,
    apply_global_depolarizing,
    exact_ground_state,
    measure_probs,
    measure_tpbs,
    run_circuit,
    run_noisy,
    sample,
)
from .states import DensityMatrix, MeasurementSet, ProbDist, StateVector

__all__ = [
    "__version__",
    "Circuit",
    "CorrectedValue",
    "Cumulants",
    "DensityMatrix",
    "FcqemConfig",
    "Gate",
    "MeasurementSet",
    "Moments",
    "NoiseModel",
    "PauliNoiseSpec",
    "PauliString",
    "PauliSum",
    "ProbDist",
    "QcmEstimate",
    "StateVector",
    "TfimSpec",
    "apply_global_depolarizing",
    "build_tfim",
    "cumulants",
    "exact_ground_state",
    "fcqem_expectation",
    "fcqem_joint",
    "frame_sample",
    "group_tpb",
    "hamiltonian_powers",
    "measure_probs",
    "measure_tpbs",
    "moments_from_measurements",
    "neel_circuit",
    "outcome_eigenvalue",
    "qcm_energy",
    "qcm_with_fcqem",
    "raw_expectation",
    "run_circuit",
    "run_noisy",
    "sample",
    "spin_correlation",
    "square_normalize",
    "truncated_vd",
    "vd_exact",
]
