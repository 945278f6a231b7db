"""Request/response models for the HTTP service.

File-based inputs (Hamiltonians, trial circuits, measurement records) are
passed inline as text/JSON so the service stays filesystem-free.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator


class TfimParams(BaseModel):
    n: int = Field(ge=2, le=4096)
    j: float = 1.0
    h: float = 0.0
    periodic: bool = False


class RotateY(BaseModel):
    qubit: int = Field(ge=0)
    angle: Optional[float] = None


class NoiseParams(BaseModel):
    global_depolarizing: float = Field(0.0, ge=0.0, le=1.0)
    depol_1q: float = Field(0.0, ge=0.0, le=1.0)
    depol_2q: float = Field(0.0, ge=0.0, le=1.0)
    readout_flip: float = Field(0.0, ge=0.0, le=1.0)
    pauli_x: float = Field(0.0, ge=0.0, le=1.0)
    pauli_y: float = Field(0.0, ge=0.0, le=1.0)
    pauli_z: float = Field(0.0, ge=0.0, le=1.0)


class CorrectionParams(BaseModel):
    mode: Literal["per-basis", "global-z"] = "per-basis"
    preferred_basis: Optional[str] = None
    copy_mode: Literal["self-square", "two-copy"] = "self-square"


class SweepSpec(BaseModel):
    kind: Literal["h", "theta", "depol"]
    values: list[float]


class _HamiltonianSource(BaseModel):
    tfim: Optional[TfimParams] = None
    hamiltonian_text: Optional[str] = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.tfim is None) == (self.hamiltonian_text is None):
            raise ValueError("exactly one of 'tfim' and 'hamiltonian_text' must be set")
        return self


class SweepRequest(_HamiltonianSource):
    sweep: SweepSpec
    trial_kind: Literal["neel", "circuit"] = "neel"
    trial_circuit_text: Optional[str] = None
    rotate_y: Optional[RotateY] = None
    noise: NoiseParams = NoiseParams()
    shots: Optional[int] = Field(10000, ge=1)
    seed: int = 0
    correction: CorrectionParams = CorrectionParams()
    workers: Optional[int] = Field(None, ge=1)


class ScaleRequest(BaseModel):
    n_list: list[int]
    rates: list[float]
    shots: int = Field(100_000, ge=1)
    seed: int = 0
    bias: float = Field(10.0, gt=0.0)
    trial_circuit_text: Optional[str] = None
    workers: Optional[int] = Field(None, ge=1)


class DumpDistRequest(BaseModel):
    n: Optional[int] = Field(None, ge=1)
    trial_kind: Literal["neel", "circuit"] = "neel"
    trial_circuit_text: Optional[str] = None
    rotate_y: Optional[RotateY] = None
    noise: NoiseParams = NoiseParams()
    shots: Optional[int] = Field(None, ge=1)
    seed: int = 0
    basis: Optional[str] = None
    threshold: float = Field(0.005, ge=0.0)
    measurements: Optional[dict] = None

    @model_validator(mode="after")
    def _one_state_source(self):
        if (self.n is None) == (self.measurements is None):
            raise ValueError("exactly one of 'n' (simulated trial) and 'measurements' must be set")
        return self


class MitigateRequest(_HamiltonianSource):
    measurements: dict
    measurements2: Optional[dict] = None
    correction: CorrectionParams = CorrectionParams()


class GroundStateRequest(_HamiltonianSource):
    pass


class HealthResponse(BaseModel):
    status: str
    version: str


class GroundStateResponse(BaseModel):
    num_qubits: int
    energy: float
    metadata: dict
