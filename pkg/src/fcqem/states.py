"""Value types for quantum states and measurement data.

Outcome bitstrings put qubit 0 leftmost, so ``int(outcome, 2)`` is the
matching index into dense probability/amplitude vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from .errors import DimensionMismatchError, MissingMeasurementError
from .pauli import PauliString, compatible_with_tpb, validate_tpb

NORM_TOL = 1e-10
PROB_SUM_TOL = 1e-9


def outcome_string(index: int, num_qubits: int) -> str:
    return format(index, f"0{num_qubits}b")


@dataclass
class StateVector:
    """Dense pure state; unit 2-norm within 1e-10."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.amplitudes.shape[0] != 1 << self.num_qubits:
            raise ValueError("amplitude count is not 2^num_qubits")
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm} deviates from 1 beyond {NORM_TOL}")

    @classmethod
    def zero_state(cls, num_qubits: int) -> "StateVector":
        amp = np.zeros(1 << num_qubits, dtype=complex)
        amp[0] = 1.0
        return cls(num_qubits, amp)

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.num_qubits, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass
class DensityMatrix:
    """Dense mixed state; Hermitian and unit trace within 1e-10."""

    num_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        dim = 1 << self.num_qubits
        if self.matrix.shape != (dim, dim):
            raise ValueError("matrix shape is not 2^n x 2^n")
        if abs(np.trace(self.matrix) - 1.0) > NORM_TOL:
            raise ValueError("trace deviates from 1 beyond tolerance")
        if np.abs(self.matrix - self.matrix.conj().T).max() > NORM_TOL:
            raise ValueError("matrix is not Hermitian within tolerance")

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


class ProbDist:
    """An outcome distribution for one measurement basis.

    Exact distributions (``shots is None``) hold probabilities, dense
    (vector over all 2^n outcomes) or sparse (map outcome -> probability).
    Empirical distributions are built from integer counts and always
    sparse; probabilities are counts/shots.
    """

    __slots__ = ("num_qubits", "basis", "shots", "_dense", "_sparse")

    def __init__(
        self,
        num_qubits: int,
        basis: str,
        *,
        dense: np.ndarray | None = None,
        sparse: dict[str, float] | None = None,
        shots: int | None = None,
    ):
        validate_tpb(basis, num_qubits)
        if (dense is None) == (sparse is None):
            raise ValueError("exactly one of dense/sparse must be given")
        self.num_qubits = num_qubits
        self.basis = basis
        self.shots = shots
        self._sparse = sparse
        if dense is not None:
            dense = np.asarray(dense, dtype=float)
            if dense.shape != (1 << num_qubits,):
                raise ValueError("dense vector length is not 2^num_qubits")
            if dense.min() < -PROB_SUM_TOL:
                raise ValueError("negative probability entry")
            dense = np.clip(dense, 0.0, None)
            self._dense = dense
        else:
            self._dense = None
            for o, p in sparse.items():
                if len(o) != num_qubits or set(o) - {"0", "1"}:
                    raise ValueError(f"bad outcome key {o!r}")
                if p < 0:
                    raise ValueError(f"negative probability for outcome {o!r}")
        total = self.total()
        if shots is None and abs(total - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"exact distribution sums to {total}, not 1")

    # -- constructors -------------------------------------------------

    @classmethod
    def exact_dense(cls, num_qubits: int, basis: str, probs: np.ndarray) -> "ProbDist":
        return cls(num_qubits, basis, dense=probs)

    @classmethod
    def exact_sparse(cls, num_qubits: int, basis: str, probs: Mapping[str, float]) -> "ProbDist":
        return cls(num_qubits, basis, sparse=dict(probs))

    @classmethod
    def from_counts(
        cls, num_qubits: int, basis: str, counts: Mapping[str, int], shots: int
    ) -> "ProbDist":
        if shots < 1:
            raise ValueError("shots must be positive")
        tot = 0
        probs: dict[str, float] = {}
        for o, c in counts.items():
            if c < 0 or c != int(c):
                raise ValueError(f"count for outcome {o!r} is not a non-negative integer")
            if c == 0:
                continue
            tot += int(c)
            probs[o] = c / shots
        if tot != shots:
            raise ValueError(f"counts sum to {tot}, expected shots={shots}")
        return cls(num_qubits, basis, sparse=probs, shots=shots)

    # -- accessors ----------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.shots is None

    def total(self) -> float:
        if self._dense is not None:
            return float(self._dense.sum())
        return float(sum(self._sparse.values()))

    def items(self) -> Iterator[tuple[str, float]]:
        """(outcome, probability) pairs; dense form yields nonzero entries."""
        if self._dense is not None:
            for idx in np.nonzero(self._dense)[0]:
                yield outcome_string(int(idx), self.num_qubits), float(self._dense[idx])
        else:
            yield from self._sparse.items()

    def dense(self) -> np.ndarray:
        """Probability vector over all 2^n outcomes (small n only)."""
        if self._dense is not None:
            return self._dense
        if self.num_qubits > 24:
            raise ValueError("distribution too wide to densify")
        out = np.zeros(1 << self.num_qubits)
        for o, p in self._sparse.items():
            out[int(o, 2)] = p
        return out

    def counts(self) -> dict[str, int]:
        if self.shots is None:
            raise ValueError("exact distribution has no counts")
        return {o: round(p * self.shots) for o, p in self.items()}

    def probability(self, outcome: str) -> float:
        if self._dense is not None:
            return float(self._dense[int(outcome, 2)])
        return self._sparse.get(outcome, 0.0)

    def support_size(self) -> int:
        if self._dense is not None:
            return int(np.count_nonzero(self._dense))
        return len(self._sparse)

    def __repr__(self):
        kind = "exact" if self.is_exact else f"{self.shots} shots"
        return f"ProbDist(basis={self.basis}, {kind}, support={self.support_size()})"


def all_z(num_qubits: int) -> str:
    return "Z" * num_qubits


class MeasurementSet:
    """Per-basis outcome distributions plus provenance metadata."""

    def __init__(self, num_qubits: int, metadata: dict | None = None):
        self.num_qubits = num_qubits
        self.dists: dict[str, ProbDist] = {}
        self.metadata = dict(metadata or {})

    def add(self, dist: ProbDist) -> None:
        if dist.num_qubits != self.num_qubits:
            raise DimensionMismatchError("distribution qubit count mismatch")
        self.dists[dist.basis] = dist

    def bases(self) -> list[str]:
        return sorted(self.dists)

    def get(self, basis: str) -> ProbDist | None:
        return self.dists.get(basis)

    def require(self, basis: str) -> ProbDist:
        d = self.dists.get(basis)
        if d is None:
            raise MissingMeasurementError([basis])
        return d

    def host_basis(self, p: PauliString, preferred: str | None = None) -> str | None:
        """First stored basis compatible with the string (preferred basis
        checked first, then sorted order)."""
        order = []
        if preferred is not None and preferred in self.dists:
            order.append(preferred)
        order.extend(b for b in self.bases() if b not in order)
        for b in order:
            if compatible_with_tpb(p, b):
                return b
        return None

    def __len__(self):
        return len(self.dists)

    def __repr__(self):
        return f"MeasurementSet(n={self.num_qubits}, bases={self.bases()})"
