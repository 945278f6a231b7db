"""Dense statevector / density-matrix simulation with configurable noise.

Noise conventions:

* per-gate local depolarizing: after each two-qubit gate, a uniform Pauli
  twirl over its support at rate ``depol_2q`` (15 non-identity two-qubit
  Paulis at rate/15 each); after each rotation gate (RX/RY/RZ), the
  single-qubit analogue at rate ``depol_1q``.
* per-qubit Pauli channel (p_x, p_y, p_z): applied on a gate's support
  after the gate, plus one pre-measurement layer on every qubit, matching
  the frame simulator's insertion points.
* global depolarizing and readout flips act at the end; readout is folded
  into measurement probabilities, never into the density matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .circuits import ROTATION_GATES, Circuit, Gate, gate_matrix
from .errors import CapacityError, InternalConsistencyError
from .pauli import PauliSum
from .states import DensityMatrix, MeasurementSet, ProbDist, StateVector, validate_tpb

DENSE_STATEVECTOR_MAX = 20
DENSE_DENSITY_MAX = 12
GROUND_STATE_MAX = 14

_H = gate_matrix(Gate("H", (0,)))
_SDG = np.diag([1, -1j]).astype(complex)
# Maps a basis letter to the rotation applied before a Z-basis readout.
_BASIS_ROT = {"X": _H, "Y": _H @ _SDG, "Z": None}


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing / Pauli-channel / readout noise parameters."""

    global_depolarizing: float = 0.0
    depol_1q: float = 0.0
    depol_2q: float = 0.0
    readout_flip: float = 0.0
    pauli_x: float = 0.0
    pauli_y: float = 0.0
    pauli_z: float = 0.0

    def __post_init__(self):
        for name in ("global_depolarizing", "depol_1q", "depol_2q", "readout_flip",
                     "pauli_x", "pauli_y", "pauli_z"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.pauli_x + self.pauli_y + self.pauli_z > 1.0 + 1e-12:
            raise ValueError("pauli channel probabilities sum beyond 1")

    @property
    def is_trivial(self) -> bool:
        return all(
            getattr(self, n) == 0.0
            for n in ("global_depolarizing", "depol_1q", "depol_2q", "readout_flip",
                      "pauli_x", "pauli_y", "pauli_z")
        )

    @property
    def has_channel_noise(self) -> bool:
        """True if simulation needs a density matrix (anything but readout)."""
        return any(
            getattr(self, n) > 0.0
            for n in ("global_depolarizing", "depol_1q", "depol_2q",
                      "pauli_x", "pauli_y", "pauli_z")
        )

    def describe(self) -> dict[str, float]:
        return {
            "global_depolarizing": self.global_depolarizing,
            "depol_1q": self.depol_1q,
            "depol_2q": self.depol_2q,
            "readout_flip": self.readout_flip,
            "pauli_x": self.pauli_x,
            "pauli_y": self.pauli_y,
            "pauli_z": self.pauli_z,
        }


# ---------------------------------------------------------------------------
# Pure-state simulation
# ---------------------------------------------------------------------------


def _apply_unitary_state(psi: np.ndarray, u: np.ndarray, qubits: tuple[int, ...]) -> np.ndarray:
    k = len(qubits)
    u_t = u.reshape((2,) * (2 * k))
    psi = np.tensordot(u_t, psi, axes=(tuple(range(k, 2 * k)), qubits))
    return np.moveaxis(psi, tuple(range(k)), qubits)


def run_circuit(c: Circuit) -> StateVector:
    """Exact amplitudes of the circuit applied to |0...0>."""
    if c.num_qubits > DENSE_STATEVECTOR_MAX:
        raise CapacityError(
            f"{c.num_qubits} qubits exceeds statevector limit {DENSE_STATEVECTOR_MAX}"
        )
    psi = np.zeros((2,) * c.num_qubits, dtype=complex)
    psi[(0,) * c.num_qubits] = 1.0
    for g in c.gates:
        psi = _apply_unitary_state(psi, gate_matrix(g), g.qubits)
    return StateVector(c.num_qubits, psi.reshape(-1))


# ---------------------------------------------------------------------------
# Density-matrix simulation
# ---------------------------------------------------------------------------


def _apply_unitary_dm(rho: np.ndarray, u: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    k = len(qubits)
    u_t = u.reshape((2,) * (2 * k))
    rho = np.tensordot(u_t, rho, axes=(tuple(range(k, 2 * k)), qubits))
    rho = np.moveaxis(rho, tuple(range(k)), qubits)
    col_axes = tuple(n + q for q in qubits)
    rho = np.tensordot(u_t.conj(), rho, axes=(tuple(range(k, 2 * k)), col_axes))
    return np.moveaxis(rho, tuple(range(k)), col_axes)


def _conj_pauli_dm(rho: np.ndarray, qubit: int, letter: str, n: int) -> np.ndarray:
    """P rho P for a single-qubit Pauli on the tensor-reshaped matrix."""
    if letter in ("Z", "Y"):
        sign = np.array([1.0, -1.0])
        shape_r = [1] * (2 * n)
        shape_r[qubit] = 2
        rho = rho * sign.reshape(shape_r)
        shape_c = [1] * (2 * n)
        shape_c[n + qubit] = 2
        rho = rho * sign.reshape(shape_c)
    if letter in ("X", "Y"):
        rho = np.flip(np.flip(rho, axis=qubit), axis=n + qubit)
    return rho


def _depolarize_support(rho: np.ndarray, qubits: tuple[int, ...], rate: float, n: int) -> np.ndarray:
    """Uniform Pauli twirl over the support: rate/(4^k - 1) per non-identity
    Pauli, realized through the partial-trace identity
    sum_{all P} P rho P = 2^k * I_q (x) tr_q(rho)."""
    if rate == 0.0:
        return rho
    k = len(qubits)
    denom = float(4**k - 1)
    keep = 1.0 - rate * (4**k) / denom
    mix = rate * (2**k) / denom
    traced = rho
    for done, q in enumerate(sorted(qubits, reverse=True)):
        traced = np.trace(traced, axis1=q, axis2=n + q - done)
    # embed I_q (x) traced back into the full tensor
    eye = np.zeros((2,) * (2 * k))
    idx = np.arange(2**k)
    eye.reshape(2**k, 2**k)[idx, idx] = 1.0
    full = np.tensordot(eye, traced, axes=0)
    # full axes: (r_q1..r_qk, c_q1..c_qk, remaining rows..., remaining cols...)
    qubits_sorted = sorted(qubits, reverse=True)
    rest_rows = [q for q in range(n) if q not in qubits]
    rest_cols = [n + q for q in range(n) if q not in qubits]
    dest = (
        qubits_sorted
        + [n + q for q in qubits_sorted]
        + rest_rows
        + rest_cols
    )
    full = np.moveaxis(full, list(range(full.ndim)), dest)
    return keep * rho + mix * full


def _pauli_channel(rho: np.ndarray, qubits, px: float, py: float, pz: float, n: int) -> np.ndarray:
    if px == py == pz == 0.0:
        return rho
    for q in qubits:
        keep = 1.0 - px - py - pz
        acc = keep * rho
        if px:
            acc = acc + px * _conj_pauli_dm(rho, q, "X", n)
        if py:
            acc = acc + py * _conj_pauli_dm(rho, q, "Y", n)
        if pz:
            acc = acc + pz * _conj_pauli_dm(rho, q, "Z", n)
        rho = acc
    return rho


def apply_global_depolarizing(rho: DensityMatrix, p: float) -> DensityMatrix:
    """rho -> (1-p) rho + p I/d."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing strength {p} outside [0, 1]")
    dim = 1 << rho.num_qubits
    mixed = (1.0 - p) * rho.matrix + p * np.eye(dim) / dim
    return DensityMatrix(rho.num_qubits, mixed)


def run_noisy(c: Circuit, nm: NoiseModel) -> DensityMatrix:
    """Density-matrix run with per-gate channels and a final global
    depolarizing step; readout noise is left to ``measure_probs``."""
    n = c.num_qubits
    if n > DENSE_DENSITY_MAX:
        raise CapacityError(f"{n} qubits exceeds density-matrix limit {DENSE_DENSITY_MAX}")
    rho = np.zeros((2,) * (2 * n), dtype=complex)
    rho[(0,) * (2 * n)] = 1.0
    for g in c.gates:
        rho = _apply_unitary_dm(rho, gate_matrix(g), g.qubits, n)
        if len(g.qubits) == 2 and nm.depol_2q:
            rho = _depolarize_support(rho, g.qubits, nm.depol_2q, n)
        elif g.name in ROTATION_GATES and nm.depol_1q:
            rho = _depolarize_support(rho, g.qubits, nm.depol_1q, n)
        rho = _pauli_channel(rho, g.qubits, nm.pauli_x, nm.pauli_y, nm.pauli_z, n)
    rho = _pauli_channel(rho, range(n), nm.pauli_x, nm.pauli_y, nm.pauli_z, n)
    dm = DensityMatrix(n, rho.reshape(1 << n, 1 << n))
    if nm.global_depolarizing:
        dm = apply_global_depolarizing(dm, nm.global_depolarizing)
    return dm


# ---------------------------------------------------------------------------
# Measurement
# ---------------------------------------------------------------------------


def _readout_flip_probs(probs: np.ndarray, n: int, flip: float) -> np.ndarray:
    if flip == 0.0:
        return probs
    m = np.array([[1.0 - flip, flip], [flip, 1.0 - flip]])
    t = probs.reshape((2,) * n)
    for q in range(n):
        t = np.tensordot(m, t, axes=(1, q))
        t = np.moveaxis(t, 0, q)
    return t.reshape(-1)


def measure_probs(
    state: StateVector | DensityMatrix,
    basis: str,
    nm: NoiseModel | None = None,
) -> ProbDist:
    """Exact outcome distribution in a tensor-product basis.

    Applies per-qubit rotations (H for X, H S-dagger for Y), takes the
    diagonal, then folds independent per-qubit readout flips.
    """
    n = state.num_qubits
    validate_tpb(basis, n)
    if isinstance(state, StateVector):
        psi = state.amplitudes.reshape((2,) * n)
        for q, letter in enumerate(basis):
            rot = _BASIS_ROT[letter]
            if rot is not None:
                psi = _apply_unitary_state(psi, rot, (q,))
        probs = np.abs(psi.reshape(-1)) ** 2
    else:
        rho = state.matrix.reshape((2,) * (2 * n))
        for q, letter in enumerate(basis):
            rot = _BASIS_ROT[letter]
            if rot is not None:
                rho = _apply_unitary_dm(rho, rot, (q,), n)
        probs = np.real(np.diagonal(rho.reshape(1 << n, 1 << n))).copy()
        if probs.min() < -1e-9:
            raise InternalConsistencyError(
                f"rotated density matrix has a negative diagonal entry {probs.min():g}"
            )
        probs = np.clip(probs, 0.0, None)
    if nm is not None and nm.readout_flip:
        probs = _readout_flip_probs(probs, n, nm.readout_flip)
    probs = probs / probs.sum()
    return ProbDist.exact_dense(n, basis, probs)


def _sample_rng(seed: int, basis: str, stream: int) -> np.random.Generator:
    """One PCG64 stream per sampling call, derived from (seed, basis, call
    index)."""
    entropy = [seed & 0xFFFFFFFFFFFFFFFF, int.from_bytes(basis.encode(), "big"), stream]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def sample(dist: ProbDist, shots: int, seed: int, stream: int = 0) -> ProbDist:
    """Empirical counts from an exact distribution; deterministic in
    (seed, basis, stream)."""
    if shots < 1:
        raise ValueError(f"shots must be positive, got {shots}")
    if not dist.is_exact:
        raise ValueError("can only sample from an exact distribution")
    rng = _sample_rng(seed, dist.basis, stream)
    if dist._dense is not None:
        p = dist._dense / dist._dense.sum()
        counts_vec = rng.multinomial(shots, p)
        counts = {
            format(i, f"0{dist.num_qubits}b"): int(c)
            for i, c in enumerate(counts_vec)
            if c
        }
    else:
        outcomes = sorted(dist._sparse)
        p = np.array([dist._sparse[o] for o in outcomes])
        p = p / p.sum()
        counts_vec = rng.multinomial(shots, p)
        counts = {o: int(c) for o, c in zip(outcomes, counts_vec) if c}
    return ProbDist.from_counts(dist.num_qubits, dist.basis, counts, shots)


def measure_tpbs(
    state: StateVector | DensityMatrix,
    bases: list[str],
    nm: NoiseModel | None = None,
    shots: int | None = None,
    seed: int = 0,
) -> MeasurementSet:
    """Measure the state in each basis, optionally with finite shots.

    Bases are processed in sorted order; the sampling stream for each is
    derived from (seed, basis, position), so results do not depend on how
    the basis list was assembled.
    """
    ms = MeasurementSet(state.num_qubits, metadata={"seed": seed, "shots": shots})
    if nm is not None:
        ms.metadata["noise"] = nm.describe()
    for i, basis in enumerate(sorted(set(bases))):
        dist = measure_probs(state, basis, nm)
        if shots is not None:
            dist = sample(dist, shots, seed, stream=i)
        ms.add(dist)
    return ms


# ---------------------------------------------------------------------------
# Exact diagonalization
# ---------------------------------------------------------------------------


def _sparse_matrix(h: PauliSum) -> scipy.sparse.csr_matrix:
    dim = 1 << h.num_qubits
    acc = scipy.sparse.csr_matrix((dim, dim), dtype=complex)
    cols = np.arange(dim)
    for p, w in h.items():
        rows = cols ^ p.x
        parity = np.zeros(dim, dtype=np.int64)
        zmask = p.z
        while zmask:
            bit = zmask & -zmask
            parity ^= (cols & bit) != 0
            zmask ^= bit
        vals = np.where(parity, -1.0, 1.0).astype(complex)
        vals *= (1j) ** ((p.x & p.z).bit_count() % 4)
        vals *= w
        acc = acc + scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(dim, dim))
    return acc


def exact_ground_state(h: PauliSum) -> tuple[float, StateVector]:
    """Smallest eigenvalue and a unit ground vector of the dense form of h."""
    n = h.num_qubits
    if n > GROUND_STATE_MAX:
        raise CapacityError(f"{n} qubits exceeds diagonalization limit {GROUND_STATE_MAX}")
    if n <= 8:
        from .pauli import sum_matrix

        mat = sum_matrix(h)
        vals, vecs = np.linalg.eigh(mat)
        vec = vecs[:, 0]
    else:
        mat = _sparse_matrix(h)
        vals, vecs = scipy.sparse.linalg.eigsh(mat, k=1, which="SA")
        vec = vecs[:, 0]
    vec = vec / np.linalg.norm(vec)
    return float(vals[0]), StateVector(n, vec)
