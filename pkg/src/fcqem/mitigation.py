"""Squared-distribution correctors and dense truncated-distillation oracles.

The corrector replaces each measured outcome probability p_i by
p_i^2 / sum_j p_j^2 before combining outcome eigenvalues, which equals the
first-order (diagonal) truncation of virtual distillation evaluated on a
fictitious second copy of the same data.  Two normalization modes exist:

* ``per-basis``: every Pauli term is normalized within its own host
  basis's squared distribution (the default).
* ``global-z``: one shared denominator, the squared computational-basis
  distribution (lambda == 1 reading of the ratio's denominator).

Sign convention of the diagonal two-copy operator D: +1 for joint
outcomes (i, j) with i <= j, -1 otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import (
    CapacityError,
    DegenerateInputError,
    DimensionMismatchError,
    MissingMeasurementError,
    PreconditionError,
)
from .pauli import (
    PauliString,
    PauliSum,
    eigenvalue_signs,
    group_tpb,
    outcome_eigenvalue,
    string_matrix,
    sum_matrix,
)
from .simulator import DENSE_DENSITY_MAX
from .states import DensityMatrix, MeasurementSet, ProbDist, all_z

# Denominators at or below this fraction of (sum p)^2 count as degenerate.
ZERO_DEN_REL_TOL = 1e-14

PER_BASIS = "per-basis"
GLOBAL_Z = "global-z"
SELF_SQUARE = "self-square"
TWO_COPY = "two-copy"


@dataclass(frozen=True)
class FcqemConfig:
    mode: str = PER_BASIS
    preferred_basis: str | None = None  # None -> all-Z
    copy_mode: str = SELF_SQUARE

    def __post_init__(self):
        if self.mode not in (PER_BASIS, GLOBAL_Z):
            raise ValueError(f"unknown normalization mode {self.mode!r}")
        if self.copy_mode not in (SELF_SQUARE, TWO_COPY):
            raise ValueError(f"unknown copy mode {self.copy_mode!r}")

    def preferred(self, num_qubits: int) -> str:
        return self.preferred_basis or all_z(num_qubits)


@dataclass(frozen=True)
class CorrectedValue:
    """A corrected expectation with its ratio parts.

    In per-basis mode each term carries its own normalization, so the
    ratio parts are reported as (value, 1).  ``out_of_range`` flags values
    beyond the operator's weight one-norm; truncation can legitimately
    produce them and they are never clipped.
    """

    value: float
    numerator: float
    denominator: float
    mode: str
    out_of_range: bool = False


# ---------------------------------------------------------------------------
# Distribution-level pieces
# ---------------------------------------------------------------------------


def square_normalize(dist: ProbDist) -> ProbDist:
    """q_i = p_i^2 / sum_j p_j^2, renormalized to sum exactly 1."""
    if dist._dense is not None:
        sq = dist._dense.astype(float) ** 2
        tot = sq.sum()
        if tot <= 0.0:
            raise DegenerateInputError("all-zero distribution cannot be squared-normalized")
        return ProbDist.exact_dense(dist.num_qubits, dist.basis, sq / tot)
    sq = {o: p * p for o, p in dist.items() if p > 0.0}
    tot = sum(sq.values())
    if tot <= 0.0:
        raise DegenerateInputError("all-zero distribution cannot be squared-normalized")
    return ProbDist.exact_sparse(
        dist.num_qubits, dist.basis, {o: v / tot for o, v in sq.items()}
    )


def _string_sums(dist: ProbDist, p: PauliString) -> tuple[float, float, float, float]:
    """(sum lambda p, sum p, sum lambda p^2, sum p^2) over the distribution."""
    if dist._dense is not None:
        vec = dist._dense
        signs = eigenvalue_signs(p)
        sq = vec * vec
        return float(signs @ vec), float(vec.sum()), float(signs @ sq), float(sq.sum())
    raw = tot = num = den = 0.0
    support = p.support
    flip = -1.0 if p.phase_exp == 2 else 1.0
    for outcome, prob in dist.items():
        lam = -flip if (int(outcome, 2) & support).bit_count() & 1 else flip
        raw += lam * prob
        tot += prob
        num += lam * prob * prob
        den += prob * prob
    return raw, tot, num, den


def string_raw_expectation(dist: ProbDist, p: PauliString) -> float:
    raw, tot, _, _ = _string_sums(dist, p)
    if tot <= 0.0:
        raise DegenerateInputError("empty distribution")
    return raw / tot


def string_squared_components(dist: ProbDist, p: PauliString) -> tuple[float, float]:
    """Numerator sum(lambda p^2) and denominator sum(p^2) for one term."""
    _, _, num, den = _string_sums(dist, p)
    return num, den


def squared_denominator(dist: ProbDist) -> float:
    if dist._dense is not None:
        return float((dist._dense**2).sum())
    return sum(p * p for _, p in dist.items())


def _check_denominator(den: float, total: float) -> None:
    if den <= ZERO_DEN_REL_TOL * total * total:
        raise DegenerateInputError(
            f"squared-distribution denominator {den:g} is degenerate"
        )


def fcqem_joint(
    p: ProbDist,
    p2: ProbDist,
    eigvals: Callable[[str], float],
) -> tuple[float, float]:
    """Numerator and denominator of the two-copy corrected expectation.

    t_i = (2 p_i p'_i + sum_{j<i}(p_i p'_j - p'_i p_j)
                      + sum_{j>i}(p'_i p_j - p_i p'_j)) / 2,
    evaluated in O(N) with prefix sums over outcomes in index order.
    Returns (sum_i lambda_i t_i, sum_i t_i); the printed overall 1/2 is
    kept, so only the ratio is convention-free.
    """
    if p.num_qubits != p2.num_qubits:
        raise DimensionMismatchError("copy sizes differ")
    if p.basis != p2.basis:
        raise ValueError(f"copies measured in different bases: {p.basis} vs {p2.basis}")
    outcomes = sorted(set(dict(p.items())) | set(dict(p2.items())), key=lambda o: int(o, 2))
    pa = np.array([p.probability(o) for o in outcomes])
    pb = np.array([p2.probability(o) for o in outcomes])
    sa, sb = pa.sum(), pb.sum()
    prefix_a = np.concatenate(([0.0], np.cumsum(pa)[:-1]))
    prefix_b = np.concatenate(([0.0], np.cumsum(pb)[:-1]))
    t = pa * pb + pa * prefix_b - pb * prefix_a + 0.5 * (pb * sa - pa * sb)
    lam = np.array([eigvals(o) for o in outcomes])
    return float(lam @ t), float(t.sum())


# ---------------------------------------------------------------------------
# Corrected operator expectations from measurement sets
# ---------------------------------------------------------------------------


def _resolve_hosts(
    ms: MeasurementSet, terms: list[tuple[PauliString, float]], preferred: str
) -> dict[PauliString, str]:
    hosts: dict[PauliString, str] = {}
    unhosted = []
    for p, _ in terms:
        b = ms.host_basis(p, preferred)
        if b is None:
            unhosted.append(p)
        else:
            hosts[p] = b
    if unhosted:
        missing = sorted(group_tpb(unhosted))
        raise MissingMeasurementError(missing)
    return hosts


def raw_expectation(ms: MeasurementSet, m: PauliSum) -> float:
    """Uncorrected weighted expectation sum_i w_i <Q_i>."""
    ident = PauliString.identity(m.num_qubits)
    total = m.weight(ident)
    terms = [(p, w) for p, w in m.items() if not p.is_identity]
    hosts = _resolve_hosts(ms, terms, all_z(m.num_qubits))
    for p, w in terms:
        total += w * string_raw_expectation(ms.dists[hosts[p]], p)
    return total


def fcqem_expectation(
    ms: MeasurementSet,
    m: PauliSum,
    cfg: FcqemConfig | None = None,
    ms2: MeasurementSet | None = None,
) -> CorrectedValue:
    """Corrected expectation of a Pauli-decomposed observable.

    Identity terms bypass correction and contribute their weight directly.
    Two-copy mode combines ``ms`` with the second measurement set ``ms2``
    through the joint-mass formula instead of squaring.
    """
    cfg = cfg or FcqemConfig()
    if cfg.copy_mode == TWO_COPY and ms2 is None:
        raise ValueError("two-copy mode needs a second measurement set")
    n = m.num_qubits
    preferred = cfg.preferred(n)
    ident = PauliString.identity(n)
    ident_weight = m.weight(ident)
    terms = [(p, w) for p, w in m.items() if not p.is_identity]
    hosts = _resolve_hosts(ms, terms, preferred)
    if cfg.copy_mode == TWO_COPY:
        for p, b in hosts.items():
            if ms2.get(b) is None:
                raise MissingMeasurementError([b])

    def components(p: PauliString, basis: str) -> tuple[float, float]:
        dist = ms.dists[basis]
        if cfg.copy_mode == TWO_COPY:
            return fcqem_joint(dist, ms2.dists[basis], lambda o: outcome_eigenvalue(p, o))
        return string_squared_components(dist, p)

    if cfg.mode == PER_BASIS:
        value = ident_weight
        for p, w in terms:
            num, den = components(p, hosts[p])
            _check_denominator(den, ms.dists[hosts[p]].total())
            value += w * num / den
        result = CorrectedValue(value, value, 1.0, PER_BASIS)
    else:
        zdist = ms.get(preferred)
        if zdist is None:
            raise MissingMeasurementError([preferred])
        if cfg.copy_mode == TWO_COPY:
            z2 = ms2.get(preferred)
            if z2 is None:
                raise MissingMeasurementError([preferred])
            _, den = fcqem_joint(zdist, z2, lambda o: 1.0)
        else:
            den = squared_denominator(zdist)
        _check_denominator(den, zdist.total())
        num = ident_weight * den
        for p, w in terms:
            term_num, _ = components(p, hosts[p])
            num += w * term_num
        result = CorrectedValue(num / den, num, den, GLOBAL_Z)
    bound = m.one_norm() + 1e-9
    if abs(result.value) > bound:
        result = CorrectedValue(
            result.value, result.numerator, result.denominator, result.mode, True
        )
    return result


# ---------------------------------------------------------------------------
# Dense oracles on the doubled space
# ---------------------------------------------------------------------------

_ROT_1Q = {
    "X": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    "Y": (np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2))
    @ np.diag([1, -1j]).astype(complex),
    "Z": np.eye(2, dtype=complex),
    "I": np.eye(2, dtype=complex),
}


def basis_rotation(letters: str) -> np.ndarray:
    """Dense per-qubit rotation V with V |b_i> = |i| for the given basis."""
    out = np.array([[1.0 + 0j]])
    for ch in letters:
        out = np.kron(out, _ROT_1Q[ch])
    return out


def _d_signs(n: int) -> np.ndarray:
    """Diagonal of D on the doubled computational basis: +1 for i <= j."""
    dim = 1 << n
    i = np.repeat(np.arange(dim), dim)
    j = np.tile(np.arange(dim), dim)
    return np.where(i <= j, 1.0, -1.0)


def _d_matrix(n: int, preferred: str | None) -> np.ndarray:
    d = np.diag(_d_signs(n)).astype(complex)
    if preferred is None or preferred == all_z(n):
        return d
    v = basis_rotation(preferred)
    w = np.kron(v, v)
    return w.conj().T @ d @ w


def _require_doubled_capacity(n: int) -> None:
    if 2 * n > DENSE_DENSITY_MAX:
        raise CapacityError(
            f"doubled space for {n} qubits exceeds the dense limit {DENSE_DENSITY_MAX}"
        )


def vd_exact(rho: DensityMatrix, m: PauliSum) -> float:
    """Full distillation value tr(M rho^2) / tr(rho^2)."""
    if rho.num_qubits != m.num_qubits:
        raise DimensionMismatchError("state and observable sizes differ")
    r2 = rho.matrix @ rho.matrix
    den = float(np.real(np.trace(r2)))
    if den < 1e-14:
        raise DegenerateInputError("tr(rho^2) is degenerate")
    num = float(np.real(np.trace(sum_matrix(m) @ r2)))
    return num / den


def truncated_vd(
    rho: DensityMatrix, m: PauliSum, preferred: str | None = None
) -> float:
    """First-order truncation tr(M2 D rho x rho) / tr(D rho x rho) with the
    symmetrized observable M2 and D diagonal in the preferred basis."""
    n = rho.num_qubits
    _require_doubled_capacity(n)
    if m.num_qubits != n:
        raise DimensionMismatchError("state and observable sizes differ")
    dim = 1 << n
    eye = np.eye(dim)
    mmat = sum_matrix(m)
    m2 = 0.5 * (np.kron(mmat, eye) + np.kron(eye, mmat))
    d = _d_matrix(n, preferred)
    rr = np.kron(rho.matrix, rho.matrix)
    den = float(np.real(np.trace(d @ rr)))
    if abs(den) < 1e-14:
        raise DegenerateInputError("tr(D rho x rho) is degenerate")
    num = float(np.real(np.trace(m2 @ d @ rr)))
    return num / den


def truncation_epsilon(
    q: PauliString, rho: DensityMatrix, preferred: str | None = None
) -> float:
    """Magnitude of the per-string commutator error between the squared-
    probability shortcut and the truncated-distillation value:
    |tr(W^dag Lambda2 [D, W] rho x rho)| with W the doubled diagonalizing
    rotation of the string (unit weight; scale by |w| externally)."""
    n = rho.num_qubits
    _require_doubled_capacity(n)
    if q.num_qubits != n:
        raise DimensionMismatchError("state and string sizes differ")
    v = basis_rotation(q.label.replace("I", "Z"))
    w = np.kron(v, v)
    lam = v @ string_matrix(q.phase_free()) @ v.conj().T
    dim = 1 << n
    eye = np.eye(dim)
    lam2 = 0.5 * (np.kron(lam, eye) + np.kron(eye, lam))
    d = _d_matrix(n, preferred)
    rr = np.kron(rho.matrix, rho.matrix)
    comm = d @ w - w @ d
    return float(abs(np.trace(w.conj().T @ lam2 @ comm @ rr)))


def derivative_check(
    rho: DensityMatrix,
    m: PauliSum,
    g: PauliSum,
    delta: float,
    preferred: str | None = None,
) -> float:
    """Central finite difference at t=0 of the truncated-distillation value
    under the doubled rotation rho'(t) = e^{iGt} (rho x rho) e^{-iGt}.

    Requires rho to be an eigenstate of m (residual below 1e-8)."""
    n = rho.num_qubits
    _require_doubled_capacity(n)
    if not 1e-5 <= delta <= 1e-2:
        raise PreconditionError(f"delta {delta} outside [1e-5, 1e-2]")
    mmat = sum_matrix(m)
    lam = float(np.real(np.trace(mmat @ rho.matrix)))
    residual = np.linalg.norm(mmat @ rho.matrix - lam * rho.matrix)
    if residual >= 1e-8:
        raise PreconditionError(
            f"state is not an eigenstate of the observable (residual {residual:g})"
        )
    dim = 1 << n
    eye = np.eye(dim)
    m2 = 0.5 * (np.kron(mmat, eye) + np.kron(eye, mmat))
    gmat = sum_matrix(g)
    g2 = np.kron(gmat, eye) + np.kron(eye, gmat)
    d = _d_matrix(n, preferred)
    rr = np.kron(rho.matrix, rho.matrix)

    def corrected(t: float) -> float:
        u = scipy.linalg.expm(1j * t * g2)
        rt = u @ rr @ u.conj().T
        den = float(np.real(np.trace(d @ rt)))
        if abs(den) < 1e-14:
            raise DegenerateInputError("rotated denominator is degenerate")
        return float(np.real(np.trace(m2 @ d @ rt))) / den

    return (corrected(delta) - corrected(-delta)) / (2.0 * delta)
