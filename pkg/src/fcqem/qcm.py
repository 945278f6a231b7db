"""Ground-state energy estimation from Hamiltonian moments.

Moments <H>..<H^4> are assembled exactly: powers of the Hamiltonian are
expanded symbolically into Pauli strings, each string's expectation comes
from its host tensor-product-basis distribution (optionally corrected by
the squared-distribution scheme), and the weighted sums are combined.
Cumulants feed the fourth-order estimate

    E0 ~ c1 - c2^2 / (c3^2 - c2 c4) * (sqrt(3 c3^2 - 2 c2 c4) - c3),

with pathological inputs (vanishing variance, vanishing denominator,
negative radicand) reported as statuses rather than failures so that
parameter sweeps keep running.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import MissingMeasurementError
from .mitigation import (
    GLOBAL_Z,
    TWO_COPY,
    FcqemConfig,
    _check_denominator,
    fcqem_joint,
    squared_denominator,
    string_raw_expectation,
    string_squared_components,
)
from .pauli import PauliString, PauliSum, group_tpb, hamiltonian_powers, outcome_eigenvalue
from .states import MeasurementSet

STATUS_OK = "ok"
STATUS_DEGENERATE = "degenerate-fallback"
STATUS_NEGATIVE_RADICAND = "negative-radicand"

# Pathology guards; the estimate falls back to c1 when triggered.
C2_GUARD = 1e-9
DENOM_GUARD = 1e-12


@dataclass(frozen=True)
class Moments:
    m1: float
    m2: float
    m3: float
    m4: float

    def variance(self) -> float:
        return self.m2 - self.m1 * self.m1


@dataclass(frozen=True)
class Cumulants:
    c1: float
    c2: float
    c3: float
    c4: float


@dataclass(frozen=True)
class QcmEstimate:
    energy: float
    status: str
    radicand: float
    denominator: float

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


def required_bases(h: PauliSum, max_order: int = 4) -> list[str]:
    """TPBs covering every string of H^1..H^max_order (greedy grouping,
    ordered by the largest absolute weight across the powers)."""
    powers = hamiltonian_powers(h, max_order)
    weights: dict[PauliString, float] = {}
    strings: set[PauliString] = set()
    for p in powers:
        for s, w in p.items():
            if s.is_identity:
                continue
            strings.add(s)
            weights[s] = max(weights.get(s, 0.0), abs(w))
    if not strings:
        return []
    return sorted(group_tpb(strings, weights))


def _string_expectations(
    ms: MeasurementSet,
    strings: set[PauliString],
    corrector: FcqemConfig | None,
    ms2: MeasurementSet | None,
) -> dict[PauliString, float]:
    preferred = None
    if corrector is not None:
        preferred = corrector.preferred(ms.num_qubits)
    hosts: dict[PauliString, str] = {}
    unhosted = []
    for s in strings:
        b = ms.host_basis(s, preferred)
        if b is None:
            unhosted.append(s)
        else:
            hosts[s] = b
    if unhosted:
        raise MissingMeasurementError(sorted(group_tpb(unhosted)))

    if corrector is None:
        return {s: string_raw_expectation(ms.dists[b], s) for s, b in hosts.items()}

    two_copy = corrector.copy_mode == TWO_COPY
    if two_copy and ms2 is None:
        raise ValueError("two-copy correction needs a second measurement set")

    def term_components(s: PauliString, basis: str) -> tuple[float, float]:
        if two_copy:
            d2 = ms2.get(basis)
            if d2 is None:
                raise MissingMeasurementError([basis])
            return fcqem_joint(ms.dists[basis], d2, lambda o: outcome_eigenvalue(s, o))
        return string_squared_components(ms.dists[basis], s)

    out: dict[PauliString, float] = {}
    if corrector.mode == GLOBAL_Z:
        zdist = ms.get(preferred)
        if zdist is None:
            raise MissingMeasurementError([preferred])
        if two_copy:
            z2 = ms2.get(preferred)
            if z2 is None:
                raise MissingMeasurementError([preferred])
            _, den = fcqem_joint(zdist, z2, lambda o: 1.0)
        else:
            den = squared_denominator(zdist)
        _check_denominator(den, zdist.total())
        for s, b in hosts.items():
            num, _ = term_components(s, b)
            out[s] = num / den
    else:
        for s, b in hosts.items():
            num, den = term_components(s, b)
            _check_denominator(den, ms.dists[b].total())
            out[s] = num / den
    return out


def moments_from_measurements(
    ms: MeasurementSet,
    h: PauliSum,
    corrector: FcqemConfig | None = None,
    ms2: MeasurementSet | None = None,
) -> Moments:
    """<H>, <H^2>, <H^3>, <H^4> from per-basis measurement data.

    When a corrector config is given, every non-identity string expectation
    is squared-distribution corrected before the weighted combination;
    identity terms always contribute their weight."""
    powers = hamiltonian_powers(h, 4)
    ident = PauliString.identity(h.num_qubits)
    strings: set[PauliString] = set()
    for p in powers:
        strings |= {s for s in p.strings() if not s.is_identity}
    values = _string_expectations(ms, strings, corrector, ms2)
    out = []
    for p in powers:
        total = p.weight(ident)
        for s, w in p.items():
            if not s.is_identity:
                total += w * values[s]
        out.append(total)
    return Moments(*out)


def cumulants(m: Moments) -> Cumulants:
    """Connected moments via the binomial recursion over raw moments."""
    raw = [1.0, m.m1, m.m2, m.m3, m.m4]
    c = [0.0] * 5
    for order in range(1, 5):
        acc = raw[order]
        for p in range(order - 1):
            acc -= math.comb(order - 1, p) * c[p + 1] * raw[order - 1 - p]
        c[order] = acc
    return Cumulants(c[1], c[2], c[3], c[4])


def qcm_energy(c: Cumulants) -> QcmEstimate:
    """Fourth-order estimate with pathology statuses.

    Near-zero variance (eigenstate-like input) and a vanishing
    c3^2 - c2 c4 denominator fall back to c1 with ``degenerate-fallback``;
    a negative radicand reports ``negative-radicand``; both keep the raw
    first moment as the energy."""
    radicand = 3.0 * c.c3**2 - 2.0 * c.c2 * c.c4
    denominator = c.c3**2 - c.c2 * c.c4
    if c.c2 <= C2_GUARD * max(1.0, c.c1 * c.c1):
        return QcmEstimate(c.c1, STATUS_DEGENERATE, radicand, denominator)
    if abs(denominator) <= DENOM_GUARD * max(1.0, c.c2 * c.c2):
        return QcmEstimate(c.c1, STATUS_DEGENERATE, radicand, denominator)
    if radicand < 0.0:
        return QcmEstimate(c.c1, STATUS_NEGATIVE_RADICAND, radicand, denominator)
    energy = c.c1 - (c.c2**2 / denominator) * (math.sqrt(radicand) - c.c3)
    return QcmEstimate(energy, STATUS_OK, radicand, denominator)


def qcm_from_measurements(
    ms: MeasurementSet,
    h: PauliSum,
    corrector: FcqemConfig | None = None,
    ms2: MeasurementSet | None = None,
) -> QcmEstimate:
    """Measurements -> moments -> cumulants -> energy, optionally with the
    squared-distribution correction applied per distribution."""
    return qcm_energy(cumulants(moments_from_measurements(ms, h, corrector, ms2)))


def qcm_with_fcqem(
    ms: MeasurementSet,
    h: PauliSum,
    cfg: FcqemConfig | None = None,
    ms2: MeasurementSet | None = None,
) -> QcmEstimate:
    """The combined pipeline: identical data path to the uncorrected
    estimator except each string expectation is corrected first."""
    return qcm_from_measurements(ms, h, cfg or FcqemConfig(), ms2)
