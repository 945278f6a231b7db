"""Shot-level Pauli-frame simulation of Clifford circuits under Pauli noise.

The noiseless circuit is handled once through a stabilizer tableau: its
Z-basis support is an affine subspace v0 + span{d_1..d_k} with uniform
probability, extracted by Gaussian elimination over GF(2).  Each shot then
draws a reference outcome from that subspace and XORs on the X-component
of a sampled Pauli error frame propagated through the circuit, giving cost
O(shots * gates).

Noise is inserted after every gate on the gate's qubits, plus one
pre-measurement layer on all qubits.  Reference-outcome draws and noise
draws use separate PRNG substreams of (seed, tag, batch), so a pure-Z
noise run reproduces the zero-noise outcomes shot for shot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Circuit
from .errors import CapacityError, InternalConsistencyError
from .states import ProbDist, all_z

FRAME_GATES = frozenset({"H", "S", "X", "Y", "Z", "CNOT", "CZ"})
FRAME_QUBIT_MAX = 4096
_BATCH = 32768
_TAG_REF = 0x726566
_TAG_NOISE = 0x6E6F69


@dataclass(frozen=True)
class PauliNoiseSpec:
    """Per-qubit per-layer Pauli error probabilities."""

    p_x: float = 0.0
    p_y: float = 0.0
    p_z: float = 0.0

    def __post_init__(self):
        for name in ("p_x", "p_y", "p_z"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} outside [0, 1]")
        if self.p_x + self.p_y + self.p_z > 1.0 + 1e-12:
            raise ValueError("error probabilities sum beyond 1")

    @classmethod
    def biased(cls, rate: float, bias: float = 10.0) -> "PauliNoiseSpec":
        """Dephasing-biased channel: p_z = bias * p_x = bias * p_y, with
        p_x + p_y + p_z equal to the quoted rate."""
        if rate < 0 or bias <= 0:
            raise ValueError("rate must be >= 0 and bias positive")
        unit = rate / (2.0 + bias)
        return cls(p_x=unit, p_y=unit, p_z=bias * unit)

    @property
    def total(self) -> float:
        return self.p_x + self.p_y + self.p_z


# ---------------------------------------------------------------------------
# Column-major stabilizer tableau (bitmask per qubit over generators)
# ---------------------------------------------------------------------------


class _ColumnTableau:
    """Stabilizer generators of the evolving state, stored column-wise:
    xcol[q] bit i is set iff generator i has an X-component on qubit q.
    Signs are a bitmask over generators ((-1)^bit)."""

    def __init__(self, n: int):
        self.n = n
        self.full = (1 << n) - 1
        self.xcol = [0] * n
        self.zcol = [1 << i for i in range(n)]  # start stabilized by Z_i
        self.signs = 0

    def apply(self, name: str, qubits: tuple[int, ...]) -> None:
        x, z = self.xcol, self.zcol
        if name == "H":
            (q,) = qubits
            self.signs ^= x[q] & z[q]
            x[q], z[q] = z[q], x[q]
        elif name == "S":
            (q,) = qubits
            self.signs ^= x[q] & z[q]
            z[q] ^= x[q]
        elif name == "X":
            (q,) = qubits
            self.signs ^= z[q]
        elif name == "Y":
            (q,) = qubits
            self.signs ^= x[q] ^ z[q]
        elif name == "Z":
            (q,) = qubits
            self.signs ^= x[q]
        elif name == "CNOT":
            a, b = qubits
            self.signs ^= x[a] & z[b] & (x[b] ^ z[a] ^ self.full)
            x[b] ^= x[a]
            z[a] ^= z[b]
        elif name == "CZ":
            a, b = qubits
            self.signs ^= x[a] & x[b] & (z[a] ^ z[b])
            z[a] ^= x[b]
            z[b] ^= x[a]
        else:
            raise ValueError(f"gate {name} is not in the frame-simulable set")

    def rows(self) -> tuple[list[int], list[int], list[int]]:
        """Generator masks in index space (qubit 0 = most significant bit)."""
        n = self.n
        xr = [0] * n
        zr = [0] * n
        for q in range(n):
            pos = n - 1 - q
            col = self.xcol[q]
            while col:
                low = col & -col
                xr[low.bit_length() - 1] |= 1 << pos
                col ^= low
            col = self.zcol[q]
            while col:
                low = col & -col
                zr[low.bit_length() - 1] |= 1 << pos
                col ^= low
        sr = [(self.signs >> i) & 1 for i in range(n)]
        return xr, zr, sr


def _row_product(x1, z1, s1, x2, z2, s2):
    """Product of two commuting Hermitian Pauli rows with sign tracking."""
    x3 = x1 ^ x2
    z3 = z1 ^ z2
    g = ((x1 & z1).bit_count() + (x2 & z2).bit_count()
         - (x3 & z3).bit_count() + 2 * (z1 & x2).bit_count()) % 4
    if g not in (0, 2):
        raise InternalConsistencyError("stabilizer rows failed to commute")
    return x3, z3, s1 ^ s2 ^ (1 if g == 2 else 0)


def _z_support(tab: _ColumnTableau) -> tuple[int, list[int]]:
    """Offset v0 and free directions of the Z-basis support subspace."""
    xr, zr, sr = tab.rows()
    pivots: dict[int, tuple[int, int, int]] = {}
    constraints: list[tuple[int, int]] = []
    for x, z, s in zip(xr, zr, sr):
        while x:
            bit = x.bit_length() - 1
            if bit not in pivots:
                break
            x, z, s = _row_product(x, z, s, *pivots[bit])
        if x:
            pivots[x.bit_length() - 1] = (x, z, s)
        else:
            constraints.append((z, s))

    # Gauss-Jordan over the pure-Z parity constraints: v . z = s (mod 2)
    solved: list[tuple[int, int, int]] = []  # (mask, target, pivot_bit)
    for z, t in constraints:
        for mask, target, pb in solved:
            if (z >> pb) & 1:
                z ^= mask
                t ^= target
        if z == 0:
            if t:
                raise InternalConsistencyError("inconsistent stabilizer constraints")
            continue
        pb = z.bit_length() - 1
        solved = [
            (m ^ z, tg ^ t, p) if (m >> pb) & 1 else (m, tg, p)
            for m, tg, p in solved
        ]
        solved.append((z, t, pb))

    v0 = 0
    for _, t, pb in solved:
        if t:
            v0 |= 1 << pb
    dirs = [x for x, _, _ in pivots.values()]
    return v0, dirs


def _int_to_bits(value: int, n: int) -> np.ndarray:
    return np.frombuffer(
        np.binary_repr(value, width=n).encode(), dtype=np.uint8
    ) - ord("0")


# ---------------------------------------------------------------------------
# Frame sampling
# ---------------------------------------------------------------------------


def _noise_sites(circuit: Circuit):
    """(qubit,) insertion points: after each gate on its support, then one
    layer on all qubits before measurement."""
    for g in circuit.gates:
        yield g.qubits
    yield tuple(range(circuit.num_qubits))


def frame_sample(
    circuit: Circuit,
    noise: PauliNoiseSpec,
    shots: int,
    seed: int,
    inject_final_x: int = 0,
) -> ProbDist:
    """Sparse Z-basis counts of the noisy Clifford circuit.

    ``inject_final_x`` deterministically XORs the given qubit mask (index
    space) onto every shot's error frame just before measurement; intended
    for frame-semantics checks.
    """
    if shots < 1:
        raise ValueError(f"shots must be positive, got {shots}")
    n = circuit.num_qubits
    if n > FRAME_QUBIT_MAX:
        raise CapacityError(f"{n} qubits exceeds frame limit {FRAME_QUBIT_MAX}")
    for g in circuit.gates:
        if g.name not in FRAME_GATES:
            raise ValueError(f"gate {g.name} is not in the frame-simulable set")

    tab = _ColumnTableau(n)
    for g in circuit.gates:
        tab.apply(g.name, g.qubits)
    v0, dirs = _z_support(tab)
    v0_bits = _int_to_bits(v0, n)
    dir_bits = [_int_to_bits(d, n) for d in dirs]
    inject_bits = _int_to_bits(inject_final_x, n).astype(bool)

    px, py, pz = noise.p_x, noise.p_y, noise.p_z
    noisy = (px + py + pz) > 0.0
    seed64 = seed & 0xFFFFFFFFFFFFFFFF

    counts: dict[bytes, int] = {}
    done = 0
    batch_idx = 0
    while done < shots:
        b = min(_BATCH, shots - done)
        rng_ref = np.random.default_rng(np.random.SeedSequence([seed64, _TAG_REF, batch_idx]))
        rng_noise = np.random.default_rng(np.random.SeedSequence([seed64, _TAG_NOISE, batch_idx]))

        ref = np.tile(v0_bits.astype(bool), (b, 1))
        for d in dir_bits:
            pick = rng_ref.integers(0, 2, size=b, dtype=np.uint8).astype(bool)
            ref[pick] ^= d.astype(bool)

        fx = np.zeros((n, b), dtype=bool)
        fz = np.zeros((n, b), dtype=bool)
        for g in circuit.gates:
            name = g.name
            if name == "H":
                (q,) = g.qubits
                fx[q], fz[q] = fz[q].copy(), fx[q].copy()
            elif name == "S":
                (q,) = g.qubits
                fz[q] ^= fx[q]
            elif name == "CNOT":
                a, c = g.qubits
                fx[c] ^= fx[a]
                fz[a] ^= fz[c]
            elif name == "CZ":
                a, c = g.qubits
                fz[c] ^= fx[a]
                fz[a] ^= fx[c]
            # X, Y, Z only change frame signs, which do not affect outcomes
            if noisy:
                for q in g.qubits:
                    u = rng_noise.random(b)
                    fy = (u >= px) & (u < px + py)
                    fx[q] ^= (u < px) | fy
                    fz[q] ^= ((u >= px + py) & (u < px + py + pz)) | fy
        if noisy:
            for q in range(n):
                u = rng_noise.random(b)
                fy = (u >= px) & (u < px + py)
                fx[q] ^= (u < px) | fy
                fz[q] ^= ((u >= px + py) & (u < px + py + pz)) | fy

        outcomes = ref ^ fx.T
        if inject_final_x:
            outcomes ^= inject_bits
        packed = np.packbits(outcomes, axis=1)
        uniq, cnt = np.unique(packed, axis=0, return_counts=True)
        for row, c in zip(uniq, cnt):
            key = row.tobytes()
            counts[key] = counts.get(key, 0) + int(c)
        done += b
        batch_idx += 1

    str_counts = {}
    for key, c in counts.items():
        bits = np.unpackbits(np.frombuffer(key, dtype=np.uint8))[:n]
        str_counts["".join("1" if v else "0" for v in bits)] = c
    return ProbDist.from_counts(n, all_z(n), str_counts, shots)


def noiseless_spin_correlation(circuit: Circuit) -> float:
    """Exact <Z tensor ... Z> of the noiseless circuit via its tableau."""
    for g in circuit.gates:
        if g.name not in FRAME_GATES:
            raise ValueError(f"gate {g.name} is not in the frame-simulable set")
    tab = _ColumnTableau(circuit.num_qubits)
    for g in circuit.gates:
        tab.apply(g.name, g.qubits)
    v0, dirs = _z_support(tab)
    if any(d.bit_count() & 1 for d in dirs):
        return 0.0
    return -1.0 if v0.bit_count() & 1 else 1.0


def _parity_weights(dist: ProbDist):
    """(weight, parity) pairs; integer counts when the distribution is
    empirical, so single-parity data gives bit-exact +-1 ratios."""
    if dist.shots is not None:
        for outcome, c in dist.counts().items():
            yield c, outcome.count("1") & 1
    else:
        for outcome, p in dist.items():
            yield p, outcome.count("1") & 1


def spin_correlation(dist: ProbDist) -> float:
    """Parity observable over all qubits: sum_o (-1)^parity(o) p(o)."""
    if dist.basis != all_z(dist.num_qubits):
        raise ValueError("spin correlation needs a computational-basis distribution")
    num = 0
    den = 0
    for w, parity in _parity_weights(dist):
        num += -w if parity else w
        den += w
    return num / den


def corrected_spin_correlation(dist: ProbDist) -> float:
    """Squared-distribution corrected parity: sum lambda w^2 / sum w^2."""
    if dist.basis != all_z(dist.num_qubits):
        raise ValueError("spin correlation needs a computational-basis distribution")
    num = 0
    den = 0
    for w, parity in _parity_weights(dist):
        sq = w * w
        num += -sq if parity else sq
        den += sq
    return num / den
