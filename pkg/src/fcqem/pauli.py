"""Exact symbolic algebra over Pauli strings.

Strings are stored as a pair of bit masks (x, z) plus a phase exponent k
with the operator equal to i^k * prod_q P_q.  Bit (n-1-q) of each mask
belongs to qubit q, so qubit 0 is the leftmost character of the text label
and the most significant bit of a computational-basis index: the label
"ZZIX" puts Z on qubits 0 and 1, and ``int(outcome, 2)`` turns an outcome
bitstring directly into the matching mask/index integer.

Per qubit the (x, z) encoding is I=(0,0), X=(1,0), Z=(0,1), Y=(1,1), and a
phase-free label string equals i^{|x&z|} X^x Z^z.  Products are computed in
O(1) mask operations with exact phase tracking:

    P(x1,z1) P(x2,z2) = i^g P(x1^x2, z1^z2),
    g = |x1&z1| + |x2&z2| - |x3&z3| + 2|z1&x2|   (mod 4).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import DimensionMismatchError, InternalConsistencyError

# Weights with absolute value below this are dropped from PauliSum results.
PRUNE_TOL = 1e-12

_LETTER_TO_XZ = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_XZ_TO_LETTER = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_PHASE_VALUES = (1, 1j, -1, -1j)

_SINGLE_QUBIT_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    """A phase-tracked Pauli operator on ``num_qubits`` qubits."""

    num_qubits: int
    x: int = 0
    z: int = 0
    phase_exp: int = 0  # operator = i**phase_exp * letters

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError(f"need at least one qubit, got {self.num_qubits}")
        mask = (1 << self.num_qubits) - 1
        if self.x & ~mask or self.z & ~mask:
            raise ValueError("mask has bits outside the qubit range")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    @classmethod
    def from_label(cls, label: str, phase: complex = 1) -> "PauliString":
        """Build from a text label like ``"ZZIX"`` (qubit 0 leftmost)."""
        x = z = 0
        for ch in label:
            try:
                xb, zb = _LETTER_TO_XZ[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli letter {ch!r} in {label!r}") from None
            x = (x << 1) | xb
            z = (z << 1) | zb
        try:
            exp = _PHASE_VALUES.index(phase)
        except ValueError:
            raise ValueError(f"phase must be one of +1,+i,-1,-i, got {phase!r}") from None
        return cls(len(label), x, z, exp)

    @classmethod
    def identity(cls, num_qubits: int) -> "PauliString":
        return cls(num_qubits)

    @property
    def phase(self) -> complex:
        return _PHASE_VALUES[self.phase_exp]

    @property
    def label(self) -> str:
        chars = []
        for q in range(self.num_qubits):
            bit = self.num_qubits - 1 - q
            chars.append(_XZ_TO_LETTER[((self.x >> bit) & 1, (self.z >> bit) & 1)])
        return "".join(chars)

    @property
    def support(self) -> int:
        """Mask of qubits where the operator is not the identity."""
        return self.x | self.z

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def phase_free(self) -> "PauliString":
        return self if self.phase_exp == 0 else PauliString(self.num_qubits, self.x, self.z)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __repr__(self):
        prefix = {0: "", 1: "i*", 2: "-", 3: "-i*"}[self.phase_exp]
        return f"PauliString({prefix}{self.label})"


def _check_same_size(a: PauliString, b: PauliString) -> None:
    if a.num_qubits != b.num_qubits:
        raise DimensionMismatchError(
            f"operand sizes differ: {a.num_qubits} vs {b.num_qubits} qubits"
        )


def _product_parts(a: PauliString, b: PauliString) -> tuple[int, int, int]:
    """Masks and phase exponent of a*b, exact via the symplectic product."""
    x3 = a.x ^ b.x
    z3 = a.z ^ b.z
    g = (
        (a.x & a.z).bit_count()
        + (b.x & b.z).bit_count()
        - (x3 & z3).bit_count()
        + 2 * (a.z & b.x).bit_count()
        + a.phase_exp
        + b.phase_exp
    ) % 4
    return x3, z3, g


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Product ab with exact phase tracking."""
    _check_same_size(a, b)
    x3, z3, g = _product_parts(a, b)
    return PauliString(a.num_qubits, x3, z3, g)


def qubitwise_commutes(a: PauliString, b: PauliString) -> bool:
    """True iff on every qubit the letters are equal or at least one is I."""
    _check_same_size(a, b)
    conflict = (a.support & b.support) & ((a.x ^ b.x) | (a.z ^ b.z))
    return conflict == 0


class PauliSum:
    """A real-weighted sum of phase-free Pauli strings.

    Terms with |weight| < PRUNE_TOL are dropped; duplicate strings are
    merged on construction.
    """

    __slots__ = ("num_qubits", "_terms")

    def __init__(self, num_qubits: int, terms: Mapping[tuple[int, int], float] | None = None):
        if num_qubits < 1:
            raise ValueError(f"need at least one qubit, got {num_qubits}")
        self.num_qubits = num_qubits
        self._terms: dict[tuple[int, int], float] = {}
        if terms:
            for key, w in terms.items():
                if abs(w) >= PRUNE_TOL:
                    self._terms[key] = self._terms.get(key, 0.0) + float(w)
            self._prune()

    def _prune(self) -> None:
        dead = [k for k, w in self._terms.items() if abs(w) < PRUNE_TOL]
        for k in dead:
            del self._terms[k]

    @classmethod
    def from_label_weights(cls, terms: Mapping[str, float], num_qubits: int | None = None) -> "PauliSum":
        labels = list(terms)
        if num_qubits is None:
            if not labels:
                raise ValueError("cannot infer qubit count from an empty term map")
            num_qubits = len(labels[0])
        out = cls(num_qubits)
        for label, w in terms.items():
            p = PauliString.from_label(label)
            if p.num_qubits != num_qubits:
                raise DimensionMismatchError(
                    f"term {label!r} has {p.num_qubits} qubits, expected {num_qubits}"
                )
            out._add_term(p.x, p.z, float(w))
        out._prune()
        return out

    @classmethod
    def zero(cls, num_qubits: int) -> "PauliSum":
        return cls(num_qubits)

    def _add_term(self, x: int, z: int, w: float) -> None:
        key = (x, z)
        self._terms[key] = self._terms.get(key, 0.0) + w

    def items(self) -> list[tuple[PauliString, float]]:
        """Terms as (phase-free string, weight), sorted by label."""
        out = [(PauliString(self.num_qubits, x, z), w) for (x, z), w in self._terms.items()]
        out.sort(key=lambda t: t[0].label)
        return out

    def strings(self) -> set[PauliString]:
        return {PauliString(self.num_qubits, x, z) for (x, z) in self._terms}

    def weight(self, p: PauliString) -> float:
        return self._terms.get((p.x, p.z), 0.0)

    def one_norm(self) -> float:
        """Sum of |weights|; bounds the operator spectral range."""
        return sum(abs(w) for w in self._terms.values())

    def label_weights(self) -> dict[str, float]:
        return {p.label: w for p, w in self.items()}

    def __len__(self):
        return len(self._terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if self.num_qubits != other.num_qubits:
            raise DimensionMismatchError("qubit counts differ")
        out = PauliSum(self.num_qubits, dict(self._terms))
        for key, w in other._terms.items():
            out._add_term(*key, w)
        out._prune()
        return out

    def scaled(self, factor: float) -> "PauliSum":
        return PauliSum(self.num_qubits, {k: w * factor for k, w in self._terms.items()})

    def __mul__(self, other: "PauliSum") -> "PauliSum":
        return sum_multiply(self, other)

    def __repr__(self):
        inner = ", ".join(f"{p.label}: {w:g}" for p, w in self.items())
        return f"PauliSum({{{inner}}})"


def sum_multiply(a: PauliSum, b: PauliSum) -> PauliSum:
    """Distribute, merge like terms, prune below tolerance.

    For Hermitian operands the imaginary parts of merged weights cancel
    exactly; a residue above the pruning tolerance signals a non-Hermitian
    input and raises.
    """
    if a.num_qubits != b.num_qubits:
        raise DimensionMismatchError("qubit counts differ")
    acc: dict[tuple[int, int], complex] = {}
    for (xa, za), wa in a._terms.items():
        pa_y = (xa & za).bit_count()
        for (xb, zb), wb in b._terms.items():
            x3 = xa ^ xb
            z3 = za ^ zb
            g = (pa_y + (xb & zb).bit_count() - (x3 & z3).bit_count()
                 + 2 * (za & xb).bit_count()) % 4
            key = (x3, z3)
            acc[key] = acc.get(key, 0.0) + wa * wb * _PHASE_VALUES[g]
    out = PauliSum(a.num_qubits)
    for key, w in acc.items():
        if abs(w.imag) >= PRUNE_TOL:
            label = PauliString(a.num_qubits, *key).label
            raise InternalConsistencyError(
                f"non-negligible imaginary weight {w.imag:g} on term {label}"
            )
        if abs(w.real) >= PRUNE_TOL:
            out._terms[key] = w.real
    return out


def hamiltonian_powers(h: PauliSum, max_order: int) -> list[PauliSum]:
    """[H^1, ..., H^max_order] by iterated multiplication (max_order <= 4)."""
    if max_order < 1:
        raise ValueError(f"max_order must be >= 1, got {max_order}")
    powers = [h]
    for _ in range(max_order - 1):
        powers.append(sum_multiply(powers[-1], h))
    return powers


def union_strings(sums: Iterable[PauliSum]) -> set[PauliString]:
    """The set of phase-free strings appearing across the given sums."""
    out: set[PauliString] = set()
    for s in sums:
        out |= s.strings()
    return out


# ---------------------------------------------------------------------------
# Tensor-product-basis (TPB) grouping
# ---------------------------------------------------------------------------

TPB_LETTERS = frozenset("XYZ")


def validate_tpb(basis: str, num_qubits: int) -> None:
    if len(basis) != num_qubits or any(ch not in TPB_LETTERS for ch in basis):
        raise ValueError(f"invalid TPB {basis!r} for {num_qubits} qubits")


def compatible_with_tpb(p: PauliString, basis: str) -> bool:
    """True iff every non-identity letter of p matches the basis letter."""
    validate_tpb(basis, p.num_qubits)
    bx, bz = 0, 0
    for ch in basis:
        xb, zb = _LETTER_TO_XZ[ch]
        bx = (bx << 1) | xb
        bz = (bz << 1) | zb
    return ((p.x ^ bx) | (p.z ^ bz)) & p.support == 0


class _OpenBasis:
    """A TPB under construction: per-qubit constraints, free slots default
    to Z when finalized."""

    __slots__ = ("n", "cmask", "x", "z", "members")

    def __init__(self, n: int):
        self.n = n
        self.cmask = 0  # qubits with a fixed letter
        self.x = 0
        self.z = 0
        self.members: set[PauliString] = set()

    def accepts(self, p: PauliString) -> bool:
        clash = p.support & self.cmask & ((p.x ^ self.x) | (p.z ^ self.z))
        return clash == 0

    def admit(self, p: PauliString) -> None:
        new = p.support & ~self.cmask
        self.x |= p.x & new
        self.z |= p.z & new
        self.cmask |= p.support
        self.members.add(p.phase_free())

    def letters(self) -> str:
        chars = []
        for q in range(self.n):
            bit = self.n - 1 - q
            if (self.cmask >> bit) & 1:
                chars.append(_XZ_TO_LETTER[((self.x >> bit) & 1, (self.z >> bit) & 1)])
            else:
                chars.append("Z")
        return "".join(chars)


def group_tpb(
    strings: Iterable[PauliString],
    weights: Mapping[PauliString, float] | None = None,
) -> dict[str, set[PauliString]]:
    """Greedy first-fit assignment of strings to tensor product bases.

    Strings are processed in descending |weight| order (missing weights
    count as 1), ties broken by label; each string joins the first open
    basis it is qubit-wise compatible with, otherwise opens a new one.
    Unconstrained qubits default to Z.
    """
    items = []
    for p in strings:
        w = 1.0 if weights is None else abs(weights.get(p.phase_free(), 1.0))
        items.append((p.phase_free(), w))
    if not items:
        return {}
    n = items[0][0].num_qubits
    for p, _ in items:
        if p.num_qubits != n:
            raise DimensionMismatchError("strings have differing qubit counts")
    items.sort(key=lambda t: (-t[1], t[0].label))

    open_bases: list[_OpenBasis] = []
    for p, _ in items:
        for ob in open_bases:
            if ob.accepts(p):
                ob.admit(p)
                break
        else:
            ob = _OpenBasis(n)
            ob.admit(p)
            open_bases.append(ob)

    out: dict[str, set[PauliString]] = {}
    for ob in open_bases:
        out.setdefault(ob.letters(), set()).update(ob.members)
    return out


def outcome_eigenvalue(p: PauliString, outcome: str) -> int:
    """Eigenvalue (+1/-1) of p for a bitstring measured in a compatible TPB.

    Equals (-1)^(parity of outcome bits on p's support), times the string's
    real phase.  Qubit 0 is the leftmost character of ``outcome``.
    """
    if len(outcome) != p.num_qubits:
        raise DimensionMismatchError(
            f"outcome length {len(outcome)} != {p.num_qubits} qubits"
        )
    if p.phase_exp % 2:
        raise ValueError("eigenvalues undefined for strings with imaginary phase")
    idx = int(outcome, 2)
    sign = -1 if (idx & p.support).bit_count() & 1 else 1
    return sign if p.phase_exp == 0 else -sign


def eigenvalue_signs(p: PauliString) -> np.ndarray:
    """Vector of outcome eigenvalues over all 2^n computational indices."""
    n = p.num_qubits
    signs = np.ones(1 << n, dtype=np.float64)
    idx = np.arange(1 << n)
    support = p.support
    parity = np.zeros(1 << n, dtype=np.int64)
    while support:
        bit = support & -support
        parity ^= (idx & bit) != 0
        support ^= bit
    signs[parity == 1] = -1.0
    if p.phase_exp == 2:
        signs = -signs
    elif p.phase_exp % 2:
        raise ValueError("eigenvalues undefined for strings with imaginary phase")
    return signs


# ---------------------------------------------------------------------------
# Dense matrix forms (small n; used by simulators and oracles)
# ---------------------------------------------------------------------------


def string_matrix(p: PauliString) -> np.ndarray:
    """Dense 2^n x 2^n matrix of the string, phase included.

    Built directly from the (x, z) action X^x Z^z |c> = (-1)^{c.z} |c^x>,
    with the Y-count phase folded in.
    """
    n = p.num_qubits
    dim = 1 << n
    cols = np.arange(dim)
    rows = cols ^ p.x
    parity = np.zeros(dim, dtype=np.int64)
    zmask = p.z
    while zmask:
        bit = zmask & -zmask
        parity ^= (cols & bit) != 0
        zmask ^= bit
    vals = np.where(parity, -1.0, 1.0).astype(complex)
    vals *= _PHASE_VALUES[(p.phase_exp + (p.x & p.z).bit_count()) % 4]
    mat = np.zeros((dim, dim), dtype=complex)
    mat[rows, cols] = vals
    return mat


def sum_matrix(h: PauliSum) -> np.ndarray:
    """Dense matrix of a PauliSum."""
    dim = 1 << h.num_qubits
    mat = np.zeros((dim, dim), dtype=complex)
    for p, w in h.items():
        mat += w * string_matrix(p)
    return mat
