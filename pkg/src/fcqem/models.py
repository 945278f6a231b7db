"""Model Hamiltonian construction."""

from __future__ import annotations

from dataclasses import dataclass, field

from .pauli import PauliSum

CHAIN_OPEN = "chain-open"
CHAIN_PERIODIC = "chain-periodic"
EXPLICIT = "explicit"


@dataclass(frozen=True)
class TfimSpec:
    """Transverse-field Ising model: sum_bonds J_ij Z_i Z_j + h sum_i X_i."""

    n: int
    field_strength: float
    topology: str = CHAIN_OPEN
    couplings: tuple[tuple[int, int, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two sites")
        if self.topology not in (CHAIN_OPEN, CHAIN_PERIODIC, EXPLICIT):
            raise ValueError(f"unknown topology {self.topology!r}")
        if self.topology == EXPLICIT and not self.couplings:
            raise ValueError("explicit topology needs a coupling list")

    @classmethod
    def chain(cls, n: int, j: float, h: float, periodic: bool = False) -> "TfimSpec":
        bonds = [(i, i + 1, j) for i in range(n - 1)]
        if periodic:
            bonds.append((n - 1, 0, j))
        return cls(
            n,
            h,
            CHAIN_PERIODIC if periodic else CHAIN_OPEN,
            tuple(bonds),
        )

    def bonds(self) -> tuple[tuple[int, int, float], ...]:
        return self.couplings


def build_tfim(spec: TfimSpec) -> PauliSum:
    """One ZZ term per bond and one X term per site (omitted when h = 0)."""
    seen: set[frozenset[int]] = set()
    out = PauliSum(spec.n)
    for i, j, w in spec.bonds():
        if not (0 <= i < spec.n and 0 <= j < spec.n) or i == j:
            raise ValueError(f"invalid bond ({i}, {j}) for {spec.n} sites")
        key = frozenset((i, j))
        if key in seen:
            raise ValueError(f"duplicate bond ({i}, {j})")
        seen.add(key)
        x = 0
        z = (1 << (spec.n - 1 - i)) | (1 << (spec.n - 1 - j))
        out._add_term(x, z, float(w))
    if spec.field_strength != 0.0:
        for i in range(spec.n):
            out._add_term(1 << (spec.n - 1 - i), 0, float(spec.field_strength))
    out._prune()
    return out
