"""Gate-list circuits and standard trial-state constructions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_SQ = 1.0 / math.sqrt(2.0)

# name -> (arity, takes_angle, is_clifford)
GATE_DEFS: dict[str, tuple[int, bool, bool]] = {
    "H": (1, False, True),
    "X": (1, False, True),
    "Y": (1, False, True),
    "Z": (1, False, True),
    "S": (1, False, True),
    "CNOT": (2, False, True),
    "CZ": (2, False, True),
    "ISWAP": (2, False, True),
    "RX": (1, True, False),
    "RY": (1, True, False),
    "RZ": (1, True, False),
}

# Gates eligible for the per-rotation single-qubit depolarizing rate.
ROTATION_GATES = frozenset({"RX", "RY", "RZ"})


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.name not in GATE_DEFS:
            raise ValueError(f"unknown gate {self.name!r}")
        arity, takes_angle, _ = GATE_DEFS[self.name]
        if len(self.qubits) != arity:
            raise ValueError(f"{self.name} expects {arity} qubit(s), got {self.qubits}")
        if takes_angle != (self.angle is not None):
            raise ValueError(f"{self.name}: angle argument mismatch")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.name}: repeated qubit in {self.qubits}")

    @property
    def is_clifford(self) -> bool:
        return GATE_DEFS[self.name][2]


@dataclass
class Circuit:
    num_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        for g in self.gates:
            self._check(g)

    def _check(self, g: Gate) -> None:
        if any(q < 0 or q >= self.num_qubits for q in g.qubits):
            raise ValueError(f"gate {g.name} on {g.qubits} exceeds {self.num_qubits} qubits")

    def add(self, name: str, *qubits: int, angle: float | None = None) -> "Circuit":
        g = Gate(name, tuple(qubits), angle)
        self._check(g)
        self.gates.append(g)
        return self

    @property
    def is_clifford(self) -> bool:
        return all(g.is_clifford for g in self.gates)

    def widened(self, num_qubits: int) -> "Circuit":
        """Same gates on a register of at least the current width."""
        if num_qubits < self.num_qubits:
            raise ValueError("cannot shrink a circuit")
        return Circuit(num_qubits, list(self.gates))


def gate_matrix(g: Gate) -> np.ndarray:
    """Unitary of the gate; 2x2 or 4x4 with the first listed qubit as the
    more significant axis."""
    if g.name == "H":
        return np.array([[_SQ, _SQ], [_SQ, -_SQ]], dtype=complex)
    if g.name == "X":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if g.name == "Y":
        return np.array([[0, -1j], [1j, 0]], dtype=complex)
    if g.name == "Z":
        return np.diag([1, -1]).astype(complex)
    if g.name == "S":
        return np.diag([1, 1j]).astype(complex)
    if g.name == "CNOT":
        m = np.eye(4, dtype=complex)
        m[[2, 3]] = m[[3, 2]]
        return m
    if g.name == "CZ":
        return np.diag([1, 1, 1, -1]).astype(complex)
    if g.name == "ISWAP":
        m = np.eye(4, dtype=complex)
        m[1, 1] = m[2, 2] = 0
        m[1, 2] = m[2, 1] = 1j
        return m
    half = g.angle / 2.0
    c, s = math.cos(half), math.sin(half)
    if g.name == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if g.name == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if g.name == "RZ":
        return np.array([[np.exp(-1j * half), 0], [0, np.exp(1j * half)]], dtype=complex)
    raise ValueError(f"unknown gate {g.name!r}")


def neel_circuit(num_qubits: int) -> Circuit:
    """Clifford preparation of the alternating-spin superposition
    (|0101...> - |1010...>)/sqrt(2) for an even number of qubits."""
    if num_qubits < 2 or num_qubits % 2:
        raise ValueError(f"alternating-spin state needs an even qubit count, got {num_qubits}")
    c = Circuit(num_qubits)
    c.add("H", 0)
    for q in range(num_qubits - 1):
        c.add("CNOT", q, q + 1)
    c.add("Z", 0)
    for q in range(1, num_qubits, 2):
        c.add("X", q)
    return c
