"""File formats: Hamiltonian text, circuit text, measurement JSON, results CSV.

All loaders reject rather than repair invalid data and name the offending
location.  Serialization is canonical (sorted keys, fixed separators) so
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Mapping

from .circuits import GATE_DEFS, Circuit, Gate
from .errors import ParseError
from .pauli import PauliSum
from .states import MeasurementSet, ProbDist

# ---------------------------------------------------------------------------
# Hamiltonian text format: `PAULISTRING WEIGHT` records, `#` comments
# ---------------------------------------------------------------------------


def loads_hamiltonian(text: str, source: str = "<string>") -> PauliSum:
    terms: dict[str, float] = {}
    width: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"{source}:{lineno}: expected 'PAULISTRING WEIGHT', got {raw!r}")
        label, wtext = parts
        if set(label) - set("IXYZ"):
            raise ParseError(f"{source}:{lineno}: invalid Pauli string {label!r}")
        if width is None:
            width = len(label)
        elif len(label) != width:
            raise ParseError(
                f"{source}:{lineno}: string length {len(label)} differs from {width}"
            )
        try:
            weight = float(wtext)
        except ValueError:
            raise ParseError(f"{source}:{lineno}: invalid weight {wtext!r}") from None
        terms[label] = terms.get(label, 0.0) + weight
    if not terms:
        raise ParseError(f"{source}: no Hamiltonian terms found")
    return PauliSum.from_label_weights(terms, width)


def load_hamiltonian(path: str | Path) -> PauliSum:
    p = Path(path)
    return loads_hamiltonian(p.read_text(), source=str(p))


def dumps_hamiltonian(h: PauliSum) -> str:
    lines = [f"{p.label} {w:.17g}" for p, w in h.items()]
    return "\n".join(lines) + "\n"


def save_hamiltonian(h: PauliSum, path: str | Path) -> None:
    Path(path).write_text(dumps_hamiltonian(h))


# ---------------------------------------------------------------------------
# Circuit text format: one gate per line, e.g. `H 0`, `CNOT 0 1`, `RY 3 0.6`
# ---------------------------------------------------------------------------


def loads_circuit(text: str, num_qubits: int | None = None, source: str = "<string>") -> Circuit:
    gates: list[Gate] = []
    max_q = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        name = parts[0].upper()
        if name not in GATE_DEFS:
            raise ParseError(f"{source}:{lineno}: unknown gate {parts[0]!r}")
        arity, takes_angle, _ = GATE_DEFS[name]
        expected = 1 + arity + (1 if takes_angle else 0)
        if len(parts) != expected:
            raise ParseError(
                f"{source}:{lineno}: {name} expects {expected - 1} argument(s), got {len(parts) - 1}"
            )
        try:
            qubits = tuple(int(t) for t in parts[1 : 1 + arity])
        except ValueError:
            raise ParseError(f"{source}:{lineno}: invalid qubit index in {raw!r}") from None
        angle = None
        if takes_angle:
            try:
                angle = float(parts[-1])
            except ValueError:
                raise ParseError(f"{source}:{lineno}: invalid angle {parts[-1]!r}") from None
        if any(q < 0 for q in qubits):
            raise ParseError(f"{source}:{lineno}: negative qubit index")
        try:
            gates.append(Gate(name, qubits, angle))
        except ValueError as exc:
            raise ParseError(f"{source}:{lineno}: {exc}") from None
        max_q = max(max_q, *qubits)
    if num_qubits is None:
        if max_q < 0:
            raise ParseError(f"{source}: empty circuit needs an explicit qubit count")
        num_qubits = max_q + 1
    elif max_q >= num_qubits:
        raise ParseError(f"{source}: gate on qubit {max_q} exceeds register of {num_qubits}")
    return Circuit(num_qubits, gates)


def load_circuit(path: str | Path, num_qubits: int | None = None) -> Circuit:
    p = Path(path)
    return loads_circuit(p.read_text(), num_qubits, source=str(p))


def dumps_circuit(c: Circuit) -> str:
    lines = []
    for g in c.gates:
        parts = [g.name, *map(str, g.qubits)]
        if g.angle is not None:
            parts.append(f"{g.angle:.17g}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# Measurement JSON
# ---------------------------------------------------------------------------


def measurement_set_to_dict(ms: MeasurementSet) -> dict:
    records = []
    for basis in ms.bases():
        dist = ms.dists[basis]
        if dist.is_exact:
            records.append(
                {
                    "basis": basis,
                    "exact": True,
                    "probs": {o: p for o, p in sorted(dist.items())},
                }
            )
        else:
            records.append(
                {
                    "basis": basis,
                    "shots": dist.shots,
                    "counts": dict(sorted(dist.counts().items())),
                }
            )
    out = {"num_qubits": ms.num_qubits, "records": records}
    if ms.metadata:
        out["metadata"] = ms.metadata
    return out


def _reject(record_no: int, basis, why: str) -> ParseError:
    label = f"record {record_no}" + (f" (basis {basis})" if basis else "")
    return ParseError(f"{label}: {why}")


def measurement_set_from_dict(obj: Mapping) -> MeasurementSet:
    if not isinstance(obj, Mapping):
        raise ParseError("measurement file must be a JSON object")
    try:
        n = int(obj["num_qubits"])
    except (KeyError, TypeError, ValueError):
        raise ParseError("missing or invalid 'num_qubits'") from None
    records = obj.get("records")
    if not isinstance(records, list):
        raise ParseError("missing 'records' list")
    ms = MeasurementSet(n, metadata=dict(obj.get("metadata") or {}))
    for i, rec in enumerate(records):
        basis = rec.get("basis") if isinstance(rec, Mapping) else None
        if not isinstance(rec, Mapping):
            raise _reject(i, None, "record is not an object")
        if not isinstance(basis, str) or len(basis) != n or set(basis) - set("XYZ"):
            raise _reject(i, basis, f"invalid basis string for {n} qubits")
        if basis in ms.dists:
            raise _reject(i, basis, "duplicate basis")
        if rec.get("exact"):
            probs = rec.get("probs")
            if not isinstance(probs, Mapping):
                raise _reject(i, basis, "exact record needs a 'probs' map")
            try:
                dist = ProbDist.exact_sparse(n, basis, {k: float(v) for k, v in probs.items()})
            except ValueError as exc:
                raise _reject(i, basis, str(exc)) from None
        else:
            counts = rec.get("counts")
            shots = rec.get("shots")
            if not isinstance(counts, Mapping) or not isinstance(shots, int):
                raise _reject(i, basis, "record needs integer 'shots' and a 'counts' map")
            bad = [v for v in counts.values() if not isinstance(v, int) or v < 0]
            if bad:
                raise _reject(i, basis, "counts must be non-negative integers")
            try:
                dist = ProbDist.from_counts(n, basis, counts, shots)
            except ValueError as exc:
                raise _reject(i, basis, str(exc)) from None
        ms.add(dist)
    return ms


def dumps_measurements(ms: MeasurementSet) -> str:
    return json.dumps(measurement_set_to_dict(ms), sort_keys=True, indent=1) + "\n"


def save_measurements(ms: MeasurementSet, path: str | Path) -> None:
    Path(path).write_text(dumps_measurements(ms))


def load_measurements(path: str | Path) -> MeasurementSet:
    p = Path(path)
    try:
        obj = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p}: invalid JSON ({exc})") from None
    return measurement_set_from_dict(obj)


# ---------------------------------------------------------------------------
# Results CSV with embedded metadata comment lines
# ---------------------------------------------------------------------------


def format_results_csv(
    fieldnames: list[str],
    rows: Iterable[Mapping],
    metadata: Mapping | None = None,
) -> str:
    lines = []
    if metadata:
        lines.append("# " + json.dumps(metadata, sort_keys=True, separators=(",", ":")))
    lines.append(",".join(fieldnames))
    for row in rows:
        cells = []
        for name in fieldnames:
            v = row.get(name, "")
            if isinstance(v, float):
                cells.append(repr(v))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_results(
    fieldnames: list[str],
    rows: Iterable[Mapping],
    path: str | Path,
    metadata: Mapping | None = None,
) -> None:
    Path(path).write_text(format_results_csv(fieldnames, rows, metadata))
