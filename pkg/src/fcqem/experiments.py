"""Experiment drivers behind the service endpoints and CLI.

Each driver resolves its inputs (model parameters or file contents pass
inline), runs the simulation/post-processing, and returns plain rows and
metadata ready for CSV/JSON serialization.  Sweep points are independent
and may be dispatched to a process pool; output order follows the sweep
parameter regardless of completion order.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .circuits import Circuit, neel_circuit
from .errors import CapacityError, MissingMeasurementError
from .frame import (
    PauliNoiseSpec,
    corrected_spin_correlation,
    frame_sample,
    noiseless_spin_correlation,
    spin_correlation,
)
from .io import loads_circuit, loads_hamiltonian
from .mitigation import (
    GLOBAL_Z,
    PER_BASIS,
    TWO_COPY,
    CorrectedValue,
    FcqemConfig,
    fcqem_expectation,
    raw_expectation,
    square_normalize,
)
from .models import TfimSpec, build_tfim
from .pauli import PauliSum
from .qcm import qcm_from_measurements, required_bases
from .simulator import NoiseModel, exact_ground_state, measure_probs, measure_tpbs, run_circuit, run_noisy
from .states import MeasurementSet, all_z

SWEEP_FIELDS = [
    "param",
    "raw",
    "fcqem",
    "qcm",
    "fcqem_qcm",
    "exact",
    "qcm_status",
    "fcqem_qcm_status",
    "fcqem_out_of_range",
]

SCALE_FIELDS = [
    "num_qubits",
    "rate",
    "noise_free",
    "raw",
    "fcqem",
    "raw_error",
    "fcqem_error",
    "runtime_s",
]

DUMP_FIELDS = ["outcome", "raw_prob", "corrected_prob"]


def point_seed(seed: int, index: int) -> int:
    """Per-point substream seed derived from (seed, point index)."""
    ss = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, index])
    return int(ss.generate_state(1, np.uint64)[0])


def resolve_hamiltonian(
    tfim: dict | None, text: str | None, h_override: float | None = None
) -> PauliSum:
    if (tfim is None) == (text is None):
        raise ValueError("exactly one Hamiltonian source (tfim or text) must be given")
    if tfim is not None:
        spec = TfimSpec.chain(
            int(tfim["n"]),
            float(tfim.get("j", 1.0)),
            float(tfim["h"] if h_override is None else h_override),
            periodic=bool(tfim.get("periodic", False)),
        )
        return build_tfim(spec)
    if h_override is not None:
        raise ValueError("field-strength sweeps need a tfim Hamiltonian source")
    return loads_hamiltonian(text, source="<hamiltonian>")


def resolve_trial(
    kind: str,
    circuit_text: str | None,
    num_qubits: int,
    rotate_y: dict | None = None,
    theta_override: float | None = None,
) -> Circuit:
    if kind == "neel":
        c = neel_circuit(num_qubits)
    elif kind == "circuit":
        if not circuit_text:
            raise ValueError("trial kind 'circuit' needs circuit text")
        c = loads_circuit(circuit_text, num_qubits, source="<trial>")
    else:
        raise ValueError(f"unknown trial kind {kind!r}")
    if theta_override is not None and rotate_y is None:
        raise ValueError("theta sweeps need a rotate_y qubit")
    if rotate_y is not None:
        angle = rotate_y.get("angle") if theta_override is None else theta_override
        if angle is None:
            raise ValueError("rotate_y needs an angle (or a theta sweep)")
        c = Circuit(num_qubits, list(c.gates))
        c.add("RY", int(rotate_y["qubit"]), angle=float(angle))
    return c


def _noise_model(noise: dict | None, depol_override: float | None = None) -> NoiseModel:
    noise = dict(noise or {})
    if depol_override is not None:
        noise["global_depolarizing"] = depol_override
    return NoiseModel(
        global_depolarizing=float(noise.get("global_depolarizing", 0.0)),
        depol_1q=float(noise.get("depol_1q", 0.0)),
        depol_2q=float(noise.get("depol_2q", 0.0)),
        readout_flip=float(noise.get("readout_flip", 0.0)),
        pauli_x=float(noise.get("pauli_x", 0.0)),
        pauli_y=float(noise.get("pauli_y", 0.0)),
        pauli_z=float(noise.get("pauli_z", 0.0)),
    )


def _correction_config(correction: dict | None) -> FcqemConfig:
    correction = dict(correction or {})
    return FcqemConfig(
        mode=correction.get("mode", PER_BASIS),
        preferred_basis=correction.get("preferred_basis"),
        copy_mode=correction.get("copy_mode", "self-square"),
    )


def simulate_measurements(
    h: PauliSum,
    circuit: Circuit,
    nm: NoiseModel,
    shots: int | None,
    seed: int,
) -> MeasurementSet:
    bases = set(required_bases(h))
    bases.add(all_z(h.num_qubits))
    state = run_noisy(circuit, nm) if nm.has_channel_noise else run_circuit(circuit)
    return measure_tpbs(state, sorted(bases), nm, shots, seed)


def _sweep_point(args: tuple[dict, int]) -> dict:
    req, index = args
    kind = req["sweep"]["kind"]
    value = float(req["sweep"]["values"][index])
    h_override = value if kind == "h" else None
    theta_override = value if kind == "theta" else None
    depol_override = value if kind == "depol" else None

    ham = resolve_hamiltonian(req.get("tfim"), req.get("hamiltonian_text"), h_override)
    circuit = resolve_trial(
        req.get("trial_kind", "neel"),
        req.get("trial_circuit_text"),
        ham.num_qubits,
        req.get("rotate_y"),
        theta_override,
    )
    nm = _noise_model(req.get("noise"), depol_override)
    cfg = _correction_config(req.get("correction"))
    seed = int(req.get("seed", 0))
    shots = req.get("shots")
    ms = simulate_measurements(ham, circuit, nm, shots, point_seed(seed, index))

    raw = raw_expectation(ms, ham)
    corrected = fcqem_expectation(ms, ham, cfg)
    est_plain = qcm_from_measurements(ms, ham)
    est_corr = qcm_from_measurements(ms, ham, cfg)
    try:
        exact = exact_ground_state(ham)[0]
    except CapacityError:
        exact = ""
    return {
        "param": value,
        "raw": raw,
        "fcqem": corrected.value,
        "qcm": est_plain.energy,
        "fcqem_qcm": est_corr.energy,
        "exact": exact,
        "qcm_status": est_plain.status,
        "fcqem_qcm_status": est_corr.status,
        "fcqem_out_of_range": corrected.out_of_range,
    }


def _run_points(worker, args_list, workers: int | None):
    n_points = len(args_list)
    if workers is None:
        workers = os.cpu_count() or 1
    workers = max(1, min(workers, n_points)) if n_points else 1
    if workers <= 1 or n_points <= 1:
        return [worker(a) for a in args_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, args_list))


def run_sweep(req: dict) -> tuple[list[str], list[dict], dict]:
    values = list(req["sweep"]["values"])
    if req["sweep"]["kind"] not in ("h", "theta", "depol"):
        raise ValueError(f"unknown sweep kind {req['sweep']['kind']!r}")
    # fail fast on config conflicts before any simulation
    resolve_hamiltonian(
        req.get("tfim"),
        req.get("hamiltonian_text"),
        0.0 if req["sweep"]["kind"] == "h" else None,
    )
    if req["sweep"]["kind"] == "theta" and not req.get("rotate_y"):
        raise ValueError("theta sweeps need a rotate_y qubit")
    args = [(req, i) for i in range(len(values))]
    rows = _run_points(_sweep_point, args, req.get("workers"))
    rows.sort(key=lambda r: r["param"])
    meta = {"version": __version__, "seed": req.get("seed", 0), "config": _public_config(req)}
    return SWEEP_FIELDS, rows, meta


_BULK_FIELDS = ("measurements", "measurements2", "hamiltonian_text", "trial_circuit_text")


def _public_config(req: dict) -> dict:
    """Config for output metadata; bulk payloads collapse to fingerprints."""
    out = {}
    for k, v in sorted(req.items()):
        if v is None:
            continue
        if k in _BULK_FIELDS:
            blob = v if isinstance(v, str) else json.dumps(v, sort_keys=True)
            out[k + "_sha256"] = hashlib.sha256(blob.encode()).hexdigest()
        else:
            out[k] = v
    return out


# ---------------------------------------------------------------------------
# Scaling experiment (Pauli-frame path)
# ---------------------------------------------------------------------------


def _scale_point(args: tuple[dict, int]) -> dict:
    req, index = args
    grid = req["grid"]
    n, rate = grid[index]
    trial_text = req.get("trial_circuit_text")
    if trial_text:
        circuit = loads_circuit(trial_text, n, source="<trial>")
    else:
        circuit = neel_circuit(n)
    if not circuit.is_clifford:
        raise ValueError("scaling runs accept Clifford trial circuits only")
    noise = PauliNoiseSpec.biased(float(rate), float(req.get("bias", 10.0)))
    seed = point_seed(int(req.get("seed", 0)), index)
    t0 = time.monotonic()
    dist = frame_sample(circuit, noise, int(req.get("shots", 100_000)), seed)
    raw = spin_correlation(dist)
    corrected = corrected_spin_correlation(dist)
    runtime = time.monotonic() - t0
    noise_free = noiseless_spin_correlation(circuit)
    return {
        "num_qubits": n,
        "rate": rate,
        "noise_free": noise_free,
        "raw": raw,
        "fcqem": corrected,
        "raw_error": abs(raw - noise_free),
        "fcqem_error": abs(corrected - noise_free),
        "runtime_s": round(runtime, 3),
    }


def run_scale(req: dict) -> tuple[list[str], list[dict], dict]:
    ns = [int(v) for v in req["n_list"]]
    rates = [float(v) for v in req["rates"]]
    grid = [(n, r) for n in ns for r in rates]
    work = dict(req)
    work["grid"] = grid
    args = [(work, i) for i in range(len(grid))]
    rows = _run_points(_scale_point, args, req.get("workers"))
    rows.sort(key=lambda r: (r["num_qubits"], r["rate"]))
    meta = {"version": __version__, "seed": req.get("seed", 0), "config": _public_config(req)}
    return SCALE_FIELDS, rows, meta


# ---------------------------------------------------------------------------
# Distribution dump
# ---------------------------------------------------------------------------


def run_dump_dist(req: dict) -> tuple[list[str], list[dict], dict]:
    basis = req.get("basis")
    threshold = float(req.get("threshold", 0.005))
    if req.get("measurements") is not None:
        from .io import measurement_set_from_dict

        ms = measurement_set_from_dict(req["measurements"])
        basis = basis or all_z(ms.num_qubits)
        dist = ms.require(basis)
    else:
        n = int(req["n"])
        circuit = resolve_trial(
            req.get("trial_kind", "neel"),
            req.get("trial_circuit_text"),
            n,
            req.get("rotate_y"),
        )
        nm = _noise_model(req.get("noise"))
        basis = basis or all_z(n)
        state = run_noisy(circuit, nm) if nm.has_channel_noise else run_circuit(circuit)
        dist = measure_probs(state, basis, nm)
        if req.get("shots"):
            from .simulator import sample

            dist = sample(dist, int(req["shots"]), point_seed(int(req.get("seed", 0)), 0))
    corrected = square_normalize(dist)
    rows = []
    for outcome, p in sorted(dist.items()):
        q = corrected.probability(outcome)
        if max(p, q) < threshold:
            continue
        rows.append({"outcome": outcome, "raw_prob": p, "corrected_prob": q})
    meta = {"version": __version__, "seed": req.get("seed", 0), "config": _public_config(req)}
    return DUMP_FIELDS, rows, meta


# ---------------------------------------------------------------------------
# Post-processing of external measurement data
# ---------------------------------------------------------------------------


def _corrected_dict(cv: CorrectedValue) -> dict:
    return {
        "value": cv.value,
        "numerator": cv.numerator,
        "denominator": cv.denominator,
        "mode": cv.mode,
        "out_of_range": cv.out_of_range,
    }


def _qcm_dict(ms, ham, cfg, ms2=None) -> dict:
    try:
        est = qcm_from_measurements(ms, ham, cfg, ms2)
    except MissingMeasurementError as exc:
        return {"error": "missing measurement bases", "missing": exc.missing}
    return {
        "energy": est.energy,
        "status": est.status,
        "radicand": est.radicand,
        "denominator": est.denominator,
    }


def run_mitigate(req: dict) -> dict:
    from .io import measurement_set_from_dict

    ham = resolve_hamiltonian(req.get("tfim"), req.get("hamiltonian_text"))
    ms = measurement_set_from_dict(req["measurements"])
    ms2 = None
    if req.get("measurements2") is not None:
        ms2 = measurement_set_from_dict(req["measurements2"])
    preferred = (req.get("correction") or {}).get("preferred_basis")

    out: dict = {
        "num_qubits": ham.num_qubits,
        "raw": raw_expectation(ms, ham),
        "metadata": {"version": __version__, "config": _public_config(req)},
    }
    per_basis = FcqemConfig(mode=PER_BASIS, preferred_basis=preferred)
    global_z = FcqemConfig(mode=GLOBAL_Z, preferred_basis=preferred)
    out["fcqem_per_basis"] = _corrected_dict(fcqem_expectation(ms, ham, per_basis))
    try:
        out["fcqem_global_z"] = _corrected_dict(fcqem_expectation(ms, ham, global_z))
    except MissingMeasurementError as exc:
        out["fcqem_global_z"] = {"error": "missing measurement bases", "missing": exc.missing}
    out["qcm"] = _qcm_dict(ms, ham, None)
    out["fcqem_qcm"] = _qcm_dict(ms, ham, per_basis)
    if ms2 is not None:
        two = FcqemConfig(mode=PER_BASIS, preferred_basis=preferred, copy_mode=TWO_COPY)
        out["fcqem_two_copy"] = _corrected_dict(fcqem_expectation(ms, ham, two, ms2))
        out["fcqem_qcm_two_copy"] = _qcm_dict(ms, ham, two, ms2)
    return out


def run_ground_state(req: dict) -> dict:
    ham = resolve_hamiltonian(req.get("tfim"), req.get("hamiltonian_text"))
    energy, _ = exact_ground_state(ham)
    return {
        "num_qubits": ham.num_qubits,
        "energy": energy,
        "metadata": {"version": __version__, "config": _public_config(req)},
    }
