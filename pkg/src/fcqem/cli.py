"""Command-line client for the experiment service.

Each subcommand assembles the same request payload the HTTP service
accepts and dispatches it in-process by default, or to a running server
with ``--server``.  Payloads may also be provided wholesale as JSON via
``--config``; explicitly passed flags override config-file fields.

Exit codes: 0 success, 2 config error, 3 input error, 4 capacity error.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click

EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_CAPACITY = 4


def _parse_angle(token: str) -> float:
    token = token.strip()
    if token.endswith("pi"):
        head = token[:-2].strip()
        if head in ("", "+"):
            return math.pi
        if head == "-":
            return -math.pi
        return float(head) * math.pi
    return float(token)


def _parse_range(text: str, what: str) -> list[float]:
    """Inclusive start:stop:step range; angle tokens may use pi literals."""
    parts = text.split(":")
    if len(parts) != 3:
        raise click.UsageError(f"{what} must look like start:stop:step, got {text!r}")
    try:
        start, stop, step = (_parse_angle(t) for t in parts)
    except ValueError:
        raise click.UsageError(f"cannot parse {what} {text!r}") from None
    if step < 0:
        raise click.UsageError(f"{what} step must be non-negative")
    if step == 0:
        if start == stop:
            return [start]
        raise click.UsageError(f"{what} has zero step over a nonzero span")
    out = []
    v = start
    eps = 1e-9 * max(1.0, abs(step))
    while v <= stop + eps:
        out.append(round(v, 12))
        v += step
    return out


def _parse_list(text: str, cast, what: str) -> list:
    try:
        return [cast(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise click.UsageError(f"cannot parse {what} {text!r}") from None


_NOISE_KEYS = {
    "readout": "readout_flip",
    "depol-global": "global_depolarizing",
    "depol-1q": "depol_1q",
    "depol-2q": "depol_2q",
    "pauli-x": "pauli_x",
    "pauli-y": "pauli_y",
    "pauli-z": "pauli_z",
}


def _parse_noise(pairs: tuple[str, ...]) -> dict:
    noise: dict[str, float] = {}
    for pair in pairs:
        key, _, value = pair.partition("=")
        field = _NOISE_KEYS.get(key.strip())
        if field is None or not value:
            raise click.UsageError(
                f"--noise expects key=value with key in {sorted(_NOISE_KEYS)}, got {pair!r}"
            )
        try:
            noise[field] = float(value)
        except ValueError:
            raise click.UsageError(f"invalid noise value in {pair!r}") from None
    return noise


def _parse_rotate_y(text: str) -> dict:
    out: dict = {}
    for item in text.split(","):
        key, _, value = item.partition("=")
        key = key.strip()
        if key == "q":
            out["qubit"] = int(value)
        elif key == "angle":
            out["angle"] = _parse_angle(value)
        else:
            raise click.UsageError(f"--rotate-y expects q=<int>[,angle=<rad>], got {text!r}")
    if "qubit" not in out:
        raise click.UsageError("--rotate-y needs q=<int>")
    return out


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(obj, dict):
        raise click.UsageError(f"config {path} must hold a JSON object")
    return obj


def _hamiltonian_fields(payload: dict, model, hamiltonian, n, j, h, periodic) -> None:
    if hamiltonian:
        try:
            payload["hamiltonian_text"] = Path(hamiltonian).read_text()
        except OSError as exc:
            _die(EXIT_INPUT, f"cannot read Hamiltonian file: {exc}")
        payload.pop("tfim", None)
    elif model:
        if model != "tfim":
            raise click.UsageError(f"unknown model {model!r} (only 'tfim')")
        if n is None:
            raise click.UsageError("--model tfim needs --n")
        payload["tfim"] = {
            "n": n,
            "j": 1.0 if j is None else j,
            "h": 0.0 if h is None else h,
            "periodic": bool(periodic),
        }
        payload.pop("hamiltonian_text", None)


def _trial_fields(payload: dict, trial: str | None) -> None:
    if trial is None:
        return
    if trial == "neel":
        payload["trial_kind"] = "neel"
        payload.pop("trial_circuit_text", None)
    else:
        try:
            payload["trial_circuit_text"] = Path(trial).read_text()
        except OSError as exc:
            _die(EXIT_INPUT, f"cannot read trial circuit: {exc}")
        payload["trial_kind"] = "circuit"


def _die(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _status_exit(status: int, body: str):
    detail = body
    try:
        parsed = json.loads(body)
        detail = json.dumps(parsed.get("detail", parsed), sort_keys=True)
    except (json.JSONDecodeError, AttributeError):
        pass
    if status == 413:
        _die(EXIT_CAPACITY, detail)
    if status == 422:
        _die(EXIT_CONFIG, detail)
    _die(EXIT_INPUT, detail)


def _dispatch(name: str, payload: dict, server: str | None) -> str:
    """Send the request to a remote server or the in-process service."""
    if server:
        import httpx

        resp = httpx.post(server.rstrip("/") + "/" + name, json=payload, timeout=None)
        if resp.status_code != 200:
            _status_exit(resp.status_code, resp.text)
        if resp.headers.get("content-type", "").startswith("application/json"):
            return json.dumps(json.loads(resp.text), indent=1, sort_keys=True) + "\n"
        return resp.text

    from fastapi import HTTPException
    from fastapi.responses import Response
    from pydantic import BaseModel, ValidationError

    from .service.schemas import (
        DumpDistRequest,
        GroundStateRequest,
        MitigateRequest,
        ScaleRequest,
        SweepRequest,
    )

    from .service import web

    handlers = {
        "sweep": (SweepRequest, web.sweep),
        "scale": (ScaleRequest, web.scale),
        "dump-dist": (DumpDistRequest, web.dump_dist),
        "mitigate": (MitigateRequest, web.mitigate),
        "ground-state": (GroundStateRequest, web.ground_state),
    }
    model, handler = handlers[name]
    try:
        req = model.model_validate(payload)
    except ValidationError as exc:
        raise click.UsageError(str(exc)) from None
    try:
        result = handler(req)
    except HTTPException as exc:
        detail = exc.detail if isinstance(exc.detail, str) else json.dumps(exc.detail, sort_keys=True)
        _status_exit(exc.status_code, detail)
    if isinstance(result, Response):
        return result.body.decode()
    if isinstance(result, BaseModel):
        result = result.model_dump()
    return json.dumps(result, indent=1, sort_keys=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _common_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(), help="JSON file with the full request payload")(fn)
    fn = click.option("--server", help="base URL of a running service; default runs in-process")(fn)
    fn = click.option("--out", type=click.Path(), help="output path (default: stdout)")(fn)
    return fn


@click.group()
def main():
    """Squared-distribution error mitigation toolkit."""


@main.command()
@click.option("--model", type=click.Choice(["tfim"]), default=None)
@click.option("--n", type=int, default=None)
@click.option("--j", type=float, default=None)
@click.option("--h", type=float, default=None)
@click.option("--periodic", is_flag=True, default=False)
@click.option("--hamiltonian", type=click.Path(), default=None, help="Hamiltonian text file")
@click.option("--trial", default=None, help="'neel' or a circuit file path")
@click.option("--rotate-y", "rotate_y", default=None, help="q=<int>[,angle=<rad>]")
@click.option("--h-range", default=None, help="field sweep start:stop:step")
@click.option("--theta-range", default=None, help="angle sweep start:stop:step (pi literals ok)")
@click.option("--depol-range", default=None, help="global-depolarizing sweep start:stop:step")
@click.option("--noise", multiple=True, help="key=value, e.g. readout=0.03, depol-2q=0.01")
@click.option("--shots", type=int, default=None, help="shots per basis (default 10000)")
@click.option("--exact", is_flag=True, default=False, help="use exact probabilities instead of shots")
@click.option("--seed", type=int, default=None)
@click.option("--correction", type=click.Choice(["per-basis", "global-z"]), default=None)
@click.option("--preferred-basis", default=None)
@click.option("--workers", type=int, default=None)
@_common_options
def sweep(model, n, j, h, periodic, hamiltonian, trial, rotate_y, h_range, theta_range,
          depol_range, noise, shots, exact, seed, correction, preferred_basis, workers,
          config_path, server, out):
    """Sweep a field strength, trial-rotation angle, or depolarization."""
    payload = _load_config(config_path)
    _hamiltonian_fields(payload, model, hamiltonian, n, j, h, periodic)
    _trial_fields(payload, trial)
    ranges = [r for r in ((h_range, "h"), (theta_range, "theta"), (depol_range, "depol")) if r[0]]
    if len(ranges) > 1:
        raise click.UsageError("give at most one of --h-range/--theta-range/--depol-range")
    if ranges:
        text, kind = ranges[0]
        payload["sweep"] = {"kind": kind, "values": _parse_range(text, f"--{kind}-range")}
    if "sweep" not in payload:
        raise click.UsageError("a sweep range is required (flag or config)")
    if rotate_y:
        payload["rotate_y"] = _parse_rotate_y(rotate_y)
    if noise:
        payload["noise"] = {**payload.get("noise", {}), **_parse_noise(noise)}
    if exact:
        payload["shots"] = None
    elif shots is not None:
        payload["shots"] = shots
    for key, value in (("seed", seed), ("workers", workers)):
        if value is not None:
            payload[key] = value
    if correction or preferred_basis:
        cf = dict(payload.get("correction", {}))
        if correction:
            cf["mode"] = correction
        if preferred_basis:
            cf["preferred_basis"] = preferred_basis
        payload["correction"] = cf
    _emit(_dispatch("sweep", payload, server), out)


@main.command()
@click.option("--n-list", default=None, help="comma list of qubit counts, e.g. 16,64,256")
@click.option("--rates", default=None, help="comma list of total error rates")
@click.option("--shots", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--bias", type=float, default=None, help="dephasing bias ratio (default 10)")
@click.option("--trial", default=None, help="Clifford circuit file (default: alternating-spin state)")
@click.option("--workers", type=int, default=None)
@_common_options
def scale(n_list, rates, shots, seed, bias, trial, workers, config_path, server, out):
    """Pauli-frame scaling study of the full-register spin correlation."""
    payload = _load_config(config_path)
    if n_list:
        payload["n_list"] = _parse_list(n_list, int, "--n-list")
    if rates:
        payload["rates"] = [float(_parse_angle(t)) for t in rates.split(",") if t.strip()]
    if trial and trial != "neel":
        try:
            payload["trial_circuit_text"] = Path(trial).read_text()
        except OSError as exc:
            _die(EXIT_INPUT, f"cannot read trial circuit: {exc}")
    for key, value in (("shots", shots), ("seed", seed), ("bias", bias), ("workers", workers)):
        if value is not None:
            payload[key] = value
    if "n_list" not in payload or "rates" not in payload:
        raise click.UsageError("--n-list and --rates are required (flag or config)")
    _emit(_dispatch("scale", payload, server), out)


@main.command()
@click.option("--model", type=click.Choice(["tfim"]), default=None)
@click.option("--n", type=int, default=None)
@click.option("--j", type=float, default=None)
@click.option("--h", type=float, default=None)
@click.option("--periodic", is_flag=True, default=False)
@click.option("--hamiltonian", type=click.Path(), default=None)
@click.option("--measurements", type=click.Path(), default=None, help="measurement JSON file")
@click.option("--measurements2", type=click.Path(), default=None, help="second copy for two-copy mode")
@click.option("--preferred-basis", default=None)
@_common_options
def mitigate(model, n, j, h, periodic, hamiltonian, measurements, measurements2,
             preferred_basis, config_path, server, out):
    """Correct expectation values from externally supplied measurement data."""
    payload = _load_config(config_path)
    _hamiltonian_fields(payload, model, hamiltonian, n, j, h, periodic)
    for key, path in (("measurements", measurements), ("measurements2", measurements2)):
        if path:
            try:
                payload[key] = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                _die(EXIT_INPUT, f"cannot read {key} file: {exc}")
    if preferred_basis:
        cf = dict(payload.get("correction", {}))
        cf["preferred_basis"] = preferred_basis
        payload["correction"] = cf
    if "measurements" not in payload:
        raise click.UsageError("--measurements is required (flag or config)")
    _emit(_dispatch("mitigate", payload, server), out)


@main.command(name="dump-dist")
@click.option("--n", type=int, default=None)
@click.option("--trial", default=None, help="'neel' or a circuit file path")
@click.option("--rotate-y", "rotate_y", default=None, help="q=<int>,angle=<rad>")
@click.option("--noise", multiple=True)
@click.option("--shots", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--basis", default=None)
@click.option("--threshold", type=float, default=None, help="omit rows below this probability (default 0.005)")
@click.option("--measurements", type=click.Path(), default=None)
@_common_options
def dump_dist(n, trial, rotate_y, noise, shots, seed, basis, threshold, measurements,
              config_path, server, out):
    """Dump raw vs squared-normalized outcome probabilities."""
    payload = _load_config(config_path)
    _trial_fields(payload, trial)
    if measurements:
        try:
            payload["measurements"] = json.loads(Path(measurements).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            _die(EXIT_INPUT, f"cannot read measurements file: {exc}")
    if rotate_y:
        payload["rotate_y"] = _parse_rotate_y(rotate_y)
    if noise:
        payload["noise"] = {**payload.get("noise", {}), **_parse_noise(noise)}
    for key, value in (("n", n), ("shots", shots), ("seed", seed), ("basis", basis),
                       ("threshold", threshold)):
        if value is not None:
            payload[key] = value
    _emit(_dispatch("dump-dist", payload, server), out)


@main.command(name="ground-state")
@click.option("--model", type=click.Choice(["tfim"]), default=None)
@click.option("--n", type=int, default=None)
@click.option("--j", type=float, default=None)
@click.option("--h", type=float, default=None)
@click.option("--periodic", is_flag=True, default=False)
@click.option("--hamiltonian", type=click.Path(), default=None)
@_common_options
def ground_state(model, n, j, h, periodic, hamiltonian, config_path, server, out):
    """Exact diagonalization ground-state energy."""
    payload = _load_config(config_path)
    _hamiltonian_fields(payload, model, hamiltonian, n, j, h, periodic)
    _emit(_dispatch("ground-state", payload, server), out)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("fcqem.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
