"""HTTP service wrapping the sweep/scale/mitigation drivers.

CSV-producing endpoints return text/csv with metadata comment lines
embedded; post-processing endpoints return JSON.  Error mapping:
400 for malformed inputs or missing measurement bases, 413 for requests
beyond the dense-simulation capacity, 422 for schema violations.
"""

from __future__ import annotations

from contextlib import contextmanager

from fastapi import FastAPI, HTTPException, Response

from .. import __version__
from ..errors import CapacityError, DegenerateInputError, MissingMeasurementError, ParseError
from ..experiments import run_dump_dist, run_ground_state, run_mitigate, run_scale, run_sweep
from ..io import format_results_csv
from .schemas import (
    DumpDistRequest,
    GroundStateRequest,
    GroundStateResponse,
    HealthResponse,
    MitigateRequest,
    ScaleRequest,
    SweepRequest,
)

app = FastAPI(title="fcqem", version=__version__)


@contextmanager
def _translate_errors():
    try:
        yield
    except MissingMeasurementError as exc:
        raise HTTPException(400, {"error": str(exc), "missing": exc.missing}) from exc
    except CapacityError as exc:
        raise HTTPException(413, str(exc)) from exc
    except (ParseError, DegenerateInputError, ValueError) as exc:
        raise HTTPException(400, str(exc)) from exc


def _csv_response(fields, rows, meta) -> Response:
    return Response(format_results_csv(fields, rows, meta), media_type="text/csv")


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/sweep")
def sweep(req: SweepRequest) -> Response:
    with _translate_errors():
        fields, rows, meta = run_sweep(req.model_dump())
    return _csv_response(fields, rows, meta)


@app.post("/scale")
def scale(req: ScaleRequest) -> Response:
    with _translate_errors():
        fields, rows, meta = run_scale(req.model_dump())
    return _csv_response(fields, rows, meta)


@app.post("/dump-dist")
def dump_dist(req: DumpDistRequest) -> Response:
    with _translate_errors():
        fields, rows, meta = run_dump_dist(req.model_dump())
    return _csv_response(fields, rows, meta)


@app.post("/mitigate")
def mitigate(req: MitigateRequest) -> dict:
    with _translate_errors():
        return run_mitigate(req.model_dump())


@app.post("/ground-state", response_model=GroundStateResponse)
def ground_state(req: GroundStateRequest) -> GroundStateResponse:
    with _translate_errors():
        return GroundStateResponse(**run_ground_state(req.model_dump()))
