"""FastAPI web service for system approximation experiments.

This module exposes the harness experiments over HTTP: a request body is a
partial experiment config merged over the bank defaults, and the report
comes back as JSON or as the same CSV the command line writes.
"""

import asyncio
import json
import os
import time
from datetime import datetime
from typing import Any, Dict, List, Optional

import uvicorn
from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, Field, ValidationError

# Google Cloud Storage for experiment bank loading
try:
    from google.cloud import storage
    GCS_AVAILABLE = True
except ImportError:
    GCS_AVAILABLE = False

from SignalModel.errors import ApproxInputError, GramDiagnosticError, SequenceRangeError, TruncationConfigError
from SystemApprox import __version__
from SystemApprox.approximator import ENGINE_REGISTRY, worker_count
from experiments import EXPERIMENTS, DEFAULT_BANK_PATH, load_experiment_bank, resolve_config, run_experiment


class ExperimentResponse(BaseModel):
    """Response model for an experiment run."""
    success: bool
    experiment: str
    columns: List[str]
    rows: List[Dict[str, Any]]
    notes: List[str]
    config: Dict[str, Any]
    runtime_seconds: float
    timestamp: str

    model_config = {
        "json_schema_extra": {
            "example": {
                "success": True,
                "experiment": "lebesgue",
                "columns": ["row", "N", "lebesgue"],
                "rows": [{"row": "stage", "N": 0, "lebesgue": 1.0}],
                "notes": [],
                "config": {"experiment": "lebesgue", "grid": 4096},
                "runtime_seconds": 0.12,
                "timestamp": "2026-01-01T00:00:00Z",
            }
        }
    }


class HealthResponse(BaseModel):
    """Health check response model."""
    status: str
    timestamp: str
    available_experiments: List[str]
    threads: int
    version: str


class ErrorResponse(BaseModel):
    """Error response model."""
    success: bool
    error: str
    timestamp: str


class BankReloadRequest(BaseModel):
    """Request model for swapping the experiment bank."""
    bank_path: Optional[str] = Field(default=None, description="Local path or gs:// URL; default bank when omitted")


app = FastAPI(
    title="PW Approximation API",
    description="REST API for sampling-based and measurement-based system approximation experiments",
    version=__version__,
    docs_url="/docs",
    redoc_url="/redoc",
)

# Google Cloud Storage configuration
GCS_BUCKET_NAME = os.getenv("GCS_BUCKET_NAME")
GCS_CONFIG_PATH = os.getenv("GCS_CONFIG_PATH", "config/experiment_bank.json")

app.state.experiment_bank = None


def _timestamp() -> str:
    return datetime.utcnow().isoformat() + "Z"


def _gcs_bank_url() -> Optional[str]:
    if GCS_AVAILABLE and GCS_BUCKET_NAME:
        return f"gs://{GCS_BUCKET_NAME}/{GCS_CONFIG_PATH}"
    return None


def get_experiment_bank() -> Dict[str, Any]:
    """Experiment bank from the cache, loading the local default if empty."""
    if app.state.experiment_bank is None:
        try:
            app.state.experiment_bank = load_experiment_bank()
        except Exception as e:
            raise HTTPException(status_code=500, detail=f"Failed to load experiment bank: {str(e)}")
    return app.state.experiment_bank


@app.on_event("startup")
async def startup_event():
    """Preload the experiment bank, GCS first when configured."""
    url = _gcs_bank_url()
    if url:
        try:
            app.state.experiment_bank = load_experiment_bank(url)
            print(f"✅ Experiment bank loaded from GCS: {url}")
        except Exception as e:
            print(f"⚠️  Could not preload from GCS: {e}")

    if app.state.experiment_bank is None:
        try:
            app.state.experiment_bank = load_experiment_bank()
            print(f"✅ Experiment bank loaded from local file: {os.getenv('PWAPPROX_BANK_PATH') or DEFAULT_BANK_PATH}")
        except Exception as e:
            print(f"⚠️  Could not load local experiment bank: {e}")


@app.on_event("shutdown")
async def shutdown_event():
    app.state.experiment_bank = None


@app.get("/")
async def root():
    """Root endpoint with API information."""
    return {
        "message": "PW Approximation API",
        "version": __version__,
        "docs": "/docs",
        "health": "/health",
        "endpoints": {
            "run_experiment": "POST /experiments/{kind}",
            "experiments": "GET /experiments",
            "reload_bank": "POST /experiments/reload",
            "engines": "GET /engines",
        },
    }


@app.get("/health", response_model=HealthResponse)
async def health_check():
    """Health check endpoint."""
    return HealthResponse(
        status="healthy",
        timestamp=_timestamp(),
        available_experiments=list(EXPERIMENTS),
        threads=worker_count(),
        version=__version__,
    )


@app.get("/engines")
async def list_engines():
    """List registered approximation engines."""
    return {
        "engines": {
            name: {"class": cls.__name__, "description": (cls.__doc__ or "").strip().splitlines()[0]}
            for name, cls in ENGINE_REGISTRY.items()
        }
    }


@app.get("/experiments")
async def list_experiments():
    """Bank defaults for every experiment kind."""
    bank = get_experiment_bank()
    return {"experiments": {kind: bank.get(kind, {}) for kind in EXPERIMENTS}}


@app.post("/experiments/reload")
async def reload_bank(request: BankReloadRequest):
    """Replace the cached experiment bank."""
    try:
        app.state.experiment_bank = load_experiment_bank(request.bank_path)
    except FileNotFoundError as e:
        raise HTTPException(status_code=404, detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=400, detail=f"Failed to load experiment bank: {str(e)}")
    return {"success": True, "experiments": sorted(app.state.experiment_bank)}


@app.post("/experiments/{kind}", response_model=ExperimentResponse)
async def run_experiment_endpoint(
    kind: str,
    overrides: Optional[Dict[str, Any]] = None,
    format: str = Query(default="json", pattern="^(json|csv)$", description="Response format"),
):
    """
    Run one experiment.

    Args:
        kind: Experiment kind, e.g. ``lebesgue`` or ``divergence``.
        overrides: Partial experiment config merged over the bank defaults.
        format: ``json`` for rows, ``csv`` for the harness CSV.

    Returns:
        The experiment report.
    """
    if kind not in EXPERIMENTS:
        raise HTTPException(status_code=404, detail=f"Unknown experiment '{kind}'. Available experiments: {list(EXPERIMENTS)}")
    overrides = dict(overrides or {})
    # Output paths are a command-line concern.
    overrides.pop("out", None)
    overrides.pop("gram_out", None)

    try:
        config = resolve_config(kind, None, overrides, bank=get_experiment_bank())
    except ValidationError as e:
        detail = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
        raise HTTPException(status_code=400, detail=f"Invalid config: {detail}")

    start = time.time()
    try:
        report = await asyncio.to_thread(run_experiment, config)
    except (ApproxInputError, SequenceRangeError, TruncationConfigError, GramDiagnosticError) as e:
        raise HTTPException(status_code=400, detail=f"{kind}: {str(e)}")
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Internal server error: {str(e)}")
    runtime = time.time() - start

    if format == "csv":
        return PlainTextResponse(report.to_csv(), media_type="text/csv")
    return ExperimentResponse(
        success=True,
        experiment=report.experiment,
        columns=report.columns,
        rows=[{c: row.get(c) for c in report.columns} for row in report.rows],
        notes=report.notes,
        config=report.config,
        runtime_seconds=round(runtime, 3),
        timestamp=_timestamp(),
    )


# Error handlers
@app.exception_handler(HTTPException)
async def http_exception_handler(request, exc):
    return JSONResponse(
        status_code=exc.status_code,
        content=ErrorResponse(success=False, error=str(exc.detail), timestamp=_timestamp()).model_dump(),
    )


@app.exception_handler(Exception)
async def general_exception_handler(request, exc):
    return JSONResponse(
        status_code=500,
        content=ErrorResponse(success=False, error=f"Internal server error: {str(exc)}", timestamp=_timestamp()).model_dump(),
    )


if __name__ == "__main__":
    port = int(os.getenv("PORT", 8080))
    uvicorn.run(app, host="0.0.0.0", port=port)
