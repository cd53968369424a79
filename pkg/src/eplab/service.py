"""Read-mostly HTTP API over a repository root.

The service is stateless above the content-addressed store: every
persisted artifact is reachable at one canonical URL keyed by digest, so
a restart preserves all URLs and results.  The stateless /model/eval
endpoint evaluates analytic curves for the explorer's what-if panel.

    GET  /api/v1                              descriptor
    GET  /api/v1/sweeps                       persisted sweeps
    GET  /api/v1/sweeps/{digest}/points       paginated sweep points
    GET  /api/v1/sweeps/{digest}/markers      min-energy / min-latency / best-efficiency
    GET  /api/v1/traces                       persisted traces
    GET  /api/v1/traces/{digest}/window       paginated windowed aggregates
    POST /api/v1/model/eval                   normalized curves for a scenario
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import tracelog
from .config import ConfigError, parse_scenario
from .model import curve_sweep
from .repo import Repository, UnknownDigestError
from .sweep import find_markers, read_sweep_file

API_VERSION = 1
DEFAULT_LIMIT = 500
MAX_LIMIT = 5000

ENDPOINTS = [
    "GET /api/v1",
    "GET /api/v1/sweeps",
    "GET /api/v1/sweeps/{digest}/points",
    "GET /api/v1/sweeps/{digest}/markers",
    "GET /api/v1/traces",
    "GET /api/v1/traces/{digest}/window",
    "POST /api/v1/model/eval",
]


def _markers_json(markers):
    out = {"min_energy": markers.min_energy.to_json_obj(),
           "min_latency": markers.min_latency.to_json_obj()}
    if markers.best_efficiency is not None:
        out["best_efficiency"] = markers.best_efficiency.to_json_obj()
    return out


def _window_json(w):
    return {"t0_us": w.t0_us, "t1_us": w.t1_us, "interrupts": w.interrupts,
            "rx_bytes": w.rx_bytes, "tx_bytes": w.tx_bytes,
            "rx_descriptors": w.rx_descriptors, "tx_descriptors": w.tx_descriptors,
            "sleep_entries": w.sleep_entries,
            "sleep_residency_us": w.sleep_residency_us,
            "joules": w.joules, "instructions": w.instructions, "cycles": w.cycles}


def create_app(repo_root, ui_dir=None) -> FastAPI:
    repo = Repository(repo_root)
    app = FastAPI(title="eplab service", version=str(API_VERSION))
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    sweep_cache: dict[str, object] = {}
    trace_cache: dict[str, object] = {}

    def load_sweep(digest: str):
        try:
            digest = repo.resolve(digest)
        except UnknownDigestError:
            raise HTTPException(status_code=404, detail=f"unknown sweep {digest}")
        if digest not in sweep_cache:
            info = repo.info(digest)
            if info.kind != "sweep":
                raise HTTPException(status_code=404,
                                    detail=f"{digest} is a {info.kind}, not a sweep")
            sweep_cache[digest] = read_sweep_file(repo.get_text(digest))
        return digest, sweep_cache[digest]

    def load_trace(digest: str):
        try:
            digest = repo.resolve(digest)
        except UnknownDigestError:
            raise HTTPException(status_code=404, detail=f"unknown trace {digest}")
        if digest not in trace_cache:
            info = repo.info(digest)
            if info.kind != "trace":
                raise HTTPException(status_code=404,
                                    detail=f"{digest} is a {info.kind}, not a trace")
            trace_cache[digest] = tracelog.parse_stream(repo.get_text(digest))
        return digest, trace_cache[digest]

    @app.get("/api/v1")
    def descriptor():
        return {"schema_version": API_VERSION, "endpoints": ENDPOINTS,
                "pagination": {"offset": 0, "default_limit": DEFAULT_LIMIT,
                               "max_limit": MAX_LIMIT}}

    @app.get("/api/v1/sweeps")
    def list_sweeps():
        out = []
        for info in repo.list("sweep"):
            _, sweep = load_sweep(info.digest)
            out.append({"digest": info.digest, "names": list(info.names),
                        "workload_kind": sweep.workload_kind,
                        "points": len(sweep.points), "grid": sweep.grid})
        return {"schema_version": API_VERSION, "sweeps": out}

    @app.get("/api/v1/sweeps/{digest}/points")
    def get_sweep_points(digest: str,
                         offset: int = Query(0, ge=0),
                         limit: int = Query(DEFAULT_LIMIT, ge=1, le=MAX_LIMIT)):
        digest, sweep = load_sweep(digest)
        page = sweep.points[offset:offset + limit]
        return {"schema_version": API_VERSION, "digest": digest,
                "total": len(sweep.points), "offset": offset,
                "workload_kind": sweep.workload_kind,
                "points": [p.to_json_obj() for p in page]}

    @app.get("/api/v1/sweeps/{digest}/markers")
    def get_markers(digest: str):
        digest, sweep = load_sweep(digest)
        markers = find_markers(sweep.points, sweep.workload_kind)
        return {"schema_version": API_VERSION, "digest": digest,
                "workload_kind": sweep.workload_kind,
                "markers": _markers_json(markers)}

    @app.get("/api/v1/traces")
    def list_traces():
        out = []
        for info in repo.list("trace"):
            _, stream = load_trace(info.digest)
            out.append({"digest": info.digest, "names": list(info.names),
                        "span_us": stream.span_us,
                        "interrupts": len(stream.interrupts),
                        "itr_ticks": stream.header.itr_ticks,
                        "seed": stream.header.seed,
                        "config_digest": stream.header.config_digest})
        return {"schema_version": API_VERSION, "traces": out}

    @app.get("/api/v1/traces/{digest}/window")
    def get_trace_window(digest: str, window_us: float = Query(..., gt=0.0),
                         offset: int = Query(0, ge=0),
                         limit: int = Query(DEFAULT_LIMIT, ge=1, le=MAX_LIMIT)):
        digest, stream = load_trace(digest)
        windows = tracelog.aggregate(stream, window_us)
        page = windows[offset:offset + limit]
        total = tracelog.totals(stream)
        return {"schema_version": API_VERSION, "digest": digest,
                "window_us": window_us, "total_windows": len(windows),
                "offset": offset, "span_us": stream.span_us,
                "itr_ticks": stream.header.itr_ticks,
                "windows": [_window_json(w) for w in page],
                "totals": _window_json(total)}

    @app.post("/api/v1/model/eval")
    def eval_model(body: dict):
        unknown = set(body) - {"scenario", "delta_grid"}
        if unknown:
            return JSONResponse(status_code=400, content={
                "error": {"field": sorted(unknown)[0], "message": "unknown key"}})
        try:
            scenario = parse_scenario(body.get("scenario", {}), "scenario")
        except ConfigError as e:
            return JSONResponse(status_code=400, content={
                "error": {"field": e.path, "message": e.reason}})
        grid = body.get("delta_grid")
        if not isinstance(grid, list) or not grid or not all(
                isinstance(d, (int, float)) and not isinstance(d, bool) for d in grid):
            return JSONResponse(status_code=400, content={
                "error": {"field": "delta_grid",
                          "message": "expected a nonempty list of numbers"}})
        if any(not (0.0 < d <= 1.0) for d in grid):
            return JSONResponse(status_code=400, content={
                "error": {"field": "delta_grid",
                          "message": "every delta must be in (0, 1]"}})
        points = curve_sweep(scenario, [float(d) for d in grid])
        return {"schema_version": API_VERSION,
                "points": [{"delta": p.delta, "norm_latency": p.norm_latency,
                            "norm_energy": p.norm_energy} for p in points]}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
