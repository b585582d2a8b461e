"""HTTP API serving the explorer: classification, stabilization, triangle
tiles and images, and billiard return maps, all under /api/v1.

All computation is pure and exact, so identical requests produce identical
bodies; tile responses are served verbatim from the scan cache file, which
makes repeat requests byte-identical.  Tiles at most 64x64 are computed
synchronously; larger scans run as background jobs polled via /jobs/{id}.
"""

from __future__ import annotations

import io
import json
import threading
import uuid
from fractions import Fraction
from typing import Optional

from fastapi import FastAPI, Query, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__
from .billiards import Degenerate, SlopeDirection, first_return_itm, make_table
from .btfamily import (
    ScanRequest,
    cache_path,
    dump_scan,
    load_scan,
    render,
    scan,
)
from .exact import rat
from .itm import ITMap, InvalidMap
from .reporting import classify_payload, report_payload, stabilize_payload
from .stabilize import BudgetExhausted, NotEventuallyPeriodic
from .vectors import Infeasible

SYNC_TILE_LIMIT = 64


class ClassifyBody(BaseModel):
    map: dict
    budget: Optional[int] = None
    full: bool = False


class StabilizeBody(BaseModel):
    map: dict
    eps: str = "1/100"
    budget: Optional[int] = 20_000


class BilliardBody(BaseModel):
    table: dict
    slope: str


def _error(status: int, code: str, detail) -> JSONResponse:
    return JSONResponse({"error": {"code": code, "detail": detail}}, status_code=status)


def _parse_map(data: dict):
    m = ITMap.from_dict(data)
    m.require_valid()
    return m


def _tile_request(x0: str, y0: str, x1: str, y1: str, res: int, budget: Optional[int]):
    region = (rat(x0), rat(y0), rat(x1), rat(y1))
    return ScanRequest(resolution=res, budget=budget, region=region)


def create_app() -> FastAPI:
    app = FastAPI(title="itmlab", version=__version__)
    jobs: dict = {}
    jobs_lock = threading.Lock()

    @app.get("/api/v1/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/api/v1/classify")
    def classify(body: ClassifyBody):
        try:
            m = _parse_map(body.map)
        except InvalidMap as e:
            return _error(400, "invalid-map", e.violations)
        build = report_payload if body.full else classify_payload
        payload = build(m, body.budget)
        if payload["status"] != "finite":
            return _error(503, "budget-exhausted", payload)
        return payload

    @app.post("/api/v1/stabilize")
    def stabilize_endpoint(body: StabilizeBody):
        try:
            m = _parse_map(body.map)
            eps = rat(body.eps)
        except InvalidMap as e:
            return _error(400, "invalid-map", e.violations)
        except (ValueError, ZeroDivisionError) as e:
            return _error(400, "bad-epsilon", str(e))
        try:
            return stabilize_payload(m, eps, body.budget)
        except Infeasible as e:
            return _error(422, "infeasible", str(e))
        except (BudgetExhausted, NotEventuallyPeriodic) as e:
            trace = getattr(e, "trace", None)
            return _error(
                503,
                "budget-exhausted",
                {"message": str(e), "trace": trace.to_dict() if trace else None},
            )

    def _scan_text(req: ScanRequest) -> str:
        sr = scan(req)  # reads/writes the cache
        with open(cache_path(req)) as fh:
            return fh.read()

    @app.get("/api/v1/bt/tile")
    def tile(
        x0: str = Query("0"),
        y0: str = Query("0"),
        x1: str = Query("1"),
        y1: str = Query("1"),
        res: int = Query(...),
        budget: Optional[int] = Query(None),
    ):
        try:
            req = _tile_request(x0, y0, x1, y1, res, budget)
        except (ValueError, ZeroDivisionError) as e:
            return _error(400, "bad-request", str(e))
        if res <= SYNC_TILE_LIMIT:
            return Response(_scan_text(req), media_type="text/csv")
        job_id = uuid.uuid4().hex[:12]
        with jobs_lock:
            jobs[job_id] = {"status": "running", "request": req}

        def work():
            try:
                text = _scan_text(req)
                with jobs_lock:
                    jobs[job_id] = {"status": "done", "request": req, "text": text}
            except Exception as e:  # surfaced through the polling endpoint
                with jobs_lock:
                    jobs[job_id] = {"status": "error", "detail": str(e)}

        threading.Thread(target=work, daemon=True).start()
        return JSONResponse({"job": job_id}, status_code=202)

    @app.get("/api/v1/jobs/{job_id}")
    def job_status(job_id: str):
        with jobs_lock:
            job = jobs.get(job_id)
        if job is None:
            return _error(400, "unknown-job", job_id)
        if job["status"] == "running":
            return {"status": "running"}
        if job["status"] == "error":
            return _error(503, "job-failed", job["detail"])
        return Response(job["text"], media_type="text/csv")

    @app.get("/api/v1/bt/image")
    def image(
        x0: str = Query("0"),
        y0: str = Query("0"),
        x1: str = Query("1"),
        y1: str = Query("1"),
        res: int = Query(...),
        budget: Optional[int] = Query(None),
        fmt: str = Query("ppm"),
    ):
        if fmt not in ("ppm", "png"):
            return _error(400, "bad-request", f"unknown format {fmt!r}")
        try:
            req = _tile_request(x0, y0, x1, y1, res, budget)
        except (ValueError, ZeroDivisionError) as e:
            return _error(400, "bad-request", str(e))
        sr = scan(req)
        data = render(sr, fmt=fmt)
        media = "image/png" if fmt == "png" else "image/x-portable-pixmap"
        return Response(data, media_type=media)

    @app.post("/api/v1/billiard/return")
    def billiard_return(body: BilliardBody):
        try:
            table = make_table(
                [(m["x"], m["h"], m["reflect"]) for m in body.table.get("mirrors", [])]
            )
            d = SlopeDirection(rat(body.slope))
        except (ValueError, KeyError, TypeError, ZeroDivisionError) as e:
            return _error(400, "bad-request", str(e))
        try:
            m = first_return_itm(table, d)
        except Degenerate as e:
            return _error(422, "degenerate", str(e))
        return {"map": m.to_dict()}

    return app
