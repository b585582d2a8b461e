"""Command-line interface: classification, stabilization, family scans,
rendering, billiards, and the HTTP service.

Every command emits JSON (or image bytes for render) to stdout unless --out
is given.  Exit codes: 0 success, 2 validation error, 3 budget exhaustion;
errors are JSON objects with stable codes.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction

import click

from . import __version__
from .attractor import attractor
from .billiards import (
    CornerHit,
    Degenerate,
    SlopeDirection,
    first_return_itm,
    table_from_json,
    trace as trace_table,
)
from .btfamily import ScanRequest, cache_path, render as render_scan, scan as run_scan
from .exact import rat, rat_str
from .itm import ITMap, InvalidMap
from .reporting import classify_payload, report_payload, stabilize_payload
from .stabilize import BudgetExhausted, NotEventuallyPeriodic
from .vectors import Infeasible

EXIT_VALIDATION = 2
EXIT_BUDGET = 3


def _emit(data, out: str | None) -> None:
    text = json.dumps(data, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fail(code: str, message, exit_code: int, out: str | None = None):
    _emit({"error": {"code": code, "detail": message}}, out)
    sys.exit(exit_code)


def _load_map(path: str) -> ITMap:
    try:
        with click.open_file(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        _fail("bad-input", str(e), EXIT_VALIDATION)
    try:
        m = ITMap.from_dict(data)
        m.require_valid()
    except InvalidMap as e:
        _fail("invalid-map", e.violations, EXIT_VALIDATION)
    return m


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Exact-arithmetic toolkit for interval translation maps."""


@main.command()
@click.option("--map", "map_path", required=True, help="map JSON file ('-' for stdin)")
@click.option("--budget", type=int, default=None, help="attractor iteration budget")
@click.option("--out", default=None, help="write JSON here instead of stdout")
def classify(map_path: str, budget, out) -> None:
    """Attractor, stability verdicts, and return maps for one map."""
    m = _load_map(map_path)
    payload = classify_payload(m, budget)
    _emit(payload, out)
    if payload["status"] != "finite":
        sys.exit(EXIT_BUDGET)


@main.command()
@click.option("--map", "map_path", required=True)
@click.option("--budget", type=int, default=None)
@click.option("--out", default=None)
def report(map_path: str, budget, out) -> None:
    """classify plus critical cycles, unstable number, and correspondence."""
    m = _load_map(map_path)
    payload = report_payload(m, budget)
    _emit(payload, out)
    if payload["status"] != "finite":
        sys.exit(EXIT_BUDGET)


@main.command()
@click.option("--map", "map_path", required=True)
@click.option("--eps", default="1/100", help="total perturbation budget (rational)")
@click.option("--budget", type=int, default=20_000)
@click.option("--out", default=None)
def stabilize(map_path: str, eps: str, budget, out) -> None:
    """Perturb the map until it certifies stable, within the given epsilon."""
    m = _load_map(map_path)
    try:
        eps_total = rat(eps)
    except (ValueError, ZeroDivisionError) as e:
        _fail("bad-epsilon", str(e), EXIT_VALIDATION)
    try:
        _emit(stabilize_payload(m, eps_total, budget), out)
    except (BudgetExhausted, Infeasible, NotEventuallyPeriodic) as e:
        trace = getattr(e, "trace", None)
        _fail(
            "budget-exhausted",
            {"message": str(e), "trace": trace.to_dict() if trace else None},
            EXIT_BUDGET,
        )


@main.command()
@click.option("--family", default="bt", type=click.Choice(["bt"]))
@click.option("--res", type=int, required=True, help="grid resolution")
@click.option("--budget", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--out", default=None, help="also copy the cache file here")
def scan(family: str, res: int, budget, workers, out) -> None:
    """Classify the parameter triangle on a rational grid (cached)."""
    try:
        req = ScanRequest(resolution=res, budget=budget)
    except ValueError as e:
        _fail("bad-request", str(e), EXIT_VALIDATION)
    sr = run_scan(req, workers=workers)
    path = cache_path(req)
    if out:
        with open(path) as src, open(out, "w") as dst:
            dst.write(src.read())
    _emit(
        {
            "cells": len(sr.cells),
            "tags": sr.tag_counts(),
            "cache_file": path,
            "elapsed": round(sr.elapsed, 3),
        },
        None,
    )


@main.command()
@click.option("--res", type=int, required=True)
@click.option("--budget", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--format", "fmt", default="ppm", type=click.Choice(["ppm", "png"]))
@click.option("--out", required=True, help="image file to write")
def render(res: int, budget, workers, fmt: str, out: str) -> None:
    """Render a triangle scan to an image, one pixel per grid cell."""
    try:
        req = ScanRequest(resolution=res, budget=budget)
    except ValueError as e:
        _fail("bad-request", str(e), EXIT_VALIDATION)
    sr = run_scan(req, workers=workers)
    data = render_scan(sr, fmt=fmt)
    with open(out, "wb") as fh:
        fh.write(data)
    _emit({"written": out, "bytes": len(data), "format": fmt}, None)


@main.command()
@click.option("--table", "table_path", required=True, help="table JSON file")
@click.option("--slope", "slope_str", required=True, help="positive rational slope")
@click.option("--start", default=None, help="trace events from 'x,y' instead")
@click.option("--events", type=int, default=20)
@click.option("--out", default=None)
def billiard(table_path: str, slope_str: str, start, events: int, out) -> None:
    """First-return map (or a trajectory trace) for a mirrored square."""
    try:
        with click.open_file(table_path) as fh:
            table = table_from_json(fh.read())
        d = SlopeDirection(rat(slope_str))
    except (OSError, ValueError, KeyError, json.JSONDecodeError, ZeroDivisionError) as e:
        _fail("bad-input", str(e), EXIT_VALIDATION)
    if start is not None:
        try:
            x, y = (rat(v) for v in start.split(","))
            evs = trace_table(table, (x, y), d, events)
        except CornerHit as e:
            _fail("corner-hit", str(e), EXIT_VALIDATION)
        except ValueError as e:
            _fail("bad-input", str(e), EXIT_VALIDATION)
        _emit({"events": [e.to_dict() for e in evs]}, out)
        return
    try:
        m = first_return_itm(table, d)
    except Degenerate as e:
        _fail("degenerate", str(e), EXIT_BUDGET)
    _emit({"map": m.to_dict()}, out)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8777)
@click.option("--workers", type=int, default=1)
def serve(host: str, port: int, workers: int) -> None:
    """Run the HTTP API for the explorer."""
    import uvicorn

    from .service import create_app

    if workers < 1:
        _fail("bad-request", "worker count must be >= 1", EXIT_VALIDATION)
    uvicorn.run(create_app(), host=host, port=port, workers=None)


if __name__ == "__main__":
    main()
