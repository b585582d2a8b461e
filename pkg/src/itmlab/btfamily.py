"""The two-parameter triangle family, grid scans, and image rendering.

T_{a,b} translates by a on [0, 1-a), by b on [1-a, 1-b), and by b-1 on
[1-b, 1); the parameter triangle is 0 <= b <= a <= 1.  Every rational
parameter point yields a finite-type map, so a scan over a rational grid
classifies each cell exactly and fingerprints its return-map structure.
Scans are embarrassingly parallel over cells and persist to a cache file
(one JSON header line, then CSV rows) keyed by region, resolution, budget,
and code version.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
import struct
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .attractor import attractor, default_budget
from .exact import rat, rat_str
from .itm import ITMap, RationalLike
from .returnmap import return_map
from .stability import check_acc, check_matching

log = logging.getLogger(__name__)


class OutOfTriangle(ValueError):
    pass


@dataclass(frozen=True)
class BTParams:
    a: Fraction
    b: Fraction

    def __post_init__(self):
        if not (0 <= self.b <= self.a <= 1):
            raise OutOfTriangle(
                f"need 0 <= b <= a <= 1, got a={rat_str(self.a)} b={rat_str(self.b)}"
            )


def bt_map(a: RationalLike, b: Optional[RationalLike] = None) -> ITMap:
    """The family member at (a, b); also accepts a single BTParams.

    Degenerate parameters on the triangle edges produce empty branches,
    which are dropped (and adjacent equal translations merged) so the
    result is always a valid map, down to the identity at (0, 0)."""
    if isinstance(a, BTParams) and b is None:
        p = a
    else:
        p = BTParams(rat(a), rat(b))
    cells = [
        (Fraction(0), 1 - p.a, p.a),
        (1 - p.a, 1 - p.b, p.b),
        (1 - p.b, Fraction(1), p.b - 1),
    ]
    cells = [(lo, hi, g) for lo, hi, g in cells if lo < hi]
    if not cells:  # a = b = 1: the whole domain is the last branch
        cells = [(Fraction(0), Fraction(1), Fraction(0))]
    merged: list[tuple[Fraction, Fraction, Fraction]] = []
    for lo, hi, g in cells:
        if merged and merged[-1][2] == g and merged[-1][1] == lo:
            merged[-1] = (merged[-1][0], hi, g)
        else:
            merged.append((lo, hi, g))
    beta = tuple(c[0] for c in merged) + (Fraction(1),)
    gamma = tuple(c[2] for c in merged)
    return ITMap(beta, gamma).require_valid()


# ---------------------------------------------------------------------------
# cell classification


@dataclass(frozen=True)
class CellClass:
    tag: str  # "FiniteStable" | "FiniteUnstable" | "Undetermined"
    fingerprint: Optional[tuple] = None  # (components, return-time multisets, n)
    n_stable: Optional[int] = None

    def fingerprint_str(self) -> str:
        if self.fingerprint is None:
            return ""
        comps, times, n = self.fingerprint
        body = "+".join(".".join(str(t) for t in ts) for ts in times)
        return f"{comps}|{body}|{n}"

    @staticmethod
    def parse_fingerprint(s: str) -> Optional[tuple]:
        if not s:
            return None
        comps, body, n = s.split("|")
        times = tuple(
            tuple(int(t) for t in part.split(".")) if part else ()
            for part in (body.split("+") if body else ())
        )
        return (int(comps), times, int(n))


def classify_cell(a: Fraction, b: Fraction, budget: Optional[int]) -> CellClass:
    m = bt_map(a, b)
    res = attractor(m, budget if budget is not None else default_budget(m))
    if not res.finite:
        log.warning(
            "undetermined cell at (%s, %s) with budget %s", rat_str(a), rat_str(b), budget
        )
        return CellClass("Undetermined")
    rmds = [(comp, return_map(m, res.X, comp)) for comp in res.X.parts]
    times = tuple(
        sorted(
            tuple(sorted(br.return_time for br in rmd.branches)) for _c, rmd in rmds
        )
    )
    fp = (len(res.X.parts), times, res.n_stable)
    nontrivial = [
        (comp, rmd)
        for comp, rmd in rmds
        if not (
            rmd.branch_count() == 1
            and rmd.branches[0].translation == 0
            and not rmd.landings
        )
    ]
    acc = check_acc(m, res.X, nontrivial)
    matching = check_matching(m, res.X, nontrivial)
    stable = acc.a1.ok and acc.a2.ok and acc.a3.ok and matching.ok
    return CellClass("FiniteStable" if stable else "FiniteUnstable", fp, res.n_stable)


# ---------------------------------------------------------------------------
# scans


Region = tuple[Fraction, Fraction, Fraction, Fraction]  # x0, y0, x1, y1

FULL_TRIANGLE: Region = (Fraction(0), Fraction(0), Fraction(1), Fraction(1))


@dataclass(frozen=True)
class ScanRequest:
    resolution: int
    budget: Optional[int] = None
    region: Region = FULL_TRIANGLE

    def __post_init__(self):
        if self.resolution < 2:
            raise ValueError("resolution must be at least 2")
        if self.budget is not None and self.budget < 1:
            raise ValueError("budget must be at least 1")

    def grid(self) -> list[tuple[int, int, Fraction, Fraction]]:
        """In-triangle grid points (i, j, a, b); a = x0 + i*w/res etc."""
        x0, y0, x1, y1 = self.region
        res = self.resolution
        out = []
        for i in range(res + 1):
            a = x0 + Fraction(i, res) * (x1 - x0)
            for j in range(res + 1):
                b = y0 + Fraction(j, res) * (y1 - y0)
                if 0 <= b <= a <= 1:
                    out.append((i, j, a, b))
        return out

    def cache_key(self) -> str:
        payload = json.dumps(
            {
                "region": [rat_str(v) for v in self.region],
                "resolution": self.resolution,
                "budget": self.budget,
                "version": __version__,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:24]


@dataclass(frozen=True)
class ScanResult:
    request: ScanRequest
    cells: tuple[tuple[int, int, Fraction, Fraction, CellClass], ...]
    elapsed: float

    def cell_at(self, i: int, j: int) -> Optional[CellClass]:
        for ci, cj, _a, _b, c in self.cells:
            if (ci, cj) == (i, j):
                return c
        return None

    def tag_counts(self) -> dict:
        out: dict = {}
        for *_ignored, c in self.cells:
            out[c.tag] = out.get(c.tag, 0) + 1
        return out


def _cell_row(args):
    i, j, a, b, budget = args
    return i, j, a, b, classify_cell(a, b, budget)


def scan(
    req: ScanRequest, workers: Optional[int] = None, cache: bool = True
) -> ScanResult:
    """Classify every in-triangle grid point; deterministic regardless of the
    worker pool's scheduling (rows are reassembled in grid order)."""
    if cache:
        cached = load_scan(req)
        if cached is not None:
            return cached
    grid = req.grid()
    jobs = [(i, j, a, b, req.budget) for i, j, a, b in grid]
    t0 = time.perf_counter()
    if workers is not None and workers > 1 and len(jobs) > 64:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_cell_row, jobs, chunksize=64))
    else:
        rows = [_cell_row(job) for job in jobs]
    rows.sort(key=lambda r: (r[0], r[1]))
    sr = ScanResult(req, tuple(rows), time.perf_counter() - t0)
    if cache:
        save_scan(sr)
    return sr


# ---------------------------------------------------------------------------
# scan cache: one JSON header line + CSV body


def cache_dir() -> str:
    return os.environ.get(
        "ITMLAB_CACHE_DIR", os.path.join(os.path.expanduser("~"), ".cache", "itmlab")
    )


def cache_path(req: ScanRequest) -> str:
    return os.path.join(cache_dir(), f"scan-{req.cache_key()}.csv")


def dump_scan(sr: ScanResult, fh) -> None:
    req = sr.request
    header = {
        "region": [rat_str(v) for v in req.region],
        "resolution": req.resolution,
        "budget": req.budget,
        "version": __version__,
        "elapsed": round(sr.elapsed, 3),
        "cells": len(sr.cells),
    }
    fh.write(json.dumps(header, sort_keys=True) + "\n")
    w = csv.writer(fh)
    w.writerow(["i", "j", "a", "b", "tag", "fingerprint", "n_stable"])
    for i, j, a, b, c in sr.cells:
        w.writerow(
            [
                i,
                j,
                rat_str(a),
                rat_str(b),
                c.tag,
                c.fingerprint_str(),
                "" if c.n_stable is None else c.n_stable,
            ]
        )


def load_scan_file(fh) -> ScanResult:
    header = json.loads(fh.readline())
    req = ScanRequest(
        resolution=header["resolution"],
        budget=header["budget"],
        region=tuple(rat(v) for v in header["region"]),
    )
    r = csv.reader(fh)
    head = next(r)
    assert head[0] == "i"
    cells = []
    for i, j, a, b, tag, fp, n in r:
        cells.append(
            (
                int(i),
                int(j),
                rat(a),
                rat(b),
                CellClass(
                    tag,
                    CellClass.parse_fingerprint(fp),
                    int(n) if n else None,
                ),
            )
        )
    return ScanResult(req, tuple(cells), header.get("elapsed", 0.0))


def save_scan(sr: ScanResult) -> str:
    os.makedirs(cache_dir(), exist_ok=True)
    path = cache_path(sr.request)
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        dump_scan(sr, fh)
    os.replace(tmp, path)  # single-writer: atomic swap
    return path


def load_scan(req: ScanRequest) -> Optional[ScanResult]:
    path = cache_path(req)
    if not os.path.exists(path):
        return None
    with open(path, newline="") as fh:
        return load_scan_file(fh)


# ---------------------------------------------------------------------------
# rendering


DEFAULT_PALETTE = {
    "FiniteUnstable": (225, 60, 50),
    "Undetermined": (128, 128, 128),
    "background": (12, 12, 16),
}


def _stable_color(fp_str: str) -> tuple[int, int, int]:
    h = hashlib.sha256(fp_str.encode()).digest()
    # keep hash colors bright so they never collide with the fixed roles
    return tuple(80 + (x * 11) // 16 for x in h[:3])


def render(sr: ScanResult, palette: Optional[dict] = None, fmt: str = "ppm") -> bytes:
    """One pixel per grid cell, b increasing upward; stable cells are colored
    by a hash of their fingerprint so same-structure regions share a color."""
    pal = dict(DEFAULT_PALETTE)
    if palette:
        pal.update(palette)
    n = sr.request.resolution + 1
    pixels = [[pal["background"]] * n for _ in range(n)]
    for i, j, _a, _b, c in sr.cells:
        if c.tag == "FiniteStable":
            color = _stable_color(c.fingerprint_str())
        else:
            color = pal[c.tag]
        pixels[n - 1 - j][i] = color
    if fmt == "ppm":
        buf = bytearray(f"P6\n{n} {n}\n255\n".encode())
        for row in pixels:
            for rgb in row:
                buf.extend(rgb)
        return bytes(buf)
    if fmt == "png":
        return _png_bytes(pixels)
    raise ValueError(f"unknown image format {fmt!r}")


def _png_bytes(pixels: Sequence[Sequence[tuple[int, int, int]]]) -> bytes:
    h = len(pixels)
    w = len(pixels[0])
    raw = bytearray()
    for row in pixels:
        raw.append(0)  # no per-scanline filter
        for rgb in row:
            raw.extend(rgb)

    def chunk(tag: bytes, body: bytes) -> bytes:
        return (
            struct.pack(">I", len(body))
            + tag
            + body
            + struct.pack(">I", zlib.crc32(tag + body) & 0xFFFFFFFF)
        )

    ihdr = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", ihdr)
        + chunk(b"IDAT", zlib.compress(bytes(raw), 9))
        + chunk(b"IEND", b"")
    )
