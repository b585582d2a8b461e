"""The unit square with vertical spy mirrors: unfolding, tracing, and the
first-return translation map.

A spy mirror is a vertical segment rising from the bottom side, reflective on
one face and transparent on the other.  Reflections in the coordinate axes
unfold the square into a 2x2 torus carrying four copies of each mirror as
two-sided slits, identified in pairs: a ray that meets a slit's reflective
face continues from the same height on its partner's reflective face, so the
unfolded flow is a straight-line flow with horizontal teleports.  The first
return of that flow to the left vertical circle (cut open at the origin and
rescaled to unit length) is an interval translation map.

All coordinates are exact rationals; directions are rational slopes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .exact import rat, rat_str
from .itm import ITMap, RationalLike

TWO = Fraction(2)


class CornerHit(RuntimeError):
    """The trajectory meets a corner or a mirror endpoint and terminates."""


class Degenerate(RuntimeError):
    """A transversal piece never returns (trapped between slits)."""


@dataclass(frozen=True)
class SpyMirror:
    x: Fraction
    height: Fraction
    reflective_side: str  # "left" | "right"

    def __post_init__(self):
        if not 0 < self.x < 1:
            raise ValueError(f"mirror x must lie inside (0,1), got {rat_str(self.x)}")
        if not 0 < self.height <= 1:
            raise ValueError(
                f"mirror height must lie in (0,1], got {rat_str(self.height)}"
            )
        if self.reflective_side not in ("left", "right"):
            raise ValueError(f"unknown reflective side {self.reflective_side!r}")


@dataclass(frozen=True)
class BilliardTable:
    mirrors: tuple[SpyMirror, ...] = ()

    def __post_init__(self):
        xs = [m.x for m in self.mirrors]
        if len(set(xs)) != len(xs):
            raise ValueError("mirrors must have pairwise distinct positions")


def make_table(mirrors: Sequence[tuple[RationalLike, RationalLike, str]]) -> BilliardTable:
    return BilliardTable(
        tuple(SpyMirror(rat(x), rat(h), side) for x, h, side in mirrors)
    )


def table_to_json(table: BilliardTable) -> str:
    return json.dumps(
        {
            "mirrors": [
                {"x": rat_str(m.x), "h": rat_str(m.height), "reflect": m.reflective_side}
                for m in table.mirrors
            ]
        }
    )


def table_from_json(text: str) -> BilliardTable:
    data = json.loads(text)
    return make_table([(m["x"], m["h"], m["reflect"]) for m in data["mirrors"]])


@dataclass(frozen=True)
class SlopeDirection:
    slope: Fraction

    def __post_init__(self):
        if self.slope <= 0:
            raise ValueError("slope must be a positive rational")


def slope(s: RationalLike) -> SlopeDirection:
    return SlopeDirection(rat(s))


# ---------------------------------------------------------------------------
# unfolding


@dataclass(frozen=True)
class SlitCopy:
    x: Fraction  # vertical line on the torus [0,2) x [0,2)
    y0: Fraction
    y1: Fraction  # occupies y in [y0, y1)
    reflective_left: bool  # True iff the face meeting rightward rays reflects
    partner_x: Fraction  # line of the identified copy (same y-interval)
    pair_id: int
    mirror_index: int
    sheet: tuple[int, int]  # (x-parity, y-parity) of the generating reflection


@dataclass(frozen=True)
class UnfoldedFlow:
    table: BilliardTable
    slits: tuple[SlitCopy, ...]

    def pairs(self) -> dict:
        out: dict = {}
        for s in self.slits:
            out.setdefault(s.pair_id, []).append(s)
        return out


def unfold(table: BilliardTable) -> UnfoldedFlow:
    """Four reflected sheets; x-flipped copies swap the reflective face
    (a left face becomes a right face), y-flipped copies hang from the top
    edge; copies of equal y-parity are identified as a slit pair."""
    slits = []
    for idx, m in enumerate(table.mirrors):
        refl_left = m.reflective_side == "left"
        for ypar, (y0, y1) in enumerate(
            [(Fraction(0), m.height), (TWO - m.height, TWO)]
        ):
            pair = 2 * idx + ypar
            slits.append(
                SlitCopy(m.x, y0, y1, refl_left, TWO - m.x, pair, idx, (0, ypar))
            )
            slits.append(
                SlitCopy(TWO - m.x, y0, y1, not refl_left, m.x, pair, idx, (1, ypar))
            )
    return UnfoldedFlow(table, tuple(slits))


# ---------------------------------------------------------------------------
# tracing inside the square


@dataclass(frozen=True)
class TraceEvent:
    kind: str  # "side" | "reflect" | "pass"
    x: Fraction
    y: Fraction

    def to_dict(self) -> dict:
        return {"kind": self.kind, "x": rat_str(self.x), "y": rat_str(self.y)}


def trace(
    table: BilliardTable,
    start: tuple[RationalLike, RationalLike],
    d: SlopeDirection,
    n_events: int,
    dx_sign: int = 1,
    dy_sign: int = 1,
) -> list[TraceEvent]:
    """Exact event sequence of the billiard trajectory from `start`.

    Events are side bounces and mirror reflections/passes; crossing the
    vertical line of a mirror above its top is not an event.  Hitting a
    square corner or a mirror endpoint raises CornerHit."""
    x, y = rat(start[0]), rat(start[1])
    if not (0 <= x <= 1 and 0 <= y <= 1):
        raise ValueError("start must lie in the unit square")
    vx = Fraction(dx_sign)
    vy = d.slope * dy_sign
    by_x = {m.x: m for m in table.mirrors}
    events: list[TraceEvent] = []
    while len(events) < n_events:
        hits: list[tuple[Fraction, str, Fraction]] = []
        wall_x = Fraction(1) if vx > 0 else Fraction(0)
        t = (wall_x - x) / vx
        if t > 0:
            hits.append((t, "wall_x", wall_x))
        wall_y = Fraction(1) if vy > 0 else Fraction(0)
        t = (wall_y - y) / vy
        if t > 0:
            hits.append((t, "wall_y", wall_y))
        for c in by_x:
            t = (c - x) / vx
            if t > 0:
                hits.append((t, "mirror", c))
        t0 = min(h[0] for h in hits)
        now = [h for h in hits if h[0] == t0]
        nx, ny = x + t0 * vx, y + t0 * vy
        kinds = {h[1] for h in now}
        if kinds == {"mirror"}:
            m = by_x[now[0][2]]
            if ny == m.height or ny == 0:
                raise CornerHit(f"mirror endpoint at ({rat_str(nx)}, {rat_str(ny)})")
            if 0 < ny < m.height:
                face = "left" if vx > 0 else "right"
                if m.reflective_side == face:
                    vx = -vx
                    events.append(TraceEvent("reflect", nx, ny))
                else:
                    events.append(TraceEvent("pass", nx, ny))
            # above the mirror: free crossing, no event
        else:
            if "wall_x" in kinds and "wall_y" in kinds:
                raise CornerHit(f"corner at ({rat_str(nx)}, {rat_str(ny)})")
            if "wall_y" in kinds and "mirror" in kinds:
                raise CornerHit(f"mirror base at ({rat_str(nx)}, {rat_str(ny)})")
            if "wall_x" in kinds:
                vx = -vx
            if "wall_y" in kinds:
                vy = -vy
            events.append(TraceEvent("side", nx, ny))
        x, y = nx, ny
    return events


# ---------------------------------------------------------------------------
# the unfolded flow and the first-return map


def _reflective_lines(uf: UnfoldedFlow) -> dict[Fraction, list[SlitCopy]]:
    lines: dict[Fraction, list[SlitCopy]] = {}
    for s in uf.slits:
        if s.reflective_left:
            lines.setdefault(s.x, []).append(s)
    return lines


def flow_point(
    table: BilliardTable, u: Fraction, d: SlopeDirection, max_jumps: int = 10_000
) -> Fraction:
    """Return height (on the length-2 transversal circle) of the single point
    (0, u) under the unfolded flow; the point-wise oracle for the ITM."""
    uf = unfold(table)
    lines = _reflective_lines(uf)
    xs = sorted(lines)
    x, y = Fraction(0), u % TWO
    jumps = 0
    while True:
        nxt = next((c for c in xs if c > x), None)
        if nxt is None:
            return (y + d.slope * (TWO - x)) % TWO
        y = (y + d.slope * (nxt - x)) % TWO
        x = nxt
        for s in lines[nxt]:
            if s.y0 <= y < s.y1:
                x = s.partner_x
                jumps += 1
                if jumps > max_jumps:
                    raise Degenerate(f"point {rat_str(u)} trapped between slits")
                break


def first_return_itm(
    table: BilliardTable, d: SlopeDirection, max_jumps: int = 10_000
) -> ITMap:
    """Exact first-return map of the unfolded flow to the left vertical
    circle, cut open at height 0 and rescaled to [0,1).

    Whole subintervals of the transversal are propagated at once: pieces
    translate rigidly between reflective slit lines and only split where
    they straddle a slit endpoint or wrap around the circle, so the branch
    endpoints are exactly the discontinuities of the return map."""
    uf = unfold(table)
    lines = _reflective_lines(uf)
    xs = sorted(lines)
    s = d.slope
    branches: list[tuple[Fraction, Fraction, Fraction]] = []  # lo, len, image lo
    # piece = (domain lo on the transversal, length, current line, current
    # height of the domain-lo point, teleports so far); heights stay mod 2
    pending = [(Fraction(0), TWO, Fraction(0), Fraction(0), 0)]
    while pending:
        dom_lo, length, x, y, jumps = pending.pop()
        if jumps > max_jumps:
            raise Degenerate(
                f"piece [{rat_str(dom_lo / 2)}, {rat_str((dom_lo + length) / 2)}) "
                f"exceeded {max_jumps} slit jumps"
            )
        nxt = next((c for c in xs if c > x), None)
        target = TWO if nxt is None else nxt
        y = (y + s * (target - x)) % TWO
        # split a circle wrap so every segment is an honest interval
        if y + length <= TWO:
            segs = [(dom_lo, length, y)]
        else:
            cut = TWO - y
            segs = [(dom_lo, cut, y), (dom_lo + cut, length - cut, Fraction(0))]
        if nxt is None:
            for lo, ln, iy in segs:
                branches.append((lo, ln, iy))
            continue
        for lo, ln, iy in segs:
            pos, dpos, end = iy, lo, iy + ln
            for sl in sorted(lines[nxt], key=lambda t: t.y0):
                a, b = max(pos, sl.y0), min(end, sl.y1)
                if a >= b:
                    continue
                if a > pos:  # part below the slit passes through
                    pending.append((dpos, a - pos, nxt, pos, jumps))
                    dpos += a - pos
                    pos = a
                pending.append((dpos, b - a, sl.partner_x, a, jumps + 1))
                dpos += b - a
                pos = b
            if pos < end:
                pending.append((dpos, end - pos, nxt, pos, jumps))
    branches.sort()
    # merge splits that turned out not to separate anything
    merged: list[list[Fraction]] = []
    for lo, ln, iy in branches:
        if merged and merged[-1][0] + merged[-1][1] == lo and merged[-1][2] + merged[-1][1] == iy:
            merged[-1][1] += ln
        else:
            merged.append([lo, ln, iy])
    total = sum(b[1] for b in merged)
    assert total == TWO and merged[0][0] == 0, "transversal not fully covered"
    beta = tuple(b[0] / 2 for b in merged) + (Fraction(1),)
    gamma = tuple((b[2] - b[0]) / 2 for b in merged)
    return ITMap(beta, gamma).require_valid()
