"""Forward-image attractor computation and orbit classification.

The attractor of a piecewise translation is the nested intersection of the
forward images X_n = T^n([0,1)).  For rational parameters every partition
point's orbit lives on a finite arithmetic grid, so the chain X_n stabilizes
and everything here is decided exactly: no tolerances, no floats.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right

import numpy as np
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .exact import HalfOpenInterval, IntervalSet, Sign, SignedPoint, rat_str
from .itm import ITMap


class WitnessNotFound(RuntimeError):
    """A finite attractor endpoint could not be traced to a partition-point orbit.

    This signals an internal inconsistency; it must not happen for valid
    finite results."""


class NotPeriodic(ValueError):
    pass


@dataclass(frozen=True)
class AttractorResult:
    status: str  # "finite" | "undetermined"
    X: IntervalSet
    n_stable: Optional[int]
    budget_used: int

    @property
    def finite(self) -> bool:
        return self.status == "finite"

    def to_dict(self) -> dict:
        d: dict = {"status": self.status}
        if self.finite:
            d["n"] = self.n_stable
        d["X"] = [[rat_str(p.left), rat_str(p.right)] for p in self.X]
        return d


@dataclass(frozen=True)
class EndpointWitness:
    """An attractor-component endpoint written as an iterate of a one-sided
    partition point; None when the endpoint is a domain boundary with no
    partition-point history (e.g. the r=1 identity map)."""

    point: Optional[SignedPoint]
    steps: Optional[int]


@dataclass(frozen=True)
class ComponentWitness:
    component: HalfOpenInterval
    left: EndpointWitness
    right: EndpointWitness


@dataclass(frozen=True)
class OrbitClass:
    tag: str  # "precritical" | "preperiodic" | "accumulation" (never for rationals)
    hit: Optional[SignedPoint] = None
    hit_time: Optional[int] = None
    preperiod: Optional[int] = None
    period: Optional[int] = None


def default_budget(m: ITMap) -> int:
    """Generous multiple of the orbit-grid size."""
    return 4 * m.denominator_lcm() * m.r


def _lattice(m: ITMap, extra_den: int = 1) -> tuple[int, list[int], list[int]]:
    """Common denominator L with the map's parameters as integers * L.

    Every forward image and every orbit of a lattice point stays on the
    lattice, so the set iteration and orbit walks can run on plain ints."""
    L = math.lcm(m.grid_lcm(), extra_den)
    beta = [int(b * L) for b in m.beta]
    gamma = [int(g * L) for g in m.gamma]
    return L, beta, gamma


def _merged(pieces: list[tuple[int, int]]) -> list[tuple[int, int]]:
    pieces.sort()
    out: list[tuple[int, int]] = []
    for lo, hi in pieces:
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return out


def attractor(m: ITMap, budget: Optional[int] = None) -> AttractorResult:
    """Iterate X_{n+1} = T(X_n) from the full domain until the first fixpoint.

    Returns a finite certificate (minimal n with X_{n+1} = X_n) or an
    undetermined result if the budget runs out first.  The iteration runs on
    the integer lattice of the parameters' common denominator, which is
    exact and much faster than rational interval algebra.
    """
    if budget is None:
        budget = default_budget(m)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    L, beta, gamma = _lattice(m)
    # int64 arithmetic needs head room for one translation: |v + g| < 2 L
    if L < 2**60:
        X, status, n_stable, used = _iterate_np(m.r, beta, gamma, budget)
    else:
        X, status, n_stable, used = _iterate_py(m.r, beta, gamma, budget)
    parts = IntervalSet(
        HalfOpenInterval(Fraction(lo, L), Fraction(hi, L)) for lo, hi in X
    )
    return AttractorResult(status, parts, n_stable, used)


def _iterate_py(
    r: int, beta: list[int], gamma: list[int], budget: int
) -> tuple[list[tuple[int, int]], str, Optional[int], int]:
    X = [(beta[0], beta[-1])]
    for n in range(budget + 1):
        pieces = []
        for s in range(r):
            c0, c1 = beta[s], beta[s + 1]
            g = gamma[s]
            for lo, hi in X:
                a = lo if lo > c0 else c0
                b = hi if hi < c1 else c1
                if a < b:
                    pieces.append((a + g, b + g))
        nxt = _merged(pieces)
        if nxt == X:
            return X, "finite", n, n
        X = nxt
    return X, "undetermined", None, budget


def _iterate_np(
    r: int, beta: list[int], gamma: list[int], budget: int
) -> tuple[list[tuple[int, int]], str, Optional[int], int]:
    """Same fixpoint iteration with the clip/shift/merge steps vectorized."""
    lo = np.array([beta[0]], dtype=np.int64)
    hi = np.array([beta[-1]], dtype=np.int64)
    for n in range(budget + 1):
        los, his = [], []
        for s in range(r):
            a = np.maximum(lo, beta[s])
            b = np.minimum(hi, beta[s + 1])
            keep = a < b
            if keep.any():
                los.append(a[keep] + gamma[s])
                his.append(b[keep] + gamma[s])
        plo = np.concatenate(los)
        phi = np.concatenate(his)
        order = np.argsort(plo, kind="stable")
        plo = plo[order]
        phi = phi[order]
        run = np.maximum.accumulate(phi)
        starts = np.empty(len(plo), dtype=bool)
        starts[0] = True
        starts[1:] = plo[1:] > run[:-1]
        idx = np.flatnonzero(starts)
        nlo = plo[idx]
        nhi = run[np.append(idx[1:] - 1, len(plo) - 1)]
        if len(nlo) == len(lo) and np.array_equal(nlo, lo) and np.array_equal(nhi, hi):
            return list(zip(lo.tolist(), hi.tolist())), "finite", n, n
        lo, hi = nlo, nhi
    return list(zip(lo.tolist(), hi.tolist())), "undetermined", None, budget


def components(X: IntervalSet) -> tuple[HalfOpenInterval, ...]:
    return X.parts


def _discontinuity_orbit(m: ITMap, p: SignedPoint, cap: int) -> list[SignedPoint]:
    """Orbit of p until one full cycle is visible (value repeats)."""
    seen: dict[Fraction, int] = {}
    out: list[SignedPoint] = []
    cur = p
    for t in range(cap + 2):
        if cur.value in seen:
            return out
        seen[cur.value] = t
        out.append(cur)
        cur = m.apply(cur)
    return out


def boundary_witness(m: ITMap, X: IntervalSet) -> list[ComponentWitness]:
    """Express each component endpoint as T^k of a one-sided partition point.

    Left endpoints come from plus-points, right endpoints from minus-points
    (right endpoints match the minus-limit value)."""
    cap = m.denominator_lcm() + 1
    plus_orbits = {}
    minus_orbits = {}
    for b in m.interior_breaks():
        plus_orbits[b] = _discontinuity_orbit(m, SignedPoint(b, Sign.PLUS), cap)
        minus_orbits[b] = _discontinuity_orbit(m, SignedPoint(b, Sign.MINUS), cap)

    def find(orbits: dict, target: Fraction) -> Optional[EndpointWitness]:
        best: Optional[tuple[int, Fraction]] = None
        for b, orb in orbits.items():
            for k, q in enumerate(orb):
                if q.value == target:
                    if best is None or k < best[0]:
                        best = (k, b)
                    break
        if best is None:
            return None
        k, b = best
        sign = Sign.PLUS if orbits is plus_orbits else Sign.MINUS
        return EndpointWitness(SignedPoint(b, sign), k)

    out = []
    for comp in X.parts:
        lw = find(plus_orbits, comp.left)
        rw = find(minus_orbits, comp.right)
        if lw is None:
            if comp.left == m.beta[0]:
                lw = EndpointWitness(None, None)
            else:
                raise WitnessNotFound(f"left endpoint of {comp}")
        if rw is None:
            if comp.right == m.beta[-1]:
                rw = EndpointWitness(None, None)
            else:
                raise WitnessNotFound(f"right endpoint of {comp}")
        out.append(ComponentWitness(comp, lw, rw))
    return out


def orbit_tail(
    m: ITMap, p: SignedPoint, cap: int = 200_000
) -> tuple[int, int]:
    """Exact (preperiod, period) of a signed point's orbit by cycle detection.

    The cap is a safety valve, far above any period reachable in practice;
    rational translations guarantee termination, but a caller probing a map
    with enormous parameter denominators should fail fast, not hang."""
    pre, period, _ = _int_orbit(m, p, cap)
    return pre, period


def _int_orbit(
    m: ITMap, p: SignedPoint, cap: int
) -> tuple[int, int, list[tuple[int, int]]]:
    """(preperiod, period, integer keys of the walk) on the common lattice.

    Signed branch lookup by bisection: a plus/geometric point at a cell's
    left endpoint belongs to that cell, a minus point at a right endpoint to
    the cell before it — the same order the signed comparison in
    HalfOpenInterval.contains induces."""
    L, beta, gamma = _lattice(m, p.value.denominator)
    v = int(p.value * L)
    sg = int(p.sign)
    r = m.r
    seen: dict[tuple[int, int], int] = {}
    trail: list[tuple[int, int]] = []
    t = 0
    while t <= cap:
        key = (v, sg)
        if key in seen:
            return seen[key], t - seen[key], trail
        seen[key] = t
        trail.append(key)
        i = (bisect_right(beta, v) if sg >= 0 else bisect_left(beta, v)) - 1
        if i < 0 or i >= r or (sg == 0 and 0 < i and v == beta[i]):
            # delegate to the reference evaluator for the exact error
            m.branch_of(SignedPoint(Fraction(v, L), p.sign))
            raise AssertionError("integer branch lookup out of sync")
        v += gamma[i]
        t += 1
    raise NotPeriodic(f"no cycle within {cap} steps from {p}")


def orbit_keys(m: ITMap, p: SignedPoint, cap: int = 200_000) -> set[tuple]:
    """Signed keys of the full eventual orbit {T^t(p)}, computed on the
    integer lattice and converted back to exact rationals once."""
    L = math.lcm(m.grid_lcm(), p.value.denominator)
    _pre, _period, trail = _int_orbit(m, p, cap)
    return {(Fraction(v, L), sg) for v, sg in trail}


def eventually_periodic(m: ITMap) -> dict[SignedPoint, tuple[int, int]]:
    """(preperiod, period) for every one-sided partition point.

    Rational translations put each orbit on a finite grid, so this always
    terminates."""
    return {p: orbit_tail(m, p) for p in m.critical_points()}


def classify_orbit(m: ITMap, p: SignedPoint) -> OrbitClass:
    """Transient critical hit wins; otherwise the exact eventual cycle.

    A hit counts only while the orbit is still in its transient
    (1 <= t <= preperiod): once inside the cycle, meeting a one-sided
    partition point is a feature of the cycle rather than a degeneracy of the
    approach, and the point is reported as preperiodic.  The accumulation tag
    exists for API completeness but is unreachable for rational parameters
    (orbits live on a finite grid)."""
    pre, period = orbit_tail(m, p)
    criticals = {c.key: c for c in m.critical_points()}
    cur = m.apply(p)
    for t in range(1, pre + 1):
        if cur.key in criticals:
            return OrbitClass("precritical", hit=criticals[cur.key], hit_time=t)
        cur = m.apply(cur)
    return OrbitClass("preperiodic", preperiod=pre, period=period)


def exact_period(m: ITMap, p: SignedPoint) -> Optional[int]:
    """Smallest n >= 1 with T^n(p) = p, or None if p is not periodic."""
    pre, period = orbit_tail(m, p)
    return period if pre == 0 else None


def maximal_periodic_interval(m: ITMap, p: SignedPoint) -> HalfOpenInterval:
    """Largest interval of points sharing p's periodic itinerary.

    For a plus point the set is [lo, hi); for a minus point it is (lo, hi],
    which the returned [lo, hi) carrier encodes under signed membership
    (x- in [lo,hi) iff lo < x <= hi)."""
    n = exact_period(m, p)
    if n is None:
        raise NotPeriodic(f"{p} is not periodic")
    lo = m.beta[0]
    hi = m.beta[-1]
    offset = Fraction(0)
    cur = p
    for _ in range(n):
        s = m.branch_of(cur)
        lo = max(lo, m.beta[s - 1] - offset)
        hi = min(hi, m.beta[s] - offset)
        g = m.gamma[s - 1]
        offset += g
        cur = cur.shifted(g)
    return HalfOpenInterval(lo, hi)


def periodic_carrier(
    m: ITMap, p: SignedPoint, cap: int = 200_000
) -> tuple[SignedPoint, int, HalfOpenInterval]:
    """Periodic tail of p's orbit: (first periodic point, preperiod, its
    maximal periodic interval)."""
    pre, period = orbit_tail(m, p, cap)
    q = m.iterate(p, pre)
    return q, pre, maximal_periodic_interval(m, q)
