"""Constructive stabilization of eventually periodic maps.

The obstruction to stability is measured by the unstable number U: the
number of excess critical connections inside the attractor plus the number
of partition points sitting on its boundary.  Each perturbation step below
solves an exact linear system over the coefficient vectors of the orbits we
want to keep (products pinned to 0) and the one connection we want to break
(product pushed to +/-epsilon), then shrinks epsilon geometrically until the
perturbed map certifies: still valid, still eventually periodic, and U
strictly smaller (or the final certificate, full stability).  No numerical
tolerance enters anywhere; every certificate is recomputed in exact rational
arithmetic on the perturbed map.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Callable, Optional, Sequence

from .exact import HalfOpenInterval, IntervalSet, Sign, SignedPoint, rat_str
from .itm import ITMap, perturbed
from .attractor import attractor, orbit_keys, orbit_tail, periodic_carrier
from .returnmap import ReturnMapData, return_map
from .stability import is_stable
from .vectors import (
    CoeffVector,
    Infeasible,
    _counts_between,
    _unit_f,
    connection_vectors,
    cyclic_chain_vectors,
    general_connection_vector,
    has_connection,
    landing_vector,
    product,
    return_vector,
    solve_min_norm,
)


class NotEventuallyPeriodic(RuntimeError):
    """The attractor did not settle within the iteration budget."""


class BudgetExhausted(RuntimeError):
    """No admissible perturbation scale was found within the epsilon budget."""

    def __init__(self, message: str, trace: Optional["StabilizationTrace"] = None):
        super().__init__(message)
        self.trace = trace


# ---------------------------------------------------------------------------
# cycles, unstable number, correspondence


@dataclass(frozen=True)
class CycleDecomposition:
    cycles: tuple[tuple[SignedPoint, ...], ...]

    def sizes(self) -> list[int]:
        return [len(c) for c in self.cycles]

    def cycle_of(self, p: SignedPoint) -> tuple[SignedPoint, ...]:
        for c in self.cycles:
            if any(q.key == p.key for q in c):
                return c
        raise KeyError(str(p))


@dataclass(frozen=True)
class UnstableSummary:
    U: int
    cycle_sizes: tuple[int, ...]
    boundary: tuple[Fraction, ...]

    def to_dict(self) -> dict:
        return {
            "U": self.U,
            "cycle_sizes": list(self.cycle_sizes),
            "boundary": [rat_str(b) for b in self.boundary],
        }


def _finite_attractor(m: ITMap, budget: Optional[int] = None) -> IntervalSet:
    res = attractor(m, budget)
    if not res.finite:
        raise NotEventuallyPeriodic(
            f"attractor undetermined after budget {res.budget_used}"
        )
    return res.X


def _signed_orbit_keys(m: ITMap, p: SignedPoint, cap: int = 200_000) -> set[tuple]:
    return orbit_keys(m, p, cap)


def critical_cycles(
    m: ITMap, X: IntervalSet, cap: int = 200_000
) -> CycleDecomposition:
    """Partition of the signed partition points inside the attractor by
    mutual orbit membership."""
    pts = [p for p in m.critical_points() if X.member(p)]
    orbits = {p.key: _signed_orbit_keys(m, p, cap) for p in pts}
    groups: list[list[SignedPoint]] = []
    for p in pts:
        placed = False
        for g in groups:
            q = g[0]
            if p.key in orbits[q.key] and q.key in orbits[p.key]:
                g.append(p)
                placed = True
                break
        if not placed:
            groups.append([p])
    return CycleDecomposition(tuple(tuple(g) for g in groups))


def unstable_number(m: ITMap, budget: Optional[int] = None) -> UnstableSummary:
    X = _finite_attractor(m, budget)
    dec = critical_cycles(m, X, budget if budget is not None else 200_000)
    breaks = set(m.interior_breaks())
    boundary = tuple(sorted(b for b in X.boundary_values() if b in breaks))
    U = sum(len(c) - 1 for c in dec.cycles) + len(boundary)
    return UnstableSummary(U, tuple(dec.sizes()), boundary)


def _carrier(
    m: ITMap, p: SignedPoint, cap: int = 200_000
) -> tuple[HalfOpenInterval, int]:
    """Maximal periodic interval the orbit of p settles into, with its period."""
    carrier_pt, _pre, P = periodic_carrier(m, p, cap)
    _zero, period = orbit_tail(m, carrier_pt, cap)
    return P, period


def check_correspondence(
    m: ITMap, budget: Optional[int] = None
) -> tuple[bool, list[SignedPoint]]:
    """For each one-sided partition point in the attractor, the opposite side
    must eventually land in that point's periodic interval.  Returns the
    verdict and the list of failing points (the side that is in X)."""
    X = _finite_attractor(m, budget)
    cap = budget if budget is not None else 200_000
    failures = []
    for p in m.critical_points():
        if not X.member(p):
            continue
        P, _period = _carrier(m, p, cap)
        partner = SignedPoint(
            p.value, Sign.MINUS if p.sign is Sign.PLUS else Sign.PLUS
        )
        pre, period = orbit_tail(m, partner, cap)
        cur = partner
        landed = False
        for _ in range(pre + period):
            if P.contains(cur):
                landed = True
                break
            cur = m.apply(cur)
        if not landed:
            failures.append(p)
    return not failures, failures


# ---------------------------------------------------------------------------
# trace bookkeeping


@dataclass(frozen=True)
class TraceStep:
    kind: str
    delta: tuple[Fraction, ...]
    eps: Fraction
    u_before: int
    u_after: int

    def norm(self) -> Fraction:
        return max((abs(d) for d in self.delta), default=Fraction(0))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "delta": [rat_str(d) for d in self.delta],
            "eps": rat_str(self.eps),
            "u_before": self.u_before,
            "u_after": self.u_after,
        }


@dataclass
class StabilizationTrace:
    steps: list[TraceStep]

    def to_dict(self) -> dict:
        return {"steps": [s.to_dict() for s in self.steps]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# ---------------------------------------------------------------------------
# shared perturbation machinery

_SCALE_TRIES = 14


def _dedup(vectors: Sequence[CoeffVector]) -> list[CoeffVector]:
    seen = set()
    out = []
    for v in vectors:
        key = (v.e_part, v.f_part)
        if not any(key[0]) and not any(key[1]):
            continue
        if key not in seen:
            seen.add(key)
            out.append(v)
    return out


def _rescaled_extension(m: ITMap, delta: Sequence[Fraction]) -> Optional[ITMap]:
    """Apply delta with the domain endpoints treated as free parameters, then
    conjugate affinely back onto the unit interval.

    When a branch image would leave [0, 1], the domain is stretched to the
    image hull and rescaled; the result is an ordinary map with exactly the
    same dynamics up to the (exact) affine change of coordinates."""
    r = m.r
    gamma = [m.gamma[s] + delta[s] for s in range(r)]
    beta = list(m.beta)
    for i in range(1, r):
        beta[i] = beta[i] + delta[r + i - 1]
    if any(beta[i] >= beta[i + 1] for i in range(r)):
        return None
    lo = min(Fraction(0), *(beta[s] + gamma[s] for s in range(r)))
    hi = max(Fraction(1), *(beta[s + 1] + gamma[s] for s in range(r)))
    width = hi - lo
    interior = [(b - lo) / width for b in beta[1:-1]]
    # the outer cells absorb the slivers [lo, 0) and [1, hi)
    new_beta = tuple([Fraction(0)] + interior + [Fraction(1)])
    new_gamma = tuple(g / width for g in gamma)
    cand = ITMap(new_beta, new_gamma)
    return cand if cand.is_valid() else None


def _attempt(
    m: ITMap,
    pushes: Sequence[tuple[CoeffVector, int]],
    frozen: Sequence[CoeffVector],
    eps_max: Fraction,
    certify: Callable[[ITMap], bool],
    unit: Fraction = Fraction(1),
) -> tuple[ITMap, tuple[Fraction, ...], Fraction]:
    """Solve the constraint system, then shrink the scale until the perturbed
    map passes the exact certificate.  Frozen products are asserted to vanish
    exactly on every candidate.

    Scales are dyadic multiples of `unit` (the length of the periodic
    interval being operated on), which keeps the perturbed return map on a
    coarse rational grid instead of inheriting the solver's denominators."""
    if eps_max <= 0:
        raise BudgetExhausted("no epsilon budget left")
    push_keys = {(v.e_part, v.f_part) for v, _ in pushes}
    constraints: list[tuple[CoeffVector, Fraction]] = []
    for v in _dedup(frozen):
        if (v.e_part, v.f_part) in push_keys:
            raise Infeasible("a frozen vector coincides with a pushed one")
        constraints.append((v, Fraction(0)))
    for v, target in pushes:
        constraints.append((v, Fraction(target)))
    base = solve_min_norm(constraints)
    if all(x == 0 for x in base):
        raise Infeasible("constraint system only admits the zero perturbation")
    # reduce to a primitive integer direction so scaled parameters keep small
    # denominators
    denom = lcm(*(x.denominator for x in base))
    ints = [int(x * denom) for x in base]
    g = gcd(*(abs(i) for i in ints))
    ints = [i // g for i in ints]
    big = max(abs(i) for i in ints)
    # ratio between a pushed product and the raw scale s
    ratio = Fraction(denom, g)
    j = 1
    while (unit / 2**j) / ratio * big > eps_max:
        j += 1
    for k in range(j, j + _SCALE_TRIES):
        s = (unit / 2**k) / ratio
        delta = tuple(i * s for i in ints)
        mt = perturbed(m, delta)
        if not mt.is_valid():
            mt = _rescaled_extension(m, delta)
            if mt is None:
                continue
        for v in _dedup(frozen):
            assert product(v, delta) == 0
        actual = tuple(
            list(g2 - g1 for g1, g2 in zip(m.gamma, mt.gamma))
            + list(b2 - b1 for b1, b2 in zip(m.beta[1:-1], mt.beta[1:-1]))
        )
        if max(abs(d) for d in actual) > eps_max:
            continue
        try:
            if certify(mt):
                eps = max(abs(product(v, delta)) for v, _ in pushes)
                return mt, actual, eps
        except (NotEventuallyPeriodic, ValueError, RuntimeError):
            continue
    raise BudgetExhausted("no admissible scale certified the step")


def _component_of(X: IntervalSet, p: SignedPoint) -> HalfOpenInterval:
    for comp in X.parts:
        if comp.contains(p):
            return comp
    raise KeyError(str(p))


def _orbit_components(m: ITMap, X: IntervalSet, P: HalfOpenInterval, steps: int) -> set:
    """Indices of attractor components visited by iterating P for `steps`."""
    out = set()
    cur = SignedPoint(P.left, Sign.PLUS)
    for _ in range(steps + 1):
        for idx, comp in enumerate(X.parts):
            if comp.contains(cur):
                out.add(idx)
        cur = m.apply(cur)
    return out


def _first_hit(m: ITMap, p: SignedPoint) -> Optional[tuple[Fraction, int]]:
    breaks = set(m.interior_breaks())
    pre, _period = orbit_tail(m, p)
    cur = m.apply(p)
    for k in range(1, pre + 1):
        if cur.value in breaks:
            return cur.value, k
        cur = m.apply(cur)
    return None


def _freeze_background(
    m: ITMap,
    X: IntervalSet,
    dec: CycleDecomposition,
    skip_cycles: Sequence[tuple[SignedPoint, ...]],
    skip_components: set,
) -> list[CoeffVector]:
    """Chain vectors pinning every critical structure that the step must not
    disturb: the cycles away from the target's orbit and the connections of
    partition points outside the attractor."""
    skip_keys = {c[0].key for c in skip_cycles}
    frozen: list[CoeffVector] = []
    for cyc in dec.cycles:
        if cyc[0].key in skip_keys:
            continue
        host = None
        for idx, comp in enumerate(X.parts):
            if comp.contains(cyc[0]):
                host = idx
                break
        if host in skip_components:
            continue
        P, period = _carrier(m, cyc[0])
        frozen.extend(cyclic_chain_vectors(m, P, period))
    skip_values = {p.value for c in skip_cycles for p in c}
    for p in m.critical_points():
        if X.member(p):
            continue
        hit = _first_hit(m, p)
        if hit is None:
            continue
        if hit[0] in skip_values:
            # its target is being moved on purpose; pinning it would conflict
            continue
        frozen.append(general_connection_vector(m, p))
    return frozen


def _probe_chain(
    m: ITMap, p: SignedPoint, horizon: int
) -> tuple[Optional[CoeffVector], list[CoeffVector]]:
    """Landing vector and consecutive connection vectors of an arbitrary
    probe point over 0 <= t < horizon."""
    breaks = set(m.interior_breaks())
    hits: list[tuple[Fraction, int]] = []
    cur = p
    for t in range(horizon):
        if cur.value in breaks:
            hits.append((cur.value, t))
        cur = m.apply(cur)
    if not hits:
        return None, []
    v0, t0 = hits[0]
    landing = CoeffVector(
        _counts_between(m, p, 0, t0),
        tuple(_unit_f(m.r, m.break_index(v0), -1)),
        role=f"probe-landing[{p}]",
    )
    links = []
    for k in range(len(hits) - 1):
        (bf, qf), (bt, qt) = hits[k], hits[k + 1]
        f = [0] * (m.r - 1)
        f[m.break_index(bf) - 1] += 1
        f[m.break_index(bt) - 1] -= 1
        links.append(
            CoeffVector(
                _counts_between(m, p, qf, qt), tuple(f), role=f"probe-link[{p},{k}]"
            )
        )
    return landing, links


def _component_freight(m: ITMap, rmd: ReturnMapData) -> dict:
    """All the vectors tied to one component's return structure, grouped so
    each case can decide what to pin and what to push."""
    comp = rmd.J
    landings = [landing_vector(m, rmd, j) for j in range(len(rmd.landings))]
    links = []
    first_links: dict[tuple[int, Sign], CoeffVector] = {}
    for j in range(len(rmd.landings)):
        for sign in (Sign.PLUS, Sign.MINUS):
            chain = connection_vectors(m, rmd, j, sign)
            if chain:
                first_links[(j, sign)] = chain[0]
            links.extend(chain)
    left = SignedPoint(comp.left, Sign.PLUS)
    right = SignedPoint(comp.right, Sign.MINUS)
    lt = rmd.branch_containing(left).return_time
    rt = rmd.branch_containing(right).return_time
    l_land, l_links = _probe_chain(m, left, lt)
    r_land, r_links = _probe_chain(m, right, rt)
    returns = [return_vector(m, rmd, j, Sign.PLUS) for j in range(rmd.branch_count())]
    return {
        "landings": landings,
        "links": links,
        "first_links": first_links,
        "left_landing": l_land,
        "left_links": l_links,
        "right_landing": r_land,
        "right_links": r_links,
        "returns": returns,
    }


# ---------------------------------------------------------------------------
# correspondence perturbation


def perturb_to_correspondence(
    m: ITMap, eps_max: Fraction, budget: Optional[int] = None
) -> tuple[ITMap, TraceStep]:
    """Break the periodic cycle hosting a correspondence failure so that the
    offending discontinuity leaves the attractor; everything with a disjoint
    orbit is pinned in place."""
    if eps_max <= 0:
        raise BudgetExhausted("epsilon budget is zero")
    X = _finite_attractor(m, budget)
    u_before = unstable_number(m, budget).U
    ok, failures = check_correspondence(m, budget)
    if ok:
        zero = tuple([Fraction(0)] * (2 * m.r - 1))
        return m, TraceStep("Correspondence", zero, Fraction(0), u_before, u_before)
    target = failures[0]
    dec = critical_cycles(m, X)
    cyc = dec.cycle_of(target)
    P, period = _carrier(m, target)
    chain = cyclic_chain_vectors(m, P, period)
    if chain:
        push, rest = chain[-1], list(chain[:-1])
    else:
        push, rest = _direct_push(m, P), []
    orbit_comps = _orbit_components(m, X, P, period)
    frozen = _freeze_background(m, X, dec, [cyc], orbit_comps) + rest
    n_failures = len(failures)

    def certify(mt: ITMap) -> bool:
        summary = unstable_number(mt, budget)
        if summary.U > u_before:
            return False
        ok_after, fails_after = check_correspondence(mt, budget)
        return ok_after or len(fails_after) < n_failures

    for sign in (-1, 1):
        try:
            mt, delta, eps = _attempt(
                m, [(push, sign)], frozen, eps_max, certify, P.right - P.left
            )
            u_after = unstable_number(mt, budget).U
            return mt, TraceStep("Correspondence", delta, eps, u_before, u_after)
        except (Infeasible, BudgetExhausted):
            continue
    raise BudgetExhausted("correspondence perturbation found no admissible scale")


# ---------------------------------------------------------------------------
# unstable-number reduction


def _image_order(rmd: ReturnMapData) -> list[int]:
    return sorted(range(rmd.branch_count()), key=lambda j: rmd.branches[j].image.left)


def _strip_candidates(m: ITMap, rmd: ReturnMapData) -> list[tuple[list, list]]:
    """Perturbations opening a gap at one interior critical value of the
    return map: push the neighbouring branch images apart, pinning landings
    and connection chains so only those two return legs move."""
    comp = rmd.J
    order = _image_order(rmd)
    n = rmd.branch_count()
    crit_values = [rmd.branches[order[q]].image.left for q in range(1, n)]
    crit_points = {rmd.branches[j].domain.left for j in range(1, n)}
    out = []
    q_order = list(range(1, n))
    if n > 3:
        q_order.sort(key=lambda q: (q != 2, q))
    for q in q_order:
        v = crit_values[q - 1]
        i_plus = order[q]
        i_left = order[q - 1]
        if rmd.branches[i_left].image.left > comp.left:
            i_minus = i_left
        else:
            i_minus = order[-1]
        if i_minus == i_plus:
            continue
        # iterate v until it meets a critical point of the return map,
        # counting time spent in the two branches being moved
        cur = SignedPoint(v, Sign.PLUS)
        a = b = 0
        P_time = None
        cap = 4 * m.grid_lcm()
        for t in range(cap):
            if cur.value in crit_points:
                P_time = t
                break
            br = rmd.branch_containing(cur)
            if br is rmd.branches[i_minus]:
                a += 1
            elif br is rmd.branches[i_plus]:
                b += 1
            cur = rmd.apply(cur)
        if P_time is None:
            continue
        pushes = []
        for j in range(n):
            if j == i_minus:
                pushes.append((return_vector(m, rmd, j, Sign.PLUS), -(2 * b + 1)))
            elif j == i_plus:
                pushes.append((return_vector(m, rmd, j, Sign.PLUS), 2 * a + 1))
            else:
                pushes.append((return_vector(m, rmd, j, Sign.PLUS), 0))
        out.append((pushes, []))
    return out


def _two_branch_candidates(m: ITMap, rmd: ReturnMapData) -> list[tuple[list, list]]:
    """With only one interior critical value no gap can be opened, so break
    the deeper connections along the orbits of the landing point and the
    component boundary instead, compensating the returns to keep the return
    map itself fixed."""
    fr = _component_freight(m, rmd)
    if len(rmd.landings) != 1:
        return []
    pushes = []
    extra_frozen = list(fr["landings"]) + fr["left_links"] + fr["right_links"]
    if fr["left_landing"] is not None:
        pushes.append((fr["left_landing"], 1))
    if fr["right_landing"] is not None:
        pushes.append((fr["right_landing"], -1))
    for (j, sign), first in fr["first_links"].items():
        pushes.append((first, 1 if sign is Sign.PLUS else -1))
    deeper = [
        v
        for v in fr["links"]
        if all(v is not first for first in fr["first_links"].values())
    ]
    extra_frozen += deeper
    pushes.append((return_vector(m, rmd, 0, Sign.PLUS), 1))
    pushes.append((return_vector(m, rmd, 1, Sign.PLUS), -1))
    if all(t == 0 for _, t in pushes):
        return []
    mirrored = [(v, -t) for v, t in pushes]
    return [(pushes, extra_frozen), (mirrored, extra_frozen)]


def _one_branch_candidates(
    m: ITMap, rmd: ReturnMapData, target: SignedPoint
) -> list[tuple[list, list]]:
    """The discontinuity sits on the boundary of its own periodic interval;
    break the first connection along its orbit and slide the return."""
    fr = _component_freight(m, rmd)
    ret = return_vector(m, rmd, 0, Sign.PLUS)
    out = []
    if target.sign is Sign.PLUS:
        own_links, other_landing = fr["left_links"], fr["right_landing"]
        own_landing, other_links = fr["left_landing"], fr["right_links"]
        s = 1
    else:
        own_links, other_landing = fr["right_links"], fr["left_landing"]
        own_landing, other_links = fr["right_landing"], fr["left_links"]
        s = -1
    if not own_links:
        return []
    pushes = [(own_links[0], s), (ret, -s)]
    if other_landing is not None:
        pushes.append((other_landing, -s))
    frozen_extra = own_links[1:] + other_links + fr["landings"]
    if own_landing is not None:
        frozen_extra.append(own_landing)
    mirrored = [(v, -t) for v, t in pushes]
    out.append((pushes, frozen_extra))
    out.append((mirrored, frozen_extra))
    return out


def _direct_push(m: ITMap, P: HalfOpenInterval) -> CoeffVector:
    """Push vector for a pointwise-fixed carrier.  The return on P is the
    identity and crosses no break, so there is no chain to open; instead the
    translation of the branch holding the carrier is moved directly off the
    identity."""
    mid = SignedPoint((P.left + P.right) / 2, Sign.PLUS)
    i = m.branch_of(mid) - 1
    e = tuple(1 if k == i else 0 for k in range(m.r))
    return CoeffVector(e, tuple([0] * (m.r - 1)), role="direct")


def _boundary_candidates(
    m: ITMap, X: IntervalSet, dec: CycleDecomposition, budget: Optional[int]
) -> list[tuple[list, list, set, list, Fraction]]:
    """Slide the return of a periodic interval whose boundary carries a
    partition point, detaching the point from the attractor edge."""
    breaks = set(m.interior_breaks())
    out = []
    for comp in X.parts:
        for value, sign in ((comp.left, Sign.PLUS), (comp.right, Sign.MINUS)):
            if value not in breaks:
                continue
            p = SignedPoint(value, sign)
            P, period = _carrier(m, p)
            chain = cyclic_chain_vectors(m, P, period)
            orbit_comps = _orbit_components(m, X, P, period)
            skip = [c for c in dec.cycles if any(q.value == value for q in c)]
            if chain:
                push, rest = chain[-1], list(chain[:-1])
            else:
                push, rest = _direct_push(m, P), []
            for push_sign in (-1, 1):
                out.append(
                    (
                        [(push, push_sign)],
                        rest,
                        orbit_comps,
                        skip,
                        P.right - P.left,
                    )
                )
    return out


def reduce_unstable(
    m: ITMap, eps_max: Fraction, budget: Optional[int] = None
) -> tuple[ITMap, TraceStep]:
    """One strictly U-decreasing perturbation: dispatches on the branch count
    of the component hosting the targeted critical connection."""
    X = _finite_attractor(m, budget)
    dec = critical_cycles(m, X)
    summary = unstable_number(m, budget)
    u_before = summary.U
    if u_before == 0:
        raise ValueError("the unstable number is already zero")

    def certify(mt: ITMap) -> bool:
        return unstable_number(mt, budget).U < u_before

    nontrivial = [c for c in dec.cycles if len(c) > 1]
    errors: list[Exception] = []
    if nontrivial:
        # prefer the discontinuity hosted in the component with the most
        # return branches: there the gap-opening perturbation applies
        rmds: dict[Fraction, ReturnMapData] = {}
        targets = []
        for cyc in nontrivial:
            for p in cyc:
                comp = _component_of(X, p)
                if comp.left not in rmds:
                    rmds[comp.left] = return_map(m, X, comp)
                targets.append((rmds[comp.left].branch_count(), p, cyc, comp))
        targets.sort(key=lambda t: -t[0])
        for n0, p, cyc, comp in targets:
            rmd = rmds[comp.left]
            if n0 >= 3:
                kind = "CaseN0gt3" if n0 > 3 else "CaseN0eq3"
                candidates = _strip_candidates(m, rmd)
            elif n0 == 2:
                kind = "CaseN0eq2"
                candidates = _two_branch_candidates(m, rmd)
            else:
                kind = "CaseN0eq1"
                candidates = _one_branch_candidates(m, rmd, p)
            steps = max(br.return_time for br in rmd.branches)
            orbit_comps = _orbit_components(m, X, comp, steps)
            background = _freeze_background(m, X, dec, [cyc], orbit_comps)
            P, _period = _carrier(m, p)
            unit = P.right - P.left
            for pushes, extra in candidates:
                try:
                    mt, delta, eps = _attempt(
                        m, pushes, background + extra, eps_max, certify, unit
                    )
                    u_after = unstable_number(mt, budget).U
                    return mt, TraceStep(kind, delta, eps, u_before, u_after)
                except (Infeasible, BudgetExhausted) as exc:
                    errors.append(exc)
    for pushes, chain_rest, orbit_comps, skip, unit in _boundary_candidates(
        m, X, dec, budget
    ):
        background = _freeze_background(m, X, dec, skip, orbit_comps)
        try:
            mt, delta, eps = _attempt(
                m, pushes, background + chain_rest, eps_max, certify, unit
            )
            u_after = unstable_number(mt, budget).U
            return mt, TraceStep("BoundaryRemoval", delta, eps, u_before, u_after)
        except (Infeasible, BudgetExhausted) as exc:
            errors.append(exc)
    raise BudgetExhausted(
        f"no reduction certified (tried {len(errors)} candidate systems)"
    )


# ---------------------------------------------------------------------------
# the final connection sweep and the full pipeline


def _a3_fix(
    m: ITMap, eps_max: Fraction, budget: Optional[int] = None
) -> tuple[ITMap, TraceStep]:
    """Push every connection of an off-attractor partition point strictly off
    its target, pinning all on-attractor cycles."""
    X = _finite_attractor(m, budget)
    dec = critical_cycles(m, X)
    u_before = unstable_number(m, budget).U
    frozen: list[CoeffVector] = []
    for cyc in dec.cycles:
        P, period = _carrier(m, cyc[0])
        frozen.extend(cyclic_chain_vectors(m, P, period))
    pushes = []
    for p in m.critical_points():
        if X.member(p) or not has_connection(m, p):
            continue
        pushes.append(
            (general_connection_vector(m, p), 1 if p.sign is Sign.PLUS else -1)
        )
    if not pushes:
        raise Infeasible("no off-attractor connections to remove")

    def certify(mt: ITMap) -> bool:
        return is_stable(mt, budget).stable

    for flip in (1, -1):
        try:
            mt, delta, eps = _attempt(
                m, [(v, flip * t) for v, t in pushes], frozen, eps_max, certify
            )
            return mt, TraceStep("A3Fix", delta, eps, u_before, u_before)
        except (Infeasible, BudgetExhausted):
            continue
    raise BudgetExhausted("connection sweep found no admissible scale")


def stabilize(
    m: ITMap, eps_total: Fraction, budget: Optional[int] = None
) -> tuple[ITMap, StabilizationTrace]:
    """Drive the map to a certified stable one: alternate correspondence
    repair with unstable-number reduction, finish with the connection sweep,
    and keep the summed parameter displacement within eps_total."""
    m.require_valid()
    trace = StabilizationTrace([])
    cur = m
    remaining = Fraction(eps_total)
    for _round in range(48):
        report = is_stable(cur, budget)
        if not report.attractor.finite:
            raise NotEventuallyPeriodic("map left the eventually periodic regime")
        summary = unstable_number(cur, budget)
        if report.stable and summary.U == 0:
            # stable and in general position: nothing left to repair
            return cur, trace
        step_eps = remaining / 2
        if step_eps <= 0:
            raise BudgetExhausted("epsilon budget exhausted", trace)
        corr_ok, _fails = check_correspondence(cur, budget)
        try:
            if not corr_ok:
                cur, step = perturb_to_correspondence(cur, step_eps, budget)
            elif summary.U > 0:
                cur, step = reduce_unstable(cur, step_eps, budget)
            else:
                cur, step = _a3_fix(cur, step_eps, budget)
        except (Infeasible, BudgetExhausted) as exc:
            raise BudgetExhausted(str(exc), trace) from exc
        if step.norm() > 0:
            trace.steps.append(step)
            remaining -= step.norm()
    raise BudgetExhausted("stabilization did not converge", trace)
