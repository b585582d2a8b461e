"""Stability certification: near-preimage trees, orbit-collision checks,
matching of landing points, and the overall verdict.

A map is certified stable when its attractor is finite and:

* A1 — along every landing/boundary return orbit at most one partition point
  is met (counting times 0..return time inclusive);
* A2 — the boundary orbits of every dynamically non-trivial component avoid
  partition points strictly before returning;
* A3 — no one-sided partition point off the attractor occurs in its own
  near-preimage tree;
* matching — every dynamically non-trivial component has exactly one interior
  landing point, and its two one-sided return orbits stitch the component
  back together exactly.

Under these conditions the attractor moves homeomorphically under small
parameter changes, which is what "stable" means operationally here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .exact import HalfOpenInterval, IntervalSet, Sign, SignedPoint
from .itm import ITMap
from .attractor import AttractorResult, attractor, orbit_tail
from .returnmap import ReturnMapData, return_map, rotation_data


def ghost_preimages(m: ITMap, p: SignedPoint) -> list[SignedPoint]:
    """One-sided partition points of the opposite side and a *different* value
    whose orbit hits p's value at some time k >= 1.

    A plus point's near-preimages are minus points landing on its minus
    version, and symmetrically.  The same-value exclusion keeps a periodic
    point from being its own near-preimage.
    """
    if p.value not in m.interior_breaks():
        raise ValueError(f"{p} is not an interior partition point")
    want_sign = Sign.MINUS if p.sign is Sign.PLUS else Sign.PLUS
    out = []
    for b in m.interior_breaks():
        if b == p.value:
            continue
        q = SignedPoint(b, want_sign)
        if _orbit_hits_value(m, q, p.value):
            out.append(q)
    return out


def _orbit_hits_value(m: ITMap, q: SignedPoint, target: Fraction) -> bool:
    pre, period = orbit_tail(m, q)
    cur = m.apply(q)
    for _ in range(pre + period):
        if cur.value == target:
            return True
        cur = m.apply(cur)
    return False


@dataclass(frozen=True)
class GhostNode:
    point: SignedPoint
    level: int
    children: tuple["GhostNode", ...]


@dataclass(frozen=True)
class GhostTree:
    root: GhostNode
    contains_root_again: bool

    def nodes(self) -> list[GhostNode]:
        out = []
        stack = [self.root]
        while stack:
            n = stack.pop()
            out.append(n)
            stack.extend(n.children)
        return out


def ghost_tree(m: ITMap, p: SignedPoint) -> GhostTree:
    """Leveled near-preimage tree rooted at p.

    Signs alternate with the level.  A path stops as soon as its new node
    repeats a label already on that path — by the repetition lemma any deeper
    structure is periodic, and the root reappearing anywhere (at level > 0)
    certifies the tree is infinite.
    """
    root_key = p.key
    found_root = [False]

    def expand(q: SignedPoint, level: int, path: frozenset) -> GhostNode:
        kids = []
        for g in ghost_preimages(m, q):
            if g.key == root_key and level + 1 > 0:
                found_root[0] = True
            if g.key in path:
                kids.append(GhostNode(g, level + 1, ()))
            else:
                kids.append(expand(g, level + 1, path | {g.key}))
        return GhostNode(q, level, tuple(kids))

    root = expand(p, 0, frozenset({root_key}))
    return GhostTree(root, found_root[0])


@dataclass(frozen=True)
class CheckVerdict:
    ok: bool
    witness: Optional[str] = None


@dataclass(frozen=True)
class AccReport:
    a1: CheckVerdict
    a2: CheckVerdict
    a3: CheckVerdict


@dataclass(frozen=True)
class StabilityReport:
    attractor: AttractorResult
    acc: Optional[AccReport]
    matching: Optional[CheckVerdict]
    stable: bool

    def to_dict(self) -> dict:
        d: dict = {"attractor": self.attractor.to_dict(), "stable": self.stable}
        if self.acc is not None:
            d["A1"] = {"ok": self.acc.a1.ok, "witness": self.acc.a1.witness}
            d["A2"] = {"ok": self.acc.a2.ok, "witness": self.acc.a2.witness}
            d["A3"] = {"ok": self.acc.a3.ok, "witness": self.acc.a3.witness}
        if self.matching is not None:
            d["matching"] = {"ok": self.matching.ok, "witness": self.matching.witness}
        return d


def _nontrivial_components(
    m: ITMap, X: IntervalSet
) -> list[tuple[HalfOpenInterval, ReturnMapData]]:
    out = []
    for comp in X.parts:
        rmd = return_map(m, X, comp)
        trivial = (
            rmd.branch_count() == 1
            and rmd.branches[0].translation == 0
            and not rmd.landings
        )
        if not trivial:
            out.append((comp, rmd))
    return out


def _hits_up_to(m: ITMap, p: SignedPoint, horizon: int) -> list[tuple[Fraction, int]]:
    """Times 0 <= k <= horizon where the orbit value sits on a partition point."""
    breaks = set(m.interior_breaks())
    out = []
    cur = p
    for k in range(horizon + 1):
        if cur.value in breaks:
            out.append((cur.value, k))
        if k < horizon:
            cur = m.apply(cur)
    return out


def check_acc(
    m: ITMap,
    X: IntervalSet,
    nontrivial: Optional[list[tuple[HalfOpenInterval, ReturnMapData]]] = None,
) -> AccReport:
    if nontrivial is None:
        nontrivial = _nontrivial_components(m, X)

    a1 = CheckVerdict(True)
    a2 = CheckVerdict(True)
    for comp, rmd in nontrivial:
        # probes: landing points one-sidedly, and the component's boundary
        probes: list[tuple[SignedPoint, int, bool]] = []
        left = SignedPoint(comp.left, Sign.PLUS)
        right = SignedPoint(comp.right, Sign.MINUS)
        probes.append((left, rmd.branch_containing(left).return_time, True))
        probes.append((right, rmd.branch_containing(right).return_time, True))
        for ld in rmd.landings:
            for sign in (Sign.PLUS, Sign.MINUS):
                p = SignedPoint(ld.a, sign)
                probes.append((p, rmd.branch_containing(p).return_time, False))
        for p, rt, is_boundary in probes:
            hits = _hits_up_to(m, p, rt)
            if a1.ok and len(hits) > 1:
                a1 = CheckVerdict(
                    False,
                    f"orbit of {p} in {comp} meets partition points at times "
                    f"{[k for _, k in hits]}",
                )
            if is_boundary and a2.ok:
                early = [h for h in hits if h[1] < rt]
                if early:
                    v, k = early[0]
                    a2 = CheckVerdict(
                        False,
                        f"boundary orbit of {p} meets partition point {v} at time {k}",
                    )

    a3 = CheckVerdict(True)
    for p in m.critical_points():
        if not X.member_value(p.value):
            t = ghost_tree(m, p)
            if t.contains_root_again:
                a3 = CheckVerdict(False, f"{p} occurs in its own near-preimage tree")
                break
    return AccReport(a1, a2, a3)


def check_matching(
    m: ITMap,
    X: IntervalSet,
    nontrivial: Optional[list[tuple[HalfOpenInterval, ReturnMapData]]] = None,
) -> CheckVerdict:
    if nontrivial is None:
        nontrivial = _nontrivial_components(m, X)
    for comp, rmd in nontrivial:
        if len(rmd.landings) != 1:
            return CheckVerdict(
                False,
                f"component {comp} has {len(rmd.landings)} interior landing points "
                f"at {[str(ld.a) for ld in rmd.landings]}",
            )
        a = rmd.landings[0].a
        ra_plus = rmd.apply(SignedPoint(a, Sign.PLUS))
        ra_minus = rmd.apply(SignedPoint(a, Sign.MINUS))
        if ra_plus.value != comp.left or ra_minus.value != comp.right:
            return CheckVerdict(
                False,
                f"return images of {a} do not reach the boundary of {comp}: "
                f"{ra_plus}, {ra_minus}",
            )
        r2_plus = rmd.apply(ra_plus)
        r2_minus = rmd.apply(ra_minus)
        if r2_plus.value != r2_minus.value:
            return CheckVerdict(
                False,
                f"second return images of {a} disagree: {r2_plus} vs {r2_minus}",
            )
    return CheckVerdict(True)


def is_stable(
    m: ITMap,
    budget: Optional[int] = None,
    precomputed: Optional[AttractorResult] = None,
) -> StabilityReport:
    res = precomputed if precomputed is not None else attractor(m, budget)
    if not res.finite:
        return StabilityReport(res, None, None, False)
    nontrivial = _nontrivial_components(m, res.X)
    acc = check_acc(m, res.X, nontrivial)
    matching = check_matching(m, res.X, nontrivial)
    stable = acc.a1.ok and acc.a2.ok and acc.a3.ok and matching.ok
    return StabilityReport(res, acc, matching, stable)
