"""First-return maps to intervals inside the attractor.

Branches are the maximal continuity intervals of the first-return map, found
by exact interval propagation: pieces of J are pushed forward, split at
partition points and at preimages of J's endpoints, and retired when they
land back inside J.  Landing data records where interior branch endpoints
meet one-sided partition points before returning.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .exact import HalfOpenInterval, IntervalSet, Sign, SignedPoint, rat_str
from .itm import ITMap


class NotInvariant(ValueError):
    pass


class Diverged(RuntimeError):
    """A piece failed to return within the grid bound; indicates J is not
    inside an invariant set (or an internal inconsistency)."""


@dataclass(frozen=True)
class Branch:
    domain: HalfOpenInterval
    return_time: int
    translation: Fraction
    image: HalfOpenInterval


@dataclass(frozen=True)
class Landing:
    """Interior branch endpoint whose orbit meets a one-sided partition point
    strictly before returning."""

    a: Fraction
    l: int  # first time the orbit value sits on a partition point
    plus_chain: tuple[tuple[SignedPoint, int], ...]
    minus_chain: tuple[tuple[SignedPoint, int], ...]


@dataclass(frozen=True)
class ReturnMapData:
    J: HalfOpenInterval
    branches: tuple[Branch, ...]
    landings: tuple[Landing, ...]
    sigma: tuple[int, ...]  # 1-based: branch j's image has rank sigma[j-1]
    tau: tuple[int, ...]  # inverse of sigma

    def branch_count(self) -> int:
        return len(self.branches)

    def branch_containing(self, p: SignedPoint) -> Branch:
        for br in self.branches:
            if br.domain.contains(p):
                return br
        raise ValueError(f"{p} not in any branch of the return map to {self.J}")

    def apply(self, p: SignedPoint) -> SignedPoint:
        return p.shifted(self.branch_containing(p).translation)

    def to_dict(self) -> dict:
        return {
            "J": [rat_str(self.J.left), rat_str(self.J.right)],
            "branches": [
                {
                    "domain": [rat_str(b.domain.left), rat_str(b.domain.right)],
                    "return_time": b.return_time,
                    "translation": rat_str(b.translation),
                    "image": [rat_str(b.image.left), rat_str(b.image.right)],
                }
                for b in self.branches
            ],
            "landings": [
                {
                    "a": rat_str(ld.a),
                    "l": ld.l,
                    "plus_chain": [[str(p), q] for p, q in ld.plus_chain],
                    "minus_chain": [[str(p), q] for p, q in ld.minus_chain],
                }
                for ld in self.landings
            ],
            "sigma": list(self.sigma),
            "tau": list(self.tau),
        }


def _critical_chain(m: ITMap, p: SignedPoint, horizon: int) -> list[tuple[SignedPoint, int]]:
    """Times 0 <= q < horizon at which the orbit value sits on an interior
    partition point, with the one-sided point it realizes."""
    breaks = set(m.interior_breaks())
    out = []
    cur = p
    for q in range(horizon):
        if cur.value in breaks:
            out.append((SignedPoint(cur.value, cur.sign), q))
        cur = m.apply(cur)
    return out


def return_map(m: ITMap, X: IntervalSet, J: HalfOpenInterval) -> ReturnMapData:
    """Exact first-return map of T to J, with J contained in the attractor."""
    if not IntervalSet([J]).issubset(X):
        raise NotInvariant(f"{J} is not contained in the attractor")

    bound = 8 * m.denominator_lcm() * m.r + 64
    # pieces: (lo, hi, offset, t) meaning points y in [lo,hi) of J currently at
    # y + offset after t steps of T
    pending: list[tuple[Fraction, Fraction, Fraction, int]] = [
        (J.left, J.right, Fraction(0), 0)
    ]
    done: list[tuple[Fraction, Fraction, Fraction, int]] = []
    guard = 0
    while pending:
        guard += 1
        if guard > 1000 * (bound + len(done) + 1):
            raise Diverged(f"return to {J} did not resolve")
        lo, hi, off, t = pending.pop()
        if t > bound:
            raise Diverged(f"piece [{rat_str(lo)},{rat_str(hi)}) exceeded step bound")
        a, b = lo + off, hi + off
        if t > 0:
            # returned part?
            if J.left <= a and b <= J.right:
                done.append((lo, hi, off, t))
                continue
            # cut where the current image crosses a J endpoint
            cuts = sorted(c - off for c in (J.left, J.right) if a < c < b)
            if cuts:
                pts = [lo] + cuts + [hi]
                for i in range(len(pts) - 1):
                    pending.append((pts[i], pts[i + 1], off, t))
                continue
            if J.left < b and a < J.right:
                # overlaps J but no endpoint falls strictly inside: impossible
                raise Diverged("piece straddles J without a cut point")
        # advance one step of T: split at partition points first
        interior = [c - off for c in m.interior_breaks() if a < c < b]
        if interior:
            pts = [lo] + sorted(interior) + [hi]
            for i in range(len(pts) - 1):
                pending.append((pts[i], pts[i + 1], off, t))
            continue
        # a may sit exactly on a partition point; the piece is to its right,
        # so use the right limit to pick the branch
        s = m.branch_of(SignedPoint(a, Sign.PLUS))
        pending.append((lo, hi, off + m.gamma[s - 1], t + 1))

    done.sort(key=lambda piece: piece[0])
    branches = []
    for lo, hi, off, t in done:
        branches.append(
            Branch(
                HalfOpenInterval(lo, hi),
                t,
                off,
                HalfOpenInterval(lo + off, hi + off),
            )
        )
    _check_partition(J, branches)

    # landings: interior branch endpoints whose orbit meets a partition point
    # strictly before the relevant return time
    landings = []
    for j in range(1, len(branches)):
        a = branches[j].domain.left
        r_plus = branches[j].return_time
        r_minus = branches[j - 1].return_time
        plus_chain = _critical_chain(m, SignedPoint(a, Sign.PLUS), r_plus)
        minus_chain = _critical_chain(m, SignedPoint(a, Sign.MINUS), r_minus)
        if plus_chain or minus_chain:
            first = min(
                [q for _, q in plus_chain] + [q for _, q in minus_chain]
            )
            landings.append(
                Landing(a, first, tuple(plus_chain), tuple(minus_chain))
            )

    order = sorted(range(len(branches)), key=lambda j: branches[j].image.left)
    sigma = [0] * len(branches)
    for rank, j in enumerate(order, start=1):
        sigma[j] = rank
    tau = [0] * len(branches)
    for j, rank in enumerate(sigma):
        tau[rank - 1] = j + 1
    return ReturnMapData(J, tuple(branches), tuple(landings), tuple(sigma), tuple(tau))


def _check_partition(J: HalfOpenInterval, branches: list[Branch]) -> None:
    cursor = J.left
    for br in branches:
        if br.domain.left != cursor:
            raise Diverged(f"branch domains do not tile {J}")
        cursor = br.domain.right
    if cursor != J.right:
        raise Diverged(f"branch domains do not tile {J}")
    images = sorted((br.image.left, br.image.right) for br in branches)
    cursor = J.left
    for a, b in images:
        if a != cursor:
            raise Diverged(f"branch images do not tile {J}")
        cursor = b
    if cursor != J.right:
        raise Diverged(f"branch images do not tile {J}")


@dataclass(frozen=True)
class RotationData:
    is_rotation: bool
    rotation_number: Optional[Fraction]


def rotation_data(rmd: ReturnMapData) -> RotationData:
    """A 1-branch identity return or a 2-branch swap is a circle rotation."""
    n = rmd.branch_count()
    if n == 1:
        br = rmd.branches[0]
        if br.translation == 0:
            return RotationData(True, Fraction(0))
        return RotationData(False, None)
    if n == 2 and rmd.sigma == (2, 1):
        return RotationData(True, rmd.branches[1].domain.length / rmd.J.length)
    return RotationData(False, None)


def dynamically_trivial(m: ITMap, X: IntervalSet, J: HalfOpenInterval) -> bool:
    """True iff no interior point lands on a partition point before returning
    and the return map is the identity."""
    rmd = return_map(m, X, J)
    return (
        rmd.branch_count() == 1
        and rmd.branches[0].translation == 0
        and not rmd.landings
    )
