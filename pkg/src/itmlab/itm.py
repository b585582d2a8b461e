"""Interval translation maps: data type, validation, evaluation, orbits.

A map of [0,1) that acts as ``x -> x + gamma[i]`` on the half-open cell
``[beta[i-1], beta[i])``.  Images of distinct cells may overlap, which is what
makes these maps non-invertible in general.

Signed points are iterated one-sidedly: ``x+`` follows the branch to its
right limit, ``x-`` the branch to its left limit.  Geometric points equal to a
partition point have no well-defined image and are rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

from .exact import (
    HalfOpenInterval,
    IntervalSet,
    RationalLike,
    Sign,
    SignedPoint,
    rat,
    rat_str,
    union_all,
)


class GeometricDiscontinuity(ValueError):
    """Raised when asked to iterate a geometric point sitting on a partition point."""


class InvalidMap(ValueError):
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class ITMap:
    """A piecewise translation of [domain_left, domain_right).

    For the standard parameter space the domain is [0, 1).  ``extended`` maps
    relax the outer endpoints (used when perturbing within constrained
    families); their domain is [beta[0], beta[r]).
    """

    beta: tuple[Fraction, ...]
    gamma: tuple[Fraction, ...]
    extended: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "beta", tuple(rat(b) for b in self.beta))
        object.__setattr__(self, "gamma", tuple(rat(g) for g in self.gamma))
        if len(self.beta) != len(self.gamma) + 1:
            raise InvalidMap(["need exactly one more partition point than branch"])

    # -- structure ---------------------------------------------------------

    @property
    def r(self) -> int:
        return len(self.gamma)

    @property
    def domain(self) -> HalfOpenInterval:
        return HalfOpenInterval(self.beta[0], self.beta[-1])

    def cell(self, s: int) -> HalfOpenInterval:
        """Branch cell I_s = [beta[s-1], beta[s]), s in 1..r."""
        return HalfOpenInterval(self.beta[s - 1], self.beta[s])

    def cells(self) -> list[HalfOpenInterval]:
        return [self.cell(s) for s in range(1, self.r + 1)]

    def interior_breaks(self) -> tuple[Fraction, ...]:
        """The partition points that are actual discontinuity candidates."""
        return self.beta[1:-1]

    def critical_points(self) -> list[SignedPoint]:
        """Both one-sided versions of every interior partition point."""
        out = []
        for b in self.interior_breaks():
            out.append(SignedPoint(b, Sign.PLUS))
            out.append(SignedPoint(b, Sign.MINUS))
        return out

    def break_index(self, value: Fraction) -> int:
        """1-based index of an interior partition point by value."""
        for i, b in enumerate(self.interior_breaks(), start=1):
            if b == value:
                return i
        raise ValueError(f"{rat_str(value)} is not an interior partition point")

    def denominator_lcm(self) -> int:
        """lcm of the denominators of all translation amounts (>= 1)."""
        return reduce(math.lcm, (g.denominator for g in self.gamma), 1)

    def grid_lcm(self) -> int:
        """lcm over translations and partition points; orbit values of any
        partition point live on the grid with this denominator."""
        q = self.denominator_lcm()
        for b in self.beta:
            q = math.lcm(q, b.denominator)
        return q

    # -- validation --------------------------------------------------------

    def violations(self) -> list[str]:
        out: list[str] = []
        if not self.extended:
            if self.beta[0] != 0:
                out.append("left endpoint must be 0")
            if self.beta[-1] != 1:
                out.append("right endpoint must be 1")
        for i in range(len(self.beta) - 1):
            if not self.beta[i] < self.beta[i + 1]:
                out.append(
                    f"partition points not increasing at position {i}: "
                    f"{rat_str(self.beta[i])} !< {rat_str(self.beta[i + 1])}"
                )
        if out:
            return out  # range checks are meaningless on a bad partition
        lo, hi = self.beta[0], self.beta[-1]
        for s in range(1, self.r + 1):
            g = self.gamma[s - 1]
            if not self.extended:
                if g < -self.beta[s - 1]:
                    out.append(
                        f"branch {s} maps below 0: gamma_{s}={rat_str(g)} < "
                        f"-{rat_str(self.beta[s - 1])}"
                    )
                if g > 1 - self.beta[s]:
                    out.append(
                        f"branch {s} maps above 1: gamma_{s}={rat_str(g)} > "
                        f"{rat_str(1 - self.beta[s])}"
                    )
            else:
                # one-sided closure conditions on the free outer endpoints
                if self.beta[s - 1] + g < lo:
                    out.append(f"branch {s} image starts before the domain")
                if self.beta[s] + g > hi:
                    out.append(f"branch {s} image ends after the domain")
        return out

    def is_valid(self) -> bool:
        return not self.violations()

    def require_valid(self) -> "ITMap":
        v = self.violations()
        if v:
            raise InvalidMap(v)
        return self

    def is_bijective(self) -> bool:
        """True iff the branch images tile the domain (an interval exchange)."""
        images = sorted(
            (self.beta[s - 1] + self.gamma[s - 1], self.beta[s] + self.gamma[s - 1])
            for s in range(1, self.r + 1)
        )
        cursor = self.beta[0]
        for a, b in images:
            if a != cursor:
                return False
            cursor = b
        return cursor == self.beta[-1]

    # -- evaluation --------------------------------------------------------

    def branch_of(self, p: SignedPoint) -> int:
        """1-based branch index whose cell contains p (signed membership)."""
        if p.sign is Sign.GEOMETRIC and p.value in self.interior_breaks():
            raise GeometricDiscontinuity(
                f"geometric point {p} sits on a partition point"
            )
        for s in range(1, self.r + 1):
            if self.cell(s).contains(p):
                return s
        raise ValueError(f"{p} is outside the domain {self.domain}")

    def apply(self, p: SignedPoint) -> SignedPoint:
        return p.shifted(self.gamma[self.branch_of(p) - 1])

    def apply_value(self, x: RationalLike) -> Fraction:
        """Convenience for geometric points off the partition."""
        return self.apply(SignedPoint(rat(x))).value

    def orbit(self, p: SignedPoint, n: int) -> list[SignedPoint]:
        """[p, T(p), ..., T^(n-1)(p)] — n points."""
        out = []
        cur = p
        for _ in range(n):
            out.append(cur)
            cur = self.apply(cur)
        return out

    def iterate(self, p: SignedPoint, n: int) -> SignedPoint:
        cur = p
        for _ in range(n):
            cur = self.apply(cur)
        return cur

    def itinerary(self, p: SignedPoint, n: int) -> list[int]:
        out = []
        cur = p
        for _ in range(n):
            s = self.branch_of(cur)
            out.append(s)
            cur = cur.shifted(self.gamma[s - 1])
        return out

    def entry_counts(self, p: SignedPoint, n: int) -> tuple[int, ...]:
        """How many of the first n iterates (times 0..n-1) visit each branch."""
        k = [0] * self.r
        cur = p
        for _ in range(n):
            s = self.branch_of(cur)
            k[s - 1] += 1
            cur = cur.shifted(self.gamma[s - 1])
        return tuple(k)

    def image(self, S: IntervalSet) -> IntervalSet:
        pieces = []
        for s in range(1, self.r + 1):
            part = S.intersect_interval(self.cell(s))
            if part:
                shifted = [iv.shifted(self.gamma[s - 1]) for iv in part]
                pieces.append(IntervalSet(shifted))
        return union_all(pieces) if pieces else IntervalSet.empty()

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        d = {
            "beta": [rat_str(b) for b in self.beta],
            "gamma": [rat_str(g) for g in self.gamma],
        }
        if self.extended:
            d["extended"] = True
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @staticmethod
    def from_dict(d: dict) -> "ITMap":
        if not isinstance(d, dict) or "beta" not in d or "gamma" not in d:
            raise InvalidMap(["map JSON needs 'beta' and 'gamma' arrays"])
        try:
            beta = tuple(rat(b) for b in d["beta"])
            gamma = tuple(rat(g) for g in d["gamma"])
        except (ValueError, TypeError, ZeroDivisionError) as e:
            raise InvalidMap([f"unparseable rational: {e}"])
        if len(beta) != len(gamma) + 1:
            raise InvalidMap(["need exactly one more partition point than branch"])
        return ITMap(beta, gamma, extended=bool(d.get("extended", False)))

    @staticmethod
    def from_json(text: str) -> "ITMap":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise InvalidMap([f"bad JSON: {e}"])
        return ITMap.from_dict(d)


def make_map(
    beta: Sequence[RationalLike],
    gamma: Sequence[RationalLike],
    extended: bool = False,
) -> ITMap:
    return ITMap(tuple(rat(b) for b in beta), tuple(rat(g) for g in gamma), extended)


def perturbed(m: ITMap, delta: Sequence[Fraction]) -> ITMap:
    """Apply a tangent displacement (d_gamma_1..r, d_beta_1..r-1) to the
    parameters.  Extended maps take 2r+1 entries (outer endpoints last)."""
    r = m.r
    dg = list(delta[:r])
    db = list(delta[r : 2 * r - 1])
    gamma = tuple(g + d for g, d in zip(m.gamma, dg))
    inner = [b + d for b, d in zip(m.beta[1:-1], db)]
    b0, br = m.beta[0], m.beta[-1]
    if m.extended and len(delta) == 2 * r + 1:
        b0 += delta[2 * r - 1]
        br += delta[2 * r]
    beta = (b0, *inner, br)
    return ITMap(beta, gamma, extended=m.extended)
