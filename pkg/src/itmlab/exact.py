"""Exact rational arithmetic, signed points, and half-open interval sets.

Everything downstream iterates piecewise translations with exact rationals, so
this module provides the three primitives the whole engine is built on:

* rationals serialized as reduced ``p/q`` strings (never decimals),
* signed points ``x+`` / ``x-`` / geometric ``x`` with the total order
  ``x- < x < x+ < y-`` for ``x < y``,
* canonical unions of half-open intervals ``[a, b)`` with the signed
  membership convention: ``[a, b)`` contains ``a``, ``a+`` and ``b-`` but not
  ``a-``, ``b`` or ``b+``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

Rational = Fraction

RationalLike = Union[Fraction, int, str]


def rat(x: RationalLike) -> Fraction:
    """Coerce ints and 'p/q' strings to an exact rational."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as a rational")


def rat_str(x: Fraction) -> str:
    """Serialize a rational as reduced 'p/q' (or 'p' for integers)."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class Sign(IntEnum):
    """One-sided limit tag; ordering minus < geometric < plus at equal value."""

    MINUS = -1
    GEOMETRIC = 0
    PLUS = 1


_SIGN_SUFFIX = {Sign.MINUS: "-", Sign.GEOMETRIC: "", Sign.PLUS: "+"}


@dataclass(frozen=True, order=False)
class SignedPoint:
    """A point of [0,1] together with a one-sided limit tag.

    Total order:  x- < x < x+ < y-  whenever x < y.
    """

    value: Fraction
    sign: Sign = Sign.GEOMETRIC

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", rat(self.value))

    @property
    def key(self) -> tuple:
        return (self.value, int(self.sign))

    def __lt__(self, other: "SignedPoint") -> bool:
        return self.key < other.key

    def __le__(self, other: "SignedPoint") -> bool:
        return self.key <= other.key

    def __str__(self) -> str:
        return rat_str(self.value) + _SIGN_SUFFIX[self.sign]

    def shifted(self, t: Fraction) -> "SignedPoint":
        return SignedPoint(self.value + t, self.sign)

    @staticmethod
    def parse(s: str) -> "SignedPoint":
        s = s.strip()
        if s.endswith("+"):
            return SignedPoint(rat(s[:-1]), Sign.PLUS)
        if s.endswith("-"):
            # careful: "-1/2" is a value, "1/2-" is a minus point
            body = s[:-1]
            if body and not body.endswith(("+", "-")) and body != "":
                try:
                    return SignedPoint(rat(body), Sign.MINUS)
                except ValueError:
                    pass
        return SignedPoint(rat(s), Sign.GEOMETRIC)


def plus(x: RationalLike) -> SignedPoint:
    return SignedPoint(rat(x), Sign.PLUS)


def minus(x: RationalLike) -> SignedPoint:
    return SignedPoint(rat(x), Sign.MINUS)


def geometric(x: RationalLike) -> SignedPoint:
    return SignedPoint(rat(x), Sign.GEOMETRIC)


class RangeViolation(ValueError):
    """A translate would push an interval set outside [0,1]."""


@dataclass(frozen=True)
class HalfOpenInterval:
    """[left, right) with left < right; empty intervals are never stored."""

    left: Fraction
    right: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "left", rat(self.left))
        object.__setattr__(self, "right", rat(self.right))
        if not self.left < self.right:
            raise ValueError(
                f"degenerate interval [{rat_str(self.left)}, {rat_str(self.right)})"
            )

    @property
    def length(self) -> Fraction:
        return self.right - self.left

    def contains(self, p: SignedPoint) -> bool:
        """Signed membership: contains left, left+, ..., right-; not left-, right, right+."""
        lo = (self.left, int(Sign.GEOMETRIC))
        hi = (self.right, int(Sign.MINUS))
        return lo <= p.key <= hi

    def contains_value(self, x: RationalLike) -> bool:
        x = rat(x)
        return self.left <= x < self.right

    def shifted(self, t: Fraction) -> "HalfOpenInterval":
        return HalfOpenInterval(self.left + t, self.right + t)

    def intersect(self, other: "HalfOpenInterval") -> "HalfOpenInterval | None":
        lo = max(self.left, other.left)
        hi = min(self.right, other.right)
        if lo < hi:
            return HalfOpenInterval(lo, hi)
        return None

    def __str__(self) -> str:
        return f"[{rat_str(self.left)}, {rat_str(self.right)})"


def interval(left: RationalLike, right: RationalLike) -> HalfOpenInterval:
    return HalfOpenInterval(rat(left), rat(right))


class IntervalSet:
    """Canonical finite union of half-open intervals.

    Parts are pairwise disjoint, sorted, and maximal (no two parts adjacent),
    so equality of sets is equality of part tuples.
    """

    __slots__ = ("parts",)

    def __init__(self, parts: Iterable[HalfOpenInterval] = ()):
        self.parts: tuple[HalfOpenInterval, ...] = _normalize(parts)

    @staticmethod
    def of(*pairs: tuple[RationalLike, RationalLike]) -> "IntervalSet":
        return IntervalSet(interval(a, b) for a, b in pairs)

    @staticmethod
    def empty() -> "IntervalSet":
        return IntervalSet(())

    def __bool__(self) -> bool:
        return bool(self.parts)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, IntervalSet) and self.parts == other.parts

    def __hash__(self) -> int:
        return hash(self.parts)

    def __iter__(self) -> Iterator[HalfOpenInterval]:
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __repr__(self) -> str:
        return "IntervalSet(" + " u ".join(str(p) for p in self.parts) + ")"

    @property
    def total_length(self) -> Fraction:
        return sum((p.length for p in self.parts), Fraction(0))

    def member(self, p: SignedPoint) -> bool:
        return any(part.contains(p) for part in self.parts)

    def member_value(self, x: RationalLike) -> bool:
        x = rat(x)
        return any(part.contains_value(x) for part in self.parts)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.parts + other.parts)

    def intersect_interval(self, iv: HalfOpenInterval) -> "IntervalSet":
        out = []
        for part in self.parts:
            hit = part.intersect(iv)
            if hit is not None:
                out.append(hit)
        return IntervalSet(out)

    def translate(self, t: RationalLike) -> "IntervalSet":
        t = rat(t)
        shifted = []
        for part in self.parts:
            a, b = part.left + t, part.right + t
            if a < 0 or b > 1:
                raise RangeViolation(
                    f"translate by {rat_str(t)} pushes {part} outside [0,1]"
                )
            shifted.append(HalfOpenInterval(a, b))
        return IntervalSet(shifted)

    def issubset(self, other: "IntervalSet") -> bool:
        for part in self.parts:
            if not any(
                q.left <= part.left and part.right <= q.right for q in other.parts
            ):
                return False
        return True

    def boundary_values(self) -> list[Fraction]:
        out: list[Fraction] = []
        for part in self.parts:
            out.append(part.left)
            out.append(part.right)
        return out


def _normalize(parts: Iterable[HalfOpenInterval]) -> tuple[HalfOpenInterval, ...]:
    items = sorted(parts, key=lambda p: (p.left, p.right))
    merged: list[list[Fraction]] = []
    for p in items:
        if merged and p.left <= merged[-1][1]:
            if p.right > merged[-1][1]:
                merged[-1][1] = p.right
        else:
            merged.append([p.left, p.right])
    return tuple(HalfOpenInterval(a, b) for a, b in merged)


def union_all(sets: Sequence[IntervalSet]) -> IntervalSet:
    parts: list[HalfOpenInterval] = []
    for s in sets:
        parts.extend(s.parts)
    return IntervalSet(parts)
