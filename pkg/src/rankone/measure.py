"""Exact interval measure substrate.

Everything downstream works with finite unions of half-open rational
intervals [lo, hi).  All arithmetic is fractions.Fraction, so measures,
inner products, and bounds are exact and reproducible bit for bit.  Floats
are refused at the door: denominators in deep towers grow factorially and
no floating type survives that.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple, Union

__all__ = [
    "Rational",
    "RationalLike",
    "as_fraction",
    "Interval",
    "IntervalSet",
    "EMPTY_SET",
    "canonicalize",
    "set_union",
    "set_intersection",
    "set_difference",
    "MeasureBound",
    "StepFunction",
    "l2_inner",
]

Rational = Fraction
RationalLike = Union[Fraction, int, str]


def as_fraction(value: RationalLike) -> Fraction:
    """Coerce an int, Fraction, or 'num/den' string to an exact Fraction.

    Floats are rejected on purpose: every quantity in this package must stay
    exact, and a float sneaking in would silently poison whole pipelines.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}: {value!r}")


@dataclass(frozen=True)
class Interval:
    """Half-open rational interval [lo, hi).  Zero length (lo == hi) is allowed
    as a transient value; canonicalization drops it."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", as_fraction(self.lo))
        object.__setattr__(self, "hi", as_fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"interval endpoints out of order: [{self.lo}, {self.hi})")

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def is_empty(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: RationalLike) -> bool:
        x = as_fraction(x)
        return self.lo <= x < self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return other.is_empty() or (self.lo <= other.lo and other.hi <= self.hi)

    def overlaps(self, other: "Interval") -> bool:
        return max(self.lo, other.lo) < min(self.hi, other.hi)

    def shift(self, offset: RationalLike) -> "Interval":
        d = as_fraction(offset)
        return Interval(self.lo + d, self.hi + d)

    def __repr__(self) -> str:
        return f"[{self.lo}, {self.hi})"


@dataclass(frozen=True)
class IntervalSet:
    """Canonical finite union of half-open intervals.

    Invariant: intervals are sorted, pairwise disjoint, non-adjacent, and
    nonempty.  Construct via canonicalize() unless you already hold canonical
    data; the constructor validates.
    """

    intervals: Tuple[Interval, ...]

    def __post_init__(self):
        ivs = tuple(self.intervals)
        object.__setattr__(self, "intervals", ivs)
        prev_hi = None
        for iv in ivs:
            if iv.is_empty():
                raise ValueError("canonical interval set may not contain empty intervals")
            if prev_hi is not None and iv.lo <= prev_hi:
                raise ValueError("canonical interval set must be sorted and disjoint")
            prev_hi = iv.hi

    @property
    def measure(self) -> Fraction:
        return sum((iv.length for iv in self.intervals), Fraction(0))

    def is_empty(self) -> bool:
        return not self.intervals

    def contains(self, x: RationalLike) -> bool:
        x = as_fraction(x)
        los = [iv.lo for iv in self.intervals]
        k = bisect_right(los, x) - 1
        return k >= 0 and x < self.intervals[k].hi

    def shift(self, offset: RationalLike) -> "IntervalSet":
        d = as_fraction(offset)
        return IntervalSet(tuple(iv.shift(d) for iv in self.intervals))

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return set_union(self, other)

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        return set_intersection(self, other)

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        return set_difference(self, other)

    def is_subset_of(self, other: "IntervalSet") -> bool:
        return set_difference(self, other).is_empty()

    def complement_within(self, frame: Interval) -> "IntervalSet":
        return set_difference(canonicalize([frame]), self)

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __repr__(self) -> str:
        body = " u ".join(repr(iv) for iv in self.intervals)
        return f"{{{body or 'empty'}}}"


EMPTY_SET = IntervalSet(())


def canonicalize(intervals: Iterable[Interval]) -> IntervalSet:
    """Sort, merge overlapping or adjacent intervals, drop empty ones.

    Idempotent; the result's measure is <= the sum of the input lengths with
    equality exactly when the inputs were pairwise disjoint.
    """
    items = sorted((iv for iv in intervals if not iv.is_empty()), key=lambda iv: (iv.lo, iv.hi))
    merged: list[Interval] = []
    for iv in items:
        if merged and iv.lo <= merged[-1].hi:
            if iv.hi > merged[-1].hi:
                merged[-1] = Interval(merged[-1].lo, iv.hi)
        else:
            merged.append(iv)
    return IntervalSet(tuple(merged))


def set_union(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    return canonicalize(a.intervals + b.intervals)


def set_intersection(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    out: list[Interval] = []
    i = j = 0
    av, bv = a.intervals, b.intervals
    while i < len(av) and j < len(bv):
        lo = max(av[i].lo, bv[j].lo)
        hi = min(av[i].hi, bv[j].hi)
        if lo < hi:
            out.append(Interval(lo, hi))
        if av[i].hi <= bv[j].hi:
            i += 1
        else:
            j += 1
    return IntervalSet(tuple(out))


def set_difference(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    out: list[Interval] = []
    j = 0
    bv = b.intervals
    for iv in a.intervals:
        lo = iv.lo
        while j < len(bv) and bv[j].hi <= lo:
            j += 1
        k = j
        while k < len(bv) and bv[k].lo < iv.hi:
            if bv[k].lo > lo:
                out.append(Interval(lo, bv[k].lo))
            lo = max(lo, bv[k].hi)
            if bv[k].hi >= iv.hi:
                break
            k += 1
        if lo < iv.hi:
            out.append(Interval(lo, iv.hi))
    return IntervalSet(tuple(out))


@dataclass(frozen=True)
class MeasureBound:
    """Two-sided rational enclosure [lo, hi] of a nonnegative measure quantity."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", as_fraction(self.lo))
        object.__setattr__(self, "hi", as_fraction(self.hi))
        if not (0 <= self.lo <= self.hi):
            raise ValueError(f"invalid measure bound [{self.lo}, {self.hi}]")

    @classmethod
    def exact(cls, value: RationalLike) -> "MeasureBound":
        v = as_fraction(value)
        return cls(v, v)

    @classmethod
    def zero(cls) -> "MeasureBound":
        return cls(Fraction(0), Fraction(0))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def is_exact(self) -> bool:
        return self.lo == self.hi

    def contains_value(self, value: RationalLike) -> bool:
        v = as_fraction(value)
        return self.lo <= v <= self.hi

    def is_subinterval_of(self, other: "MeasureBound") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def overlaps(self, other: "MeasureBound") -> bool:
        return max(self.lo, other.lo) <= min(self.hi, other.hi)

    def __add__(self, other: "MeasureBound") -> "MeasureBound":
        return MeasureBound(self.lo + other.lo, self.hi + other.hi)

    def scale(self, factor: RationalLike) -> "MeasureBound":
        f = as_fraction(factor)
        if f < 0:
            raise ValueError("measure bounds scale by nonnegative factors only")
        return MeasureBound(self.lo * f, self.hi * f)

    def __repr__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def _segments_from_pieces(
    pieces: Sequence[Tuple[IntervalSet, RationalLike]],
) -> Tuple[Tuple[Fraction, Fraction, Fraction], ...]:
    segs: list[Tuple[Fraction, Fraction, Fraction]] = []
    for support, value in pieces:
        v = as_fraction(value)
        if v == 0:
            continue
        for iv in support.intervals:
            segs.append((iv.lo, iv.hi, v))
    segs.sort(key=lambda s: s[0])
    merged: list[Tuple[Fraction, Fraction, Fraction]] = []
    for lo, hi, v in segs:
        if merged and lo < merged[-1][1]:
            raise ValueError("step function pieces must have disjoint supports")
        if merged and lo == merged[-1][1] and v == merged[-1][2]:
            merged[-1] = (merged[-1][0], hi, v)
        else:
            merged.append((lo, hi, v))
    return tuple(merged)


@dataclass(frozen=True)
class StepFunction:
    """Finitely supported rational step function, zero off its pieces.

    Stored canonically as sorted disjoint segments (lo, hi, value) with
    nonzero values and adjacent equal-valued segments merged.
    """

    segments: Tuple[Tuple[Fraction, Fraction, Fraction], ...]

    @classmethod
    def from_pieces(cls, pieces: Sequence[Tuple[IntervalSet, RationalLike]]) -> "StepFunction":
        return cls(_segments_from_pieces(pieces))

    @classmethod
    def indicator(cls, support: IntervalSet, value: RationalLike = 1) -> "StepFunction":
        return cls.from_pieces([(support, value)])

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls(())

    @property
    def support(self) -> IntervalSet:
        return canonicalize([Interval(lo, hi) for lo, hi, _ in self.segments])

    def value_at(self, x: RationalLike) -> Fraction:
        x = as_fraction(x)
        los = [s[0] for s in self.segments]
        k = bisect_right(los, x) - 1
        if k >= 0 and x < self.segments[k][1]:
            return self.segments[k][2]
        return Fraction(0)

    def integral(self) -> Fraction:
        return sum(((hi - lo) * v for lo, hi, v in self.segments), Fraction(0))

    def sup_abs(self) -> Fraction:
        return max((abs(v) for _, _, v in self.segments), default=Fraction(0))

    def scale(self, factor: RationalLike) -> "StepFunction":
        f = as_fraction(factor)
        if f == 0:
            return StepFunction(())
        return StepFunction(tuple((lo, hi, v * f) for lo, hi, v in self.segments))

    def add(self, other: "StepFunction") -> "StepFunction":
        """Pointwise sum, exact, linear-time sweep over the breakpoints."""
        cuts = sorted(
            {p for lo, hi, _ in self.segments for p in (lo, hi)}
            | {p for lo, hi, _ in other.segments for p in (lo, hi)}
        )
        out: list[Tuple[Fraction, Fraction, Fraction]] = []
        for lo, hi in zip(cuts, cuts[1:]):
            v = self.value_at(lo) + other.value_at(lo)
            if v == 0:
                continue
            if out and out[-1][1] == lo and out[-1][2] == v:
                out[-1] = (out[-1][0], hi, v)
            else:
                out.append((lo, hi, v))
        return StepFunction(tuple(out))

    def inner(self, other: "StepFunction") -> Fraction:
        """L2 inner product integral of self * other."""
        total = Fraction(0)
        i = j = 0
        a, b = self.segments, other.segments
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                total += (hi - lo) * a[i][2] * b[j][2]
            if a[i][1] <= b[j][1]:
                i += 1
            else:
                j += 1
        return total

    def l2_norm_sq(self) -> Fraction:
        return self.inner(self)


def l2_inner(f: StepFunction, g: StepFunction) -> Fraction:
    """Exact inner product (f, g) = integral of f*g.

    Bilinear and positive definite on step functions: (f, f) = 0 forces f to
    vanish off a null set, which for step functions means no segments at all.
    """
    return f.inner(g)
