"""Exact algebra on finite unions of real intervals.

Endpoints may be any :class:`numbers.Real` (``float``, ``int``,
``fractions.Fraction``) plus ``-inf``/``inf``. Only comparisons, sums and
halving are performed on endpoints, so rational endpoints stay exact.

Closures, complements and hulls are always taken relative to an ambient
interval, the way zero sets of functions on an open interval ``I`` are
handled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Real
from typing import Iterable, Iterator, Optional

import numpy as np

from .exceptions import IntervalError

__all__ = [
    "Interval",
    "IntervalUnion",
    "sum_with_interval",
    "half_sum",
    "zero_set",
    "regularity_holds",
]


@dataclass(frozen=True)
class Interval:
    """A nonempty real interval, possibly a single point.

    Infinite endpoints are always open. ``lo == hi`` is allowed only for a
    closed degenerate interval ``{lo}``.
    """

    lo: Real
    hi: Real
    lo_closed: bool = False
    hi_closed: bool = False

    def __post_init__(self):
        lo, hi = self.lo, self.hi
        if not isinstance(lo, Real) or not isinstance(hi, Real):
            raise IntervalError(f"endpoints must be real numbers, got {lo!r}, {hi!r}")
        if _isnan(lo) or _isnan(hi):
            raise IntervalError("interval endpoints cannot be NaN")
        if lo == math.inf or hi == -math.inf:
            raise IntervalError(f"bad infinite endpoint in ({lo}, {hi})")
        if (_isinf(lo) and self.lo_closed) or (_isinf(hi) and self.hi_closed):
            raise IntervalError("infinite endpoints must be open")
        if lo > hi:
            raise IntervalError(f"empty interval: lo={lo} > hi={hi}")
        if lo == hi and not (self.lo_closed and self.hi_closed):
            raise IntervalError(f"empty interval at {lo}: a point must be closed on both sides")

    @classmethod
    def open(cls, lo, hi) -> "Interval":
        return cls(lo, hi, False, False)

    @classmethod
    def closed(cls, lo, hi) -> "Interval":
        return cls(lo, hi, not _isinf(lo), not _isinf(hi))

    @classmethod
    def point(cls, x) -> "Interval":
        return cls(x, x, True, True)

    @property
    def is_open(self) -> bool:
        return not (self.lo_closed or self.hi_closed)

    @property
    def is_closed(self) -> bool:
        return (self.lo_closed or _isinf(self.lo)) and (self.hi_closed or _isinf(self.hi))

    @property
    def is_degenerate(self) -> bool:
        return self.lo == self.hi

    @property
    def is_bounded(self) -> bool:
        return not (_isinf(self.lo) or _isinf(self.hi))

    @property
    def length(self):
        return self.hi - self.lo

    @property
    def midpoint(self):
        return (self.lo + self.hi) / 2

    def contains(self, x):
        """Membership test; vectorized over numpy arrays."""
        if isinstance(x, np.ndarray):
            lo_ok = x >= self.lo if self.lo_closed else x > self.lo
            hi_ok = x <= self.hi if self.hi_closed else x < self.hi
            return lo_ok & hi_ok
        lo_ok = x >= self.lo if self.lo_closed else x > self.lo
        hi_ok = x <= self.hi if self.hi_closed else x < self.hi
        return bool(lo_ok and hi_ok)

    __contains__ = contains

    def closure(self) -> "Interval":
        return Interval.closed(self.lo, self.hi)

    def interior(self) -> Optional["Interval"]:
        return _make(self.lo, False, self.hi, False)

    def issubset(self, other: "Interval") -> bool:
        lo_ok = other.lo < self.lo or (other.lo == self.lo and (other.lo_closed or not self.lo_closed))
        hi_ok = other.hi > self.hi or (other.hi == self.hi and (other.hi_closed or not self.hi_closed))
        return lo_ok and hi_ok

    def intersect(self, other: "Interval") -> Optional["Interval"]:
        if self.lo > other.lo:
            lo, lo_c = self.lo, self.lo_closed
        elif self.lo < other.lo:
            lo, lo_c = other.lo, other.lo_closed
        else:
            lo, lo_c = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hi_c = self.hi, self.hi_closed
        elif self.hi > other.hi:
            hi, hi_c = other.hi, other.hi_closed
        else:
            hi, hi_c = self.hi, self.hi_closed and other.hi_closed
        return _make(lo, lo_c, hi, hi_c)

    def __repr__(self):
        left = "[" if self.lo_closed else "]"
        right = "]" if self.hi_closed else "["
        if self.is_degenerate:
            return f"{{{self.lo}}}"
        return f"{left}{self.lo}, {self.hi}{right}"


def _isnan(x) -> bool:
    return isinstance(x, float) and math.isnan(x)


def _isinf(x) -> bool:
    return isinstance(x, float) and math.isinf(x)


def _make(lo, lo_closed, hi, hi_closed) -> Optional[Interval]:
    """Build an interval, returning None when the described set is empty."""
    if _isinf(lo):
        lo_closed = False
    if _isinf(hi):
        hi_closed = False
    if lo > hi or (lo == hi and not (lo_closed and hi_closed)):
        return None
    return Interval(lo, hi, lo_closed, hi_closed)


def _touching(left: Interval, right: Interval) -> bool:
    """True when ``right`` (with right.lo >= left.lo) overlaps or abuts ``left``."""
    if right.lo < left.hi:
        return True
    return right.lo == left.hi and (left.hi_closed or right.lo_closed)


class IntervalUnion:
    """A finite union of intervals, normalized on construction.

    Parts are sorted, pairwise disjoint and never mergeable, so two unions
    describing the same set compare equal structurally.
    """

    __slots__ = ("_parts",)

    def __init__(self, parts: Iterable[Optional[Interval]] = ()):
        items = sorted(
            (p for p in parts if p is not None),
            key=lambda p: (p.lo, not p.lo_closed),
        )
        merged: list[Interval] = []
        for p in items:
            if merged and _touching(merged[-1], p):
                cur = merged[-1]
                if p.hi > cur.hi:
                    hi, hi_c = p.hi, p.hi_closed
                elif p.hi < cur.hi:
                    hi, hi_c = cur.hi, cur.hi_closed
                else:
                    hi, hi_c = cur.hi, cur.hi_closed or p.hi_closed
                merged[-1] = Interval(cur.lo, hi, cur.lo_closed, hi_c)
            else:
                merged.append(p)
        self._parts = tuple(merged)

    @classmethod
    def empty(cls) -> "IntervalUnion":
        return cls(())

    @classmethod
    def of(cls, *parts: Interval) -> "IntervalUnion":
        return cls(parts)

    @property
    def parts(self) -> tuple[Interval, ...]:
        return self._parts

    @property
    def is_empty(self) -> bool:
        return not self._parts

    def __iter__(self) -> Iterator[Interval]:
        return iter(self._parts)

    def __len__(self) -> int:
        return len(self._parts)

    def __bool__(self) -> bool:
        return bool(self._parts)

    def __eq__(self, other) -> bool:
        if isinstance(other, Interval):
            other = IntervalUnion.of(other)
        if not isinstance(other, IntervalUnion):
            return NotImplemented
        return self._parts == other._parts

    def __hash__(self):
        return hash(self._parts)

    def __repr__(self):
        if not self._parts:
            return "IntervalUnion(∅)"
        return "IntervalUnion(" + " ∪ ".join(map(repr, self._parts)) + ")"

    @property
    def inf(self):
        if not self._parts:
            raise IntervalError("inf of the empty set")
        return self._parts[0].lo

    @property
    def sup(self):
        if not self._parts:
            raise IntervalError("sup of the empty set")
        return self._parts[-1].hi

    def contains(self, x):
        if isinstance(x, np.ndarray):
            mask = np.zeros(x.shape, dtype=bool)
            for p in self._parts:
                mask |= p.contains(x)
            return mask
        return any(p.contains(x) for p in self._parts)

    __contains__ = contains

    def union(self, other: "IntervalUnion | Interval") -> "IntervalUnion":
        other_parts = (other,) if isinstance(other, Interval) else other.parts
        return IntervalUnion(self._parts + tuple(other_parts))

    def intersect(self, other: "IntervalUnion | Interval") -> "IntervalUnion":
        other_parts = (other,) if isinstance(other, Interval) else other.parts
        return IntervalUnion(a.intersect(b) for a in self._parts for b in other_parts)

    def issubset(self, other: "IntervalUnion | Interval") -> bool:
        other_parts = (other,) if isinstance(other, Interval) else other.parts
        return all(any(p.issubset(q) for q in other_parts) for p in self._parts)

    def complement(self, within: Interval) -> "IntervalUnion":
        """``within`` minus this set."""
        gaps = []
        cur, cur_closed = within.lo, within.lo_closed
        for p in self.intersect(within):
            gaps.append(_make(cur, cur_closed, p.lo, not p.lo_closed))
            cur, cur_closed = p.hi, not p.hi_closed
        gaps.append(_make(cur, cur_closed, within.hi, within.hi_closed))
        return IntervalUnion(gaps)

    def closure(self, within: Optional[Interval] = None) -> "IntervalUnion":
        """Closure, relative to ``within`` when given."""
        closed = IntervalUnion(p.closure() for p in self._parts)
        return closed if within is None else closed.intersect(within)

    def hull(self) -> "IntervalUnion":
        """Convex hull (smallest interval containing the set)."""
        if not self._parts:
            return self
        first, last = self._parts[0], self._parts[-1]
        return IntervalUnion.of(Interval(first.lo, last.hi, first.lo_closed, last.hi_closed))

    def closed_hull(self, within: Optional[Interval] = None) -> "IntervalUnion":
        return self.hull().closure(within)


def _as_union(A) -> IntervalUnion:
    if isinstance(A, Interval):
        return IntervalUnion.of(A)
    return A


def _check_open(I: Interval):
    if not isinstance(I, Interval):
        raise IntervalError(f"expected an Interval, got {type(I).__name__}")
    if not I.is_open or I.is_degenerate:
        raise IntervalError(f"{I!r} must be a nonempty open interval")


def sum_with_interval(A, I: Interval) -> IntervalUnion:
    """Minkowski sum ``A + I`` of a union with a nonempty open interval.

    The result is always an open interval (or empty): ``]inf A + inf I,
    sup A + sup I[``.
    """
    _check_open(I)
    A = _as_union(A)
    if A.is_empty:
        return IntervalUnion.empty()
    return IntervalUnion.of(Interval.open(A.inf + I.lo, A.sup + I.hi))


def half_sum(A, I: Interval) -> IntervalUnion:
    """The midpoint set ``(A + I) / 2``."""
    _check_open(I)
    A = _as_union(A)
    if A.is_empty:
        return IntervalUnion.empty()
    return IntervalUnion.of(Interval.open((A.inf + I.lo) / 2, (A.sup + I.hi) / 2))


def zero_set(f, tol: Optional[float] = None) -> IntervalUnion:
    """Tolerance-based zero set of a sampled function.

    Maximal runs of consecutive grid points with ``|f| <= tol`` become closed
    intervals between the first and last node of the run; isolated nodes
    become points. ``tol`` defaults to ``1e-9 * max|f|``.
    """
    values = np.abs(np.asarray(f.values, dtype=float))
    if tol is None:
        tol = 1e-9 * float(values.max()) if values.size else 0.0
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    x = f.x
    mask = values <= tol
    parts = []
    # run boundaries: indices where mask flips
    padded = np.concatenate(([False], mask, [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    for start, stop in zip(edges[::2], edges[1::2]):
        parts.append(Interval.closed(float(x[start]), float(x[stop - 1])))
    return IntervalUnion(parts)


def regularity_holds(zf, domain: Interval) -> bool:
    """Check ``Z^c ⊆ cl conv(cl(Z)^c)`` for a zero set ``Z`` inside ``domain``.

    All closures and hulls are relative to ``domain``.
    """
    _check_open(domain)
    zf = _as_union(zf)
    if not zf.issubset(domain):
        raise IntervalError(f"{zf!r} is not contained in {domain!r}")
    zc = zf.complement(domain)
    zbar_c = zf.closure(domain).complement(domain)
    if zbar_c.is_empty:
        return zc.is_empty
    return zc.issubset(zbar_c.closed_hull(domain))
