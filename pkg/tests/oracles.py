"""Independent reference computations used by the tests.

None of these call into the code under test beyond building inputs: the
Minkowski oracle works on indicator vectors, the set oracle enumerates
sample points, and derivatives come from the symbolic rules written out
by hand below.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy.signal import fftconvolve

from meaneq.intervals import Interval, IntervalUnion


def random_union(rng, k_max=6, lo=-10.0, hi=10.0, denom=1000):
    """A random finite union with endpoints on ``1/denom`` and its integer form."""
    k = int(rng.integers(1, k_max + 1))
    ints = np.sort(rng.choice(np.arange(int(lo * denom), int(hi * denom) + 1), size=2 * k, replace=False))
    parts, spec = [], []
    for a, b in zip(ints[::2], ints[1::2]):
        if rng.uniform() < 0.15:
            parts.append(Interval.point(a / denom))
            spec.append((int(a), int(a), True, True))
            continue
        lc, hc = bool(rng.integers(2)), bool(rng.integers(2))
        parts.append(Interval(a / denom, b / denom, lc, hc))
        spec.append((int(a), int(b), lc, hc))
    return IntervalUnion(parts), spec


def indicator(spec, lo_int, hi_int):
    """Membership of the integer nodes ``lo_int..hi_int`` in the union ``spec``."""
    idx = np.arange(lo_int, hi_int + 1)
    mask = np.zeros(idx.size, dtype=bool)
    for a, b, lc, hc in spec:
        left = idx >= a if lc else idx > a
        right = idx <= b if hc else idx < b
        mask |= left & right
    return mask


def minkowski_hull_grid(spec_a, spec_i, lo_int, hi_int):
    """Hull ``(min, max)`` in grid units of the sampled Minkowski sum ``A + I``.

    Both sets are sampled on the integer nodes ``lo_int..hi_int`` and the
    sum's support is read off the convolution of their indicators.
    """
    ia = indicator(spec_a, lo_int, hi_int).astype(float)
    ii = indicator(spec_i, lo_int, hi_int).astype(float)
    if not ia.any() or not ii.any():
        return None
    conv = fftconvolve(ia, ii)
    support = np.flatnonzero(conv > 0.5)
    base = 2 * lo_int
    return int(support[0]) + base, int(support[-1]) + base


def enumerate_regularity(zf_spec, domain_spec, denom=8):
    """Set-algebra oracle for ``Z^c ⊆ cl conv(cl(Z)^c)`` on a fine rational grid.

    Endpoints are rationals and every test point is a multiple of
    ``1/(2 denom)`` inside the domain, which resolves every relevant
    endpoint distinction for the unions used in the tests.
    """
    d_lo, d_hi = domain_spec
    pts = [Fraction(k, 2 * denom) for k in range(int(d_lo * 2 * denom) + 1, int(d_hi * 2 * denom))]

    def in_z(x):
        return any((x > a or (lc and x == a)) and (x < b or (hc and x == b)) for a, b, lc, hc in zf_spec)

    def in_closure_z(x):
        return any(a <= x <= b for a, b, _, _ in zf_spec)

    zc = [x for x in pts if not in_z(x)]
    zbar_c = [x for x in pts if not in_closure_z(x)]
    if not zbar_c:
        return not zc
    lo, hi = min(zbar_c), max(zbar_c)

    # closure of the hull is [inf, sup] intersected with the domain; the
    # extremes of the sampled set may sit one sample inside the true ends
    def near_hull(x):
        step = Fraction(1, 2 * denom)
        left = lo - step if lo - step > d_lo else lo
        right = hi + step if hi + step < d_hi else hi
        return left <= x <= right

    return all(near_hull(x) for x in zc)
