"""Change of variables between the five-function and three-function equations.

A solution ``(g, h, F, G, H)`` of ``G(g(u) - g(v)) = H(h(u) + h(v)) + F(u) + F(v)``
on ``J`` with ``h`` strictly monotone reduces to a solution
``(G0, ell, H)`` of the three-function equation on ``I = 2h(J)`` through
``ell(x) = g(h^-1(x/2))`` and ``G0 = G - G(0)``; the diagonal ``u = v`` forces
``F(u) = (G(0) - H(2h(u)))/2``. The converse lift rebuilds ``g``, ``G`` and
``F`` from any strictly monotone ``h``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.optimize import brentq

from .exceptions import DomainMismatch, EmptyJ, NotMonotone, OutOfDomain
from .functions import GridFunction, RealFunction, call_checked, domain_of, interior_grid
from .intervals import Interval
from .residuals import ResidualReport

__all__ = [
    "GhfSystem",
    "ReducedSystem",
    "MonotoneInverse",
    "invert_monotone",
    "reduce_ghf",
    "lift_g0h",
    "check_monotone",
]

Member = Union[GridFunction, RealFunction, Callable]


@dataclass
class GhfSystem:
    domain_j: Interval
    g: Member
    h: Member
    F: Member
    G: Member
    H: Member

    def functions(self) -> dict:
        return {"G": self.G, "g": self.g, "H": self.H, "h": self.h, "F": self.F}


@dataclass
class ReducedSystem:
    domain_i: Interval
    ell: Member
    H: Member
    g0: Member
    g_at_zero: float

    def functions(self) -> dict:
        return {"g0": self.g0, "ell": self.ell, "H": self.H}


def check_monotone(values: np.ndarray) -> int:
    """Sign (+1 or -1) of strictly monotone ``values``; raises :class:`NotMonotone`."""
    d = np.diff(np.asarray(values, dtype=float))
    if d.size == 0:
        raise NotMonotone("need at least 2 samples", index=0)
    sign = 1 if d[0] > 0 else -1
    if d[0] == 0:
        raise NotMonotone("successive samples 0 and 1 are equal", index=0)
    bad = np.nonzero(sign * d <= 0)[0]
    if bad.size:
        i = int(bad[0])
        raise NotMonotone(f"monotonicity fails between samples {i} and {i + 1}", index=i)
    return sign


class MonotoneInverse:
    """Piecewise-linear inverse of a strictly monotone grid function.

    Exact at the samples: ``inverse(h.values[i]) == h.x[i]``.
    """

    def __init__(self, h: GridFunction):
        self.sign = check_monotone(h.values)
        xs, ys = h.x, h.values
        if self.sign < 0:
            xs, ys = xs[::-1], ys[::-1]
        self._nodes = ys.copy()
        self._values = xs.copy()
        self.domain = Interval.closed(float(ys[0]), float(ys[-1]))

    def __call__(self, t, order: int = 0):
        if order:
            raise ValueError("the inverse carries no derivatives")
        arr = np.asarray(t, dtype=float)
        slack = 1e-12 * max(1.0, abs(self.domain.lo), abs(self.domain.hi))
        bad = (arr < self.domain.lo - slack) | (arr > self.domain.hi + slack)
        if np.any(bad):
            point = float(arr[bad].flat[0]) if arr.ndim else float(arr)
            raise OutOfDomain(f"{point} is outside the range {self.domain!r} of h", point)
        out = np.interp(arr, self._nodes, self._values)
        return out if arr.ndim else float(out)


def invert_monotone(h: GridFunction) -> MonotoneInverse:
    return MonotoneInverse(h)


def _as_grid(h: Member, domain: Interval, n: int) -> GridFunction:
    if isinstance(h, GridFunction):
        return h
    return GridFunction.sample(lambda x: call_checked(h, x), domain, n)


def _covers(fn, lo: float, hi: float) -> bool:
    dom = domain_of(fn)
    if dom is None:
        return True
    return bool(dom.closure().contains(lo) and dom.closure().contains(hi))


def reduce_ghf(sys: GhfSystem, n: int = 1001, tol: float = 1e-9) -> tuple[ReducedSystem, ResidualReport]:
    """Reduce a five-function system; ``h`` is sampled on ``n`` nodes of ``J``
    unless it already is a grid.

    Returns the reduced system and the sup of
    ``|F(u) - (G(0) - H(2h(u)))/2|`` over the nodes of ``J``.
    """
    h_grid = _as_grid(sys.h, sys.domain_j, n)
    inv = invert_monotone(h_grid)
    hv = h_grid.values
    lo_i, hi_i = 2 * float(hv.min()), 2 * float(hv.max())
    domain_i = Interval.open(lo_i, hi_i)
    u = h_grid.x

    gv = call_checked(sys.g, u)
    spread = float(gv.max() - gv.min())
    if not _covers(sys.G, -spread, spread):
        raise DomainMismatch(f"G is not defined on g(J) - g(J) = [-{spread}, {spread}]")
    if not _covers(sys.H, lo_i, hi_i):
        raise DomainMismatch(f"H is not defined on 2h(J) = [{lo_i}, {hi_i}]")
    g_at_zero = float(call_checked(sys.G, np.zeros(1))[0])

    g = sys.g
    G = sys.G
    H = sys.H
    ell = RealFunction(lambda x: call_checked(g, inv(x / 2)), domain_i, name="ell")
    g0_dom = Interval.open(-spread, spread) if spread > 0 else Interval.closed(0.0, 0.0)
    g0 = RealFunction(lambda t: call_checked(G, t) - g_at_zero, g0_dom, name="G0")
    H_on_i = RealFunction(lambda x: call_checked(H, x), domain_i, name="H")

    Fv = call_checked(sys.F, u)
    expected = 0.5 * (g_at_zero - call_checked(H, 2 * hv))
    dev = np.abs(Fv - expected)
    k = int(np.argmax(dev))
    report = ResidualReport(
        equation="f_consistency",
        sup_abs=float(dev[k]),
        mean_abs=float(dev.mean()),
        witness=(float(u[k]), float(u[k])),
        grid_shape=(u.size, 1),
        scale=max(1.0, float(np.max(np.abs(Fv)))),
    )
    return ReducedSystem(domain_i, ell, H_on_i, g0, g_at_zero), report


def _solve_j(h: Member, domain: Interval, target: Interval) -> Interval:
    """``{u in domain : 2h(u) in target}`` for continuous strictly monotone ``h``."""
    lo, hi = float(domain.lo), float(domain.hi)
    x0, step = interior_grid(domain, 2048)
    xs = x0 + step * np.arange(2048)
    hv = 2 * call_checked(h, xs)
    check_monotone(hv)
    inside = target.contains(hv)
    if not np.any(inside):
        raise EmptyJ(f"2h never enters {target!r} on {domain!r}")
    if np.all(inside):
        return domain
    idx = np.nonzero(inside)[0]
    i0, i1 = int(idx[0]), int(idx[-1])

    def edge(a, b):
        vals = [float(target.lo), float(target.hi)]
        for v in vals:
            fa = 2 * float(call_checked(h, np.asarray([a]))[0]) - v
            fb = 2 * float(call_checked(h, np.asarray([b]))[0]) - v
            if fa == 0:
                return a
            if fa * fb < 0:
                return brentq(lambda s: 2 * float(call_checked(h, np.asarray([s]))[0]) - v, a, b, xtol=1e-15)
        return a

    u_lo = lo if i0 == 0 else edge(xs[i0 - 1], xs[i0])
    u_hi = hi if i1 == xs.size - 1 else edge(xs[i1], xs[i1 + 1])
    return Interval.open(u_lo, u_hi)


def lift_g0h(red: ReducedSystem, h: Member, domain_j: Optional[Interval] = None) -> GhfSystem:
    """Lift a reduced system along a strictly monotone ``h``.

    ``J`` is computed as ``h^-1(I/2)`` within ``domain_j`` (or the domain
    carried by ``h``), and ``g(u) = ell(2h(u))``,
    ``F(u) = (G(0) - H(2h(u)))/2``, ``G = G(0) + G0``.
    """
    if isinstance(h, GridFunction):
        check_monotone(h.values)
        inside = red.domain_i.contains(2 * h.values)
        if not np.any(inside):
            raise EmptyJ(f"2h never enters {red.domain_i!r}")
        idx = np.nonzero(inside)[0]
        h = h.crop(int(idx[0]), int(idx[-1]) + 1)
        if not np.all(red.domain_i.contains(2 * h.values)):
            raise DomainMismatch("2h leaves I inside the grid; h is not monotone enough")
        J = domain_j if domain_j is not None else h.domain
        if not J.issubset(h.domain):
            raise DomainMismatch(f"J={J!r} exceeds the grid of h {h.domain!r}")
    else:
        domain = domain_j if domain_j is not None else domain_of(h)
        if domain is None or not domain.is_bounded:
            raise DomainMismatch("pass a bounded domain_j for a closed-form h")
        J = _solve_j(h, domain, red.domain_i)

    c0 = float(red.g_at_zero)
    ell, H, G0 = red.ell, red.H, red.g0

    def twice_h(u):
        return 2 * call_checked(h, u)

    g = RealFunction(lambda u: call_checked(ell, twice_h(u)), J, name="g")
    F = RealFunction(lambda u: 0.5 * (c0 - call_checked(H, twice_h(u))), J, name="F")
    G = RealFunction(lambda t: c0 + call_checked(G0, t), domain_of(G0), name="G")
    return GhfSystem(domain_j=J, g=g, h=h, F=F, G=G, H=H)
