"""Function carriers: uniformly sampled grids and callables with a domain."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import OutOfDomain
from .intervals import Interval

__all__ = ["GridFunction", "RealFunction", "call_checked", "domain_of", "interior_grid"]


def interior_grid(domain: Interval, n: int) -> tuple[float, float]:
    """``(x0, step)`` of ``n`` nodes placed half a step inside ``domain``."""
    if n < 1:
        raise ValueError("n must be positive")
    if not domain.is_bounded:
        raise ValueError(f"cannot grid the unbounded interval {domain!r}")
    lo, hi = float(domain.lo), float(domain.hi)
    step = (hi - lo) / n
    return lo + step / 2, step


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values of a real function on the uniform grid ``x0 + step * i``.

    Calling the object interpolates between nodes (piecewise linear, or a
    cubic spline with ``interpolation="cubic"``) and is exact at the nodes.
    """

    x0: float
    step: float
    values: np.ndarray
    interpolation: str = "linear"
    _spline: object = field(default=None, init=False, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("values must be a nonempty 1-D sequence")
        if not (np.isfinite(self.step) and self.step > 0):
            raise ValueError(f"step must be a positive finite number, got {self.step}")
        if not np.isfinite(self.x0):
            raise ValueError("x0 must be finite")
        if self.interpolation not in ("linear", "cubic"):
            raise ValueError(f"unknown interpolation {self.interpolation!r}")
        values.setflags(write=False)
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "step", float(self.step))
        object.__setattr__(self, "values", values)
        if self.interpolation == "cubic" and values.size >= 4:
            from scipy.interpolate import CubicSpline

            object.__setattr__(self, "_spline", CubicSpline(self.x, values))

    @classmethod
    def sample(
        cls,
        fn: Callable,
        domain: Interval,
        n: int,
        interior: bool = True,
        **kwargs,
    ) -> "GridFunction":
        """Sample ``fn`` on ``n`` nodes of ``domain``.

        With ``interior=True`` the nodes sit half a step inside the domain, so
        neither a node nor any midpoint of two nodes touches an excluded
        boundary point.
        """
        if interior:
            x0, step = interior_grid(domain, n)
        else:
            if n < 2:
                raise ValueError("need n >= 2 to include both endpoints")
            x0 = float(domain.lo)
            step = (float(domain.hi) - x0) / (n - 1)
        x = x0 + step * np.arange(n)
        vals = np.broadcast_to(np.asarray(fn(x), dtype=float), x.shape)
        return cls(x0, step, vals, **kwargs)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.step * np.arange(self.n)

    @property
    def x_end(self) -> float:
        return self.x0 + self.step * (self.n - 1)

    @property
    def domain(self) -> Interval:
        return Interval.closed(self.x0, self.x_end)

    @property
    def open_domain(self) -> Interval:
        """The open interval the grid samples (half a step beyond each end node)."""
        return Interval.open(self.x0 - self.step / 2, self.x_end + self.step / 2)

    def __len__(self) -> int:
        return self.n

    def aligned_with(self, other: "GridFunction") -> bool:
        return (
            self.n == other.n
            and np.isclose(self.x0, other.x0, rtol=0, atol=1e-9 * self.step)
            and np.isclose(self.step, other.step, rtol=1e-12, atol=0)
        )

    def crop(self, start: int, stop: int) -> "GridFunction":
        """Sub-grid of nodes ``start <= i < stop``."""
        return GridFunction(self.x0 + start * self.step, self.step, self.values[start:stop], self.interpolation)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.x0, self.step, values, self.interpolation)

    def __call__(self, x, order: int = 0):
        if order != 0:
            raise ValueError("grid functions carry no derivatives; use calculus.finite_diff")
        arr = np.asarray(x, dtype=float)
        slack = 1e-9 * self.step
        bad = (arr < self.x0 - slack) | (arr > self.x_end + slack)
        if np.any(bad):
            point = float(arr[bad].flat[0]) if arr.ndim else float(arr)
            raise OutOfDomain(f"{point} outside grid domain {self.domain!r}", point)
        if self._spline is not None:
            out = self._spline(arr)
        else:
            out = np.interp(arr, self.x, self.values)
        return out if arr.ndim else float(out)


class RealFunction:
    """A vectorized callable with a declared domain and optional derivatives.

    ``deriv(x, k)`` must return the ``k``-th derivative at ``x``; it is used
    for ``order > 0``.
    """

    def __init__(
        self,
        fn: Callable,
        domain: Optional[Interval] = None,
        deriv: Optional[Callable] = None,
        name: str = "",
        max_order: int = 4,
    ):
        self.fn = fn
        self.domain = domain if domain is not None else Interval.open(-np.inf, np.inf)
        self.deriv = deriv
        self.name = name
        self.max_order = max_order

    def __repr__(self):
        return f"RealFunction({self.name or self.fn!r} on {self.domain!r})"

    def __call__(self, x, order: int = 0):
        arr = np.asarray(x, dtype=float)
        inside = self.domain.contains(arr)
        if not np.all(inside):
            point = float(arr[~inside].flat[0]) if arr.ndim else float(arr)
            label = f" of {self.name}" if self.name else ""
            raise OutOfDomain(f"{point} outside the domain{label} {self.domain!r}", point)
        if order == 0:
            out = self.fn(arr)
        else:
            if self.deriv is None or not 0 < order <= self.max_order:
                raise ValueError(f"derivative of order {order} not available for {self!r}")
            out = self.deriv(arr, order)
        out = np.broadcast_to(np.asarray(out, dtype=float), arr.shape)
        return out.copy() if arr.ndim else float(out)


def domain_of(fn) -> Optional[Interval]:
    return getattr(fn, "domain", None)


def call_checked(fn, x, order: int = 0):
    """Evaluate any supported member; plain callables are trusted as-is."""
    if isinstance(fn, (RealFunction, GridFunction)):
        return fn(x, order)
    if order:
        raise ValueError("plain callables carry no derivatives")
    arr = np.asarray(x, dtype=float)
    out = np.broadcast_to(np.asarray(fn(arr), dtype=float), arr.shape)
    return out.copy() if arr.ndim else float(out)
