"""Input validation helpers shared by the fitting functions and estimators."""

from __future__ import annotations

import numpy as np

from .exceptions import DomainMismatch
from .functions import GridFunction

__all__ = ["check_aligned", "check_uniform_grid", "as_grid"]


def check_aligned(*grids: GridFunction) -> None:
    """Raise :class:`DomainMismatch` unless all grids share nodes."""
    for g in grids:
        if not isinstance(g, GridFunction):
            raise TypeError(f"expected GridFunction, got {type(g).__name__}")
    first = grids[0]
    for other in grids[1:]:
        if not first.aligned_with(other):
            raise DomainMismatch(
                f"grids are not aligned: (x0={first.x0}, step={first.step}, n={first.n}) vs "
                f"(x0={other.x0}, step={other.step}, n={other.n})"
            )


def check_uniform_grid(X, rtol: float = 1e-9) -> tuple[float, float]:
    """Validate sample locations and return ``(x0, step)``.

    Accepts shape ``(n,)`` or ``(n, 1)``; nodes must be increasing and
    equally spaced to ``rtol`` relative to the step.
    """
    x = np.asarray(X, dtype=float)
    if x.ndim == 2 and x.shape[1] == 1:
        x = x[:, 0]
    if x.ndim != 1:
        raise ValueError(f"X must have shape (n,) or (n, 1), got {np.shape(X)}")
    if x.size < 2:
        raise ValueError("need at least 2 sample locations")
    if not np.all(np.isfinite(x)):
        raise ValueError("X contains non-finite values")
    steps = np.diff(x)
    step = (x[-1] - x[0]) / (x.size - 1)
    if step <= 0 or np.max(np.abs(steps - step)) > rtol * step * max(1.0, x.size / 1e3) + 1e-12 * max(
        1.0, abs(x).max()
    ):
        raise ValueError("X must be an increasing, uniformly spaced grid")
    return float(x[0]), float(step)


def as_grid(X, y) -> GridFunction:
    x0, step = check_uniform_grid(X)
    values = np.asarray(y, dtype=float)
    if values.shape != (np.asarray(X).shape[0],):
        raise ValueError("values must have one entry per sample location")
    if not np.all(np.isfinite(values)):
        raise ValueError("values contain non-finite entries")
    return GridFunction(x0, step, values)
