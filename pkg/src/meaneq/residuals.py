"""Pointwise and grid-wide residuals of the functional equations.

Three equations are covered:

* ``eq1``: ``phi(m)(f(x) + f(y)) - phi(x)f(x) - phi(y)f(y)`` with ``m = (x+y)/2``,
* ``g0h``: ``G0(ell(x) - ell(y)) - H(m) + (H(x) + H(y))/2``,
* ``ghf``: ``G(g(u) - g(v)) - H(h(u) + h(v)) - F(u) - F(v)``.

Every pointwise function is vectorized over broadcastable ``x, y``.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .functions import call_checked, interior_grid
from .intervals import Interval

__all__ = [
    "ResidualReport",
    "dfg",
    "residual_eq1",
    "residual_g0h",
    "residual_ghf",
    "residual_grid",
    "sup_residual",
    "EQUATIONS",
    "thread_count",
]

EQUATIONS = ("eq1", "g0h", "ghf")
_ROLES = {
    "eq1": ("phi", "f"),
    "g0h": ("g0", "ell", "H"),
    "ghf": ("G", "g", "H", "h", "F"),
}


def _lift(fn, x):
    return call_checked(fn, x)


def dfg(f, g, x, y):
    """``f(m)(g(x) + g(y)) - g(m)(f(x) + f(y))`` with ``m = (x + y)/2``."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    m = (x + y) / 2
    return _lift(f, m) * (_lift(g, x) + _lift(g, y)) - _lift(g, m) * (_lift(f, x) + _lift(f, y))


def residual_eq1(phi, f, x, y):
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    m = (x + y) / 2
    fx, fy = _lift(f, x), _lift(f, y)
    # phi(x)f(x) + phi(y)f(y) is summed symmetrically so the result is exactly symmetric
    return _lift(phi, m) * (fx + fy) - (_lift(phi, x) * fx + _lift(phi, y) * fy)


def residual_g0h(g0, ell, h_fn, x, y):
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    m = (x + y) / 2
    return _lift(g0, _lift(ell, x) - _lift(ell, y)) - _lift(h_fn, m) + (_lift(h_fn, x) + _lift(h_fn, y)) / 2


def residual_ghf(G, g, H, h, F, u, v):
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    return _lift(G, _lift(g, u) - _lift(g, v)) - _lift(H, _lift(h, u) + _lift(h, v)) - _lift(F, u) - _lift(F, v)


@dataclass(frozen=True)
class ResidualReport:
    equation: str
    sup_abs: float
    mean_abs: float
    witness: tuple[float, float]
    grid_shape: tuple[int, int]
    scale: float

    @property
    def relative(self) -> float:
        return self.sup_abs / self.scale

    def passes(self, tol: float) -> bool:
        return self.sup_abs <= tol * self.scale

    def to_dict(self) -> dict:
        out = asdict(self)
        out["witness"] = list(self.witness)
        out["grid_shape"] = list(self.grid_shape)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def thread_count() -> int:
    """Worker cap for grid sweeps, read from ``MEANEQ_THREADS`` (default 1)."""
    raw = os.environ.get("MEANEQ_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _unpack(equation: str, functions) -> tuple:
    if equation not in _ROLES:
        raise ValueError(f"unknown equation {equation!r}; expected one of {EQUATIONS}")
    roles = _ROLES[equation]
    if isinstance(functions, Mapping):
        missing = [r for r in roles if r not in functions]
        if missing:
            raise ValueError(f"{equation} needs functions {roles}; missing {missing}")
        return tuple(functions[r] for r in roles)
    functions = tuple(functions)
    if len(functions) != len(roles):
        raise ValueError(f"{equation} needs {len(roles)} functions {roles}")
    return functions


def _pointwise(equation, fns, x, y):
    if equation == "eq1":
        return residual_eq1(*fns, x, y)
    if equation == "g0h":
        return residual_g0h(*fns, x, y)
    return residual_ghf(*fns, x, y)


def _scale(equation, fns, nodes) -> float:
    if equation == "eq1":
        phi, f = fns
        dominant = np.abs(_lift(phi, nodes) * _lift(f, nodes))
    elif equation == "g0h":
        dominant = np.abs(_lift(fns[2], nodes))
    else:
        G, g = fns[0], fns[1]
        gv = _lift(g, nodes)
        dominant = np.abs(_lift(G, gv[:, None] - gv[None, :]))
    return max(1.0, float(np.max(dominant)))


def residual_grid(equation: str, functions, nodes: np.ndarray, threads: Optional[int] = None):
    """Residual on the full ``len(nodes)**2`` grid, swept in row chunks.

    Rows are split into contiguous blocks that may run on a thread pool;
    every block writes its own slice, so the result does not depend on the
    number of workers.
    """
    fns = _unpack(equation, functions)
    nodes = np.asarray(nodes, dtype=float)
    n = nodes.size
    out = np.empty((n, n))
    workers = threads if threads is not None else thread_count()
    bounds = np.linspace(0, n, min(n, max(1, workers) * 4) + 1).astype(int)
    blocks = [(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]

    def run(block):
        a, b = block
        out[a:b] = _pointwise(equation, fns, nodes[a:b, None], nodes[None, :])

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, blocks))
    else:
        for block in blocks:
            run(block)
    return out


def sup_residual(
    equation: str,
    functions,
    domain: Optional[Interval] = None,
    n: int = 101,
    nodes: Optional[Sequence[float]] = None,
    threads: Optional[int] = None,
    dump_grid: Optional[str] = None,
) -> ResidualReport:
    """Sweep a residual over ``n`` interior nodes of ``domain`` (or explicit ``nodes``).

    ``scale`` is ``max(1, sup |dominant term|)`` over the nodes: ``|phi f|``
    for eq1, ``|H|`` for g0h, and ``|G(g(u) - g(v))|`` for ghf.
    """
    if nodes is None:
        if domain is None:
            raise ValueError("pass either domain or nodes")
        if n < 2:
            raise ValueError("n must be at least 2")
        x0, step = interior_grid(domain, n)
        nodes = x0 + step * np.arange(n)
    nodes = np.asarray(nodes, dtype=float)
    fns = _unpack(equation, functions)
    grid = residual_grid(equation, fns, nodes, threads)
    absgrid = np.abs(grid)
    flat = int(np.argmax(absgrid))
    i, j = divmod(flat, nodes.size)
    report = ResidualReport(
        equation=equation,
        sup_abs=float(absgrid[i, j]),
        mean_abs=float(np.mean(absgrid)),
        witness=(float(nodes[i]), float(nodes[j])),
        grid_shape=(nodes.size, nodes.size),
        scale=_scale(equation, fns, nodes),
    )
    if dump_grid:
        _dump(dump_grid, nodes, grid)
    return report


def _dump(path, nodes, grid):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,y,residual\n")
        for i, x in enumerate(nodes):
            for j, y in enumerate(nodes):
                fh.write(f"{x!r},{y!r},{grid[i, j]!r}\n")
