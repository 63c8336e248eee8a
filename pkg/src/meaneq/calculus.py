"""Finite differences, generalized Wronskians and the differential invariants.

For a solution pair with ``g = phi*f`` the following hold on the domain:
``phi' f**2`` is a nonzero constant, ``W01`` and ``W12`` are constants
``alpha`` and ``beta``, ``W02 = W13 = 0`` and ``7 W04 + 12 W13 = 0``; the
ratio ``-beta/alpha`` is the ``gamma`` of the basis equation.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.stats import trim_mean

from ._validation import check_aligned
from .exceptions import FNearZero, TooFewPoints
from .functions import GridFunction, call_checked

__all__ = [
    "stencil",
    "finite_diff",
    "derivative_stack",
    "wronskian",
    "InvariantReport",
    "invariant_report",
    "rayleigh_gamma",
    "choose_stride",
]

EPS = np.finfo(float).eps


@lru_cache(maxsize=None)
def _stencil_exact(order: int, accuracy: int) -> tuple[int, tuple[Fraction, ...]]:
    if not 1 <= order <= 4:
        raise ValueError(f"order must be in 1..4, got {order}")
    if accuracy < 2 or accuracy % 2:
        raise ValueError(f"accuracy must be a positive even integer, got {accuracy}")
    radius = (order + 1) // 2 + accuracy // 2 - 1
    offsets = list(range(-radius, radius + 1))
    size = len(offsets)
    # moment conditions sum_j w_j j^m = m! [m == order], solved exactly
    rows = [
        [Fraction(j) ** m for j in offsets] + [Fraction(math.factorial(order) if m == order else 0)]
        for m in range(size)
    ]
    for col in range(size):
        pivot = next(r for r in range(col, size) if rows[r][col] != 0)
        rows[col], rows[pivot] = rows[pivot], rows[col]
        inv = 1 / rows[col][col]
        rows[col] = [v * inv for v in rows[col]]
        for r in range(size):
            if r != col and rows[r][col] != 0:
                factor = rows[r][col]
                rows[r] = [v - factor * p for v, p in zip(rows[r], rows[col])]
    return radius, tuple(row[-1] for row in rows)


def stencil(order: int, accuracy: int = 2) -> tuple[int, np.ndarray]:
    """``(radius, weights)`` of the central stencil for ``d^order/dx^order``.

    Weights act on offsets ``-radius..radius`` and must be divided by
    ``step**order``; the truncation error is ``O(step**accuracy)``.
    """
    radius, weights = _stencil_exact(order, accuracy)
    return radius, np.array([float(w) for w in weights])


def finite_diff(f: GridFunction, order: int, accuracy: int = 2, stride: int = 1) -> GridFunction:
    """Central-difference derivative of a grid function.

    The stencil spans ``stride`` nodes per offset (effective step
    ``stride*f.step``), and the result is defined on the nodes at least
    ``radius*stride`` away from either end.
    """
    radius, w = stencil(order, accuracy)
    if stride < 1:
        raise ValueError("stride must be positive")
    reach = radius * stride
    needed = 2 * reach + 1
    if f.n < needed:
        raise TooFewPoints(f"order {order} stencil needs {needed} points, grid has {f.n}")
    v = f.values
    m = f.n - 2 * reach
    acc = np.zeros(m)
    for j, wj in zip(range(-radius, radius + 1), w):
        if wj:
            start = reach + j * stride
            acc += wj * v[start : start + m]
    h = f.step * stride
    return GridFunction(f.x0 + reach * f.step, f.step, acc / h**order)


def rayleigh_gamma(f_vals, g_vals, step: float) -> tuple[float, float, float]:
    """Discrete Rayleigh quotient of the three-point second difference.

    Returns ``(gamma, stderr, scale)``. For an exact exponential or
    trigonometric basis the three-point operator has eigenvalue
    ``4 sinh(w h/2)**2 / h**2`` (``-4 sin(w h/2)**2 / h**2``), which is
    inverted exactly, so the estimate carries no ``O(h**2)`` bias.
    """
    f_vals = np.asarray(f_vals, dtype=float)
    g_vals = np.asarray(g_vals, dtype=float)
    d2f = (f_vals[2:] - 2 * f_vals[1:-1] + f_vals[:-2]) / step**2
    d2g = (g_vals[2:] - 2 * g_vals[1:-1] + g_vals[:-2]) / step**2
    fi, gi = f_vals[1:-1], g_vals[1:-1]
    denom = float(fi @ fi + gi @ gi)
    mu = float(d2f @ fi + d2g @ gi) / denom
    resid = np.concatenate([d2f - mu * fi, d2g - mu * gi])
    stderr = float(np.linalg.norm(resid) / math.sqrt(denom))
    half = step / 2
    if mu > 0:
        gamma = (math.asinh(half * math.sqrt(mu)) / half) ** 2
    elif mu < 0:
        arg = half * math.sqrt(-mu)
        gamma = -(((math.asin(arg) if arg < 1 else math.pi / 2) / half) ** 2)
    else:
        gamma = 0.0
    return gamma, stderr, denom


def choose_stride(
    order: int,
    accuracy: int,
    step: float,
    x_scale: float,
    max_reach: int,
) -> int:
    """Stride minimizing the model error ``truncation + roundoff``.

    With ``H = stride*step`` the model is
    ``(H/x_scale)**accuracy / x_scale**order + eps*||w||_1 / H**order``,
    i.e. derivatives of size ``x_scale**-k`` relative to the function.
    """
    radius, w = stencil(order, accuracy)
    wsum = float(np.abs(w).sum())
    best, best_err = 1, math.inf
    top = max(1, max_reach // radius)
    for s in range(1, top + 1):
        H = s * step
        err = (H / x_scale) ** accuracy / x_scale**order + EPS * wsum / H**order
        if err < best_err:
            best, best_err = s, err
    return best


def _phi_stride(pv, fv, step, accuracy, x_scale, max_reach) -> int:
    """Stride for ``phi'`` minimizing the worst pointwise relative error model.

    At each node the local length scale is ``min(x_scale, |f/f'|)`` (``phi``
    has a pole at each root of ``f``) and roundoff is measured against the
    local size of ``phi'`` rather than a global one.
    """
    radius, w = stencil(1, accuracy)
    wsum = float(np.abs(w).sum())
    d_f = np.abs(np.diff(fv)) / step
    d_phi = np.abs(np.diff(pv)) / step
    rho = np.minimum(x_scale, 0.5 * (np.abs(fv[1:]) + np.abs(fv[:-1])) / np.maximum(d_f, 1e-300))
    size = 0.5 * (np.abs(pv[1:]) + np.abs(pv[:-1]))
    d_phi = np.maximum(d_phi, 1e-300)
    best, best_err = 1, math.inf
    for s in range(1, max(1, max_reach // radius) + 1):
        H = s * step
        err = float(np.max((H / rho) ** accuracy + EPS * wsum * size / (H * d_phi)))
        if err < best_err:
            best, best_err = s, err
    return best


def derivative_stack(
    f: GridFunction,
    orders=(0, 1, 2, 3, 4),
    accuracy: int = 2,
    strides: Optional[dict] = None,
) -> tuple[GridFunction, dict]:
    """Derivatives of several orders restricted to their common node range.

    Returns ``(base, {order: values})`` where ``base`` is ``f`` cropped to the
    common nodes.
    """
    strides = strides or {}
    reaches = {}
    raw = {}
    for k in orders:
        if k == 0:
            reaches[k] = 0
            continue
        s = strides.get(k, 1)
        radius, _ = stencil(k, accuracy)
        reaches[k] = radius * s
        raw[k] = finite_diff(f, k, accuracy, s)
    R = max(reaches.values())
    m = f.n - 2 * R
    if m < 1:
        raise TooFewPoints(f"grid of {f.n} points too short for orders {orders}")
    out = {}
    for k in orders:
        if k == 0:
            out[k] = f.values[R : R + m]
        else:
            off = R - reaches[k]
            out[k] = raw[k].values[off : off + m]
    return f.crop(R, R + m), out


def wronskian(f, g, k: int, l: int, at=None, accuracy: int = 2, strides: Optional[dict] = None):
    """``f^(k) g^(l) - g^(k) f^(l)``.

    For members with analytic derivatives pass the evaluation points ``at``.
    For grid functions the result is a :class:`GridFunction` on the common
    differentiable nodes (or its interpolation at ``at`` when given).
    """
    if not (0 <= k <= 4 and 0 <= l <= 4):
        raise ValueError("k and l must lie in 0..4")
    if isinstance(f, GridFunction) and isinstance(g, GridFunction):
        check_aligned(f, g)
        orders = tuple(sorted({0, k, l}))
        base, df = derivative_stack(f, orders, accuracy, strides)
        _, dg = derivative_stack(g, orders, accuracy, strides)
        w = base.with_values(df[k] * dg[l] - dg[k] * df[l])
        return w if at is None else w(at)
    if at is None:
        raise ValueError("evaluation points 'at' are required for analytic members")
    return call_checked(f, at, k) * call_checked(g, at, l) - call_checked(g, at, k) * call_checked(f, at, l)


@dataclass(frozen=True)
class InvariantReport:
    lambda_hat: float
    lambda_dev: float
    alpha_hat: float
    alpha_dev: float
    beta_hat: float
    beta_dev: float
    gamma_hat: Optional[float]
    dev_w02: float
    dev_w13: float
    dev_7w04_12w13: float
    step_used: float
    accuracy: int
    strides: dict = field(default_factory=dict)
    scales: dict = field(default_factory=dict)

    @property
    def lambda_rel_dev(self) -> float:
        return self.lambda_dev / abs(self.lambda_hat) if self.lambda_hat else math.inf

    def wronskian_checks(self, tol: float = 1e-4) -> dict:
        """Each vanishing-Wronskian deviation against ``tol`` times its scale."""
        return {
            name: getattr(self, name) <= tol * self.scales[name] for name in ("dev_w02", "dev_w13", "dev_7w04_12w13")
        }

    def to_dict(self) -> dict:
        out = asdict(self)
        out["lambda_rel_dev"] = self.lambda_rel_dev
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _sup_dev(values, center):
    return float(np.max(np.abs(values - center)))


def invariant_report(
    phi: GridFunction,
    f: GridFunction,
    tol: float = 1e-8,
    accuracy: int = 6,
    strides: Optional[dict] = None,
) -> InvariantReport:
    """Measure the differential invariants of sampled ``(phi, f)``.

    Derivatives use central stencils of the given ``accuracy``; unless
    ``strides`` is given, each derivative order gets the stride that
    balances truncation against roundoff for the problem's length scale
    ``min(L, |gamma|**-1/2)``.
    """
    check_aligned(phi, f)
    fv = f.values
    fmax = float(np.max(np.abs(fv)))
    small = np.abs(fv) <= tol * max(fmax, 1e-300)
    if fmax == 0 or np.any(small):
        idx = int(np.argmax(small)) if np.any(small) else 0
        raise FNearZero(f"f is (numerically) zero at x={f.x[idx]}", witness=float(f.x[idx]))
    g = f.with_values(phi.values * fv)
    if f.n < 7:
        raise TooFewPoints("need at least 7 points")

    L = f.step * (f.n - 1)
    gamma0, _, _ = rayleigh_gamma(fv, g.values, f.step)
    x_scale = L if gamma0 == 0 else min(L, 1 / math.sqrt(abs(gamma0)))
    max_reach = max(1, (f.n - 1) // 8)
    strides = dict(strides or {})
    for k in range(1, 5):
        strides.setdefault(k, choose_stride(k, accuracy, f.step, x_scale, max_reach))
    if "phi" not in strides:
        strides["phi"] = _phi_stride(phi.values, fv, f.step, accuracy, x_scale, max_reach)

    fg_strides = {k: strides[k] for k in range(1, 5)}
    base, df = derivative_stack(f, (0, 1, 2, 3, 4), accuracy, fg_strides)
    _, dg = derivative_stack(g, (0, 1, 2, 3, 4), accuracy, fg_strides)
    _, dphi = derivative_stack(phi, (0, 1), accuracy, {1: strides["phi"]})
    # align phi' with the common node range of the order-4 stack; crop both
    # to whichever range is shorter
    R_all = (f.n - base.n) // 2
    R_phi = (phi.n - dphi[1].size) // 2
    R = max(R_all, R_phi)
    m = f.n - 2 * R
    if m < 1:
        raise TooFewPoints("grid too short for the chosen strides")
    df = {k: v[R - R_all : R - R_all + m] for k, v in df.items()}
    dg = {k: v[R - R_all : R - R_all + m] for k, v in dg.items()}
    dphi1 = dphi[1][R - R_phi : R - R_phi + m]
    f0 = df[0]

    def W(k, l):
        return df[k] * dg[l] - dg[k] * df[l]

    def W_scale(k, l):
        return float(np.max(np.abs(df[k] * dg[l]) + np.abs(dg[k] * df[l])))

    lam = dphi1 * f0**2
    lam_hat = float(trim_mean(lam, 0.05))
    w01, w12 = W(0, 1), W(1, 2)
    alpha_hat = float(trim_mean(w01, 0.05))
    beta_hat = float(trim_mean(w12, 0.05))
    scale01 = max(W_scale(0, 1), 1e-300)
    gamma_hat = -beta_hat / alpha_hat if abs(alpha_hat) > 1e-8 * scale01 else None

    w13 = W(1, 3)
    floor = abs(alpha_hat)
    Lc = max(L, 1e-300)
    scales = {
        "dev_w02": max(W_scale(0, 2), floor / Lc),
        "dev_w13": max(W_scale(1, 3), floor / Lc**3),
        "dev_7w04_12w13": max(7 * W_scale(0, 4) + 12 * W_scale(1, 3), floor / Lc**3),
        "w01": scale01,
    }
    return InvariantReport(
        lambda_hat=lam_hat,
        lambda_dev=_sup_dev(lam, lam_hat),
        alpha_hat=alpha_hat,
        alpha_dev=_sup_dev(w01, alpha_hat),
        beta_hat=beta_hat,
        beta_dev=_sup_dev(w12, beta_hat),
        gamma_hat=gamma_hat,
        dev_w02=float(np.max(np.abs(W(0, 2)))),
        dev_w13=float(np.max(np.abs(w13))),
        dev_7w04_12w13=float(np.max(np.abs(7 * W(0, 4) + 12 * w13))),
        step_used=f.step,
        accuracy=accuracy,
        strides={str(k): v for k, v in strides.items()},
        scales=scales,
    )
