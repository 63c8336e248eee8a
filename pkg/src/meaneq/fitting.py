"""Parameter recovery and case classification from sampled data."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._validation import check_aligned
from .calculus import finite_diff, rayleigh_gamma
from .exceptions import (
    DegenerateData,
    DegenerateParams,
    DomainViolation,
    IllConditioned,
    NonMonotoneEll,
    OutOfDomain,
    Unclassifiable,
)
from .families import (
    ClosedFormTriple,
    PairCase,
    PairParams,
    TripleCase,
    TripleParams,
    _basis_values,
    build_triple,
    case_for_gamma,
)
from .functions import GridFunction
from .intervals import Interval, IntervalUnion, half_sum, zero_set

__all__ = [
    "PairFit",
    "TripleFit",
    "estimate_gamma",
    "fit_coefficients",
    "classify_pair",
    "classify_triple",
    "triple_params_from_pair",
    "normalize_params",
]

COND_LIMIT = 1e12
VALIDATION_NODES = 101


def estimate_gamma(f: GridFunction, g: GridFunction) -> tuple[float, float]:
    """Least-squares ``gamma`` in ``psi'' = gamma psi`` shared by ``f`` and ``g``.

    The Rayleigh quotient of the three-point second difference is mapped
    through the exact discrete eigenvalue relation, so exact basis samples
    return ``gamma`` up to rounding. ``stderr`` is the relative residual
    ``||(f'', g'') - mu (f, g)|| / ||(f, g)||``.
    """
    check_aligned(f, g)
    if f.n < 7:
        raise DegenerateData(f"need at least 7 grid points, got {f.n}")
    fv, gv = f.values, g.values
    if float(fv @ fv + gv @ gv) <= 1e-14 * f.n:
        raise DegenerateData("f and g are numerically zero")
    gamma, stderr, _ = rayleigh_gamma(fv, gv, f.step)
    return gamma, stderr


def _basis_matrix(gamma, x, center):
    p1, p2 = _basis_values(gamma, x - center, 0)
    return np.column_stack([p1, p2])


def _uncenter(gamma, center, u, v):
    """Coefficients in the basis at 0 of ``u psi1(x-c) + v psi2(x-c)``."""
    if gamma == 0:
        # u + v (x - c)
        return u - v * center, v
    w = math.sqrt(abs(gamma))
    if gamma < 0:
        cs, sn = math.cos(w * center), math.sin(w * center)
        # sin(wx - wc) = sin cos_c - cos sin_c ; cos(wx - wc) = cos cos_c + sin sin_c
        return u * cs + v * sn, -u * sn + v * cs
    ch, sh = math.cosh(w * center), math.sinh(w * center)
    return u * ch - v * sh, -u * sh + v * ch


def fit_coefficients(f: GridFunction, g: GridFunction, gamma: float):
    """Least-squares coefficients of ``f`` and ``g`` in the basis for ``gamma``.

    Returns ``(a, b, c, d, misfit)`` where ``misfit`` is the combined relative
    residual norm. The fit runs in a basis centered on the grid midpoint and
    is mapped back exactly.
    """
    check_aligned(f, g)
    if not math.isfinite(gamma):
        raise ValueError("gamma must be finite")
    if f.n < 2:
        raise DegenerateData("need at least 2 grid points")
    x = f.x
    center = 0.5 * (x[0] + x[-1])
    with np.errstate(over="ignore", invalid="ignore"):
        M = _basis_matrix(gamma, x, center)
        norms = np.linalg.norm(M, axis=0)
    if not np.all(np.isfinite(norms)):
        raise IllConditioned("basis overflows on the grid", math.inf)
    if np.any(norms == 0):
        raise IllConditioned("basis column vanishes on the grid", math.inf)
    Mn = M / norms
    cond = float(np.linalg.cond(Mn)) ** 2
    if not cond <= COND_LIMIT:
        raise IllConditioned(f"basis normal matrix condition number {cond:.3g} exceeds {COND_LIMIT:g}", cond)
    rhs = np.column_stack([f.values, g.values])
    coef, *_ = np.linalg.lstsq(Mn, rhs, rcond=None)
    coef = coef / norms[:, None]
    resid = rhs - M @ coef
    total = float(np.linalg.norm(rhs))
    misfit = float(np.linalg.norm(resid) / total) if total > 0 else math.inf
    a, b = _uncenter(gamma, center, coef[0, 0], coef[1, 0])
    c, d = _uncenter(gamma, center, coef[0, 1], coef[1, 1])
    return float(a), float(b), float(c), float(d), misfit


def normalize_params(p: PairParams) -> PairParams:
    """Rescale so that ``a**2 + b**2 = 1`` with the first nonzero of ``(a, b)`` positive."""
    norm = math.hypot(p.a, p.b)
    lead = p.a if p.a != 0 else p.b
    t = math.copysign(1.0 / norm, lead)
    return PairParams(p.a * t, p.b * t, p.c * t, p.d * t, p.gamma)


@dataclass
class PairFit:
    case: PairCase
    params: Optional[PairParams]
    fit_residual: float
    gamma_stderr: float
    gamma_hat: Optional[float] = None
    raw_params: Optional[PairParams] = None
    data_residual: float = 0.0
    flat: Optional[dict] = None
    notes: list = field(default_factory=list)

    def predict(self, x):
        """``(phi, f)`` of the recovered model at ``x``."""
        x = np.asarray(x, dtype=float)
        if self.case is PairCase.FLAT:
            phi = np.full_like(x, self.flat["phi_const"])
            return phi, None
        p = self.raw_params
        p1, p2 = _basis_values(p.gamma, x, 0)
        fv = p.a * p1 + p.b * p2
        return (p.c * p1 + p.d * p2) / fv, fv

    def to_dict(self) -> dict:
        out = {
            "kind": "pair_fit",
            "case": self.case.value,
            "params": None if self.params is None else self.params.as_dict(),
            "fit_residual": self.fit_residual,
            "gamma_stderr": self.gamma_stderr,
            "gamma_hat": self.gamma_hat,
            "data_residual": self.data_residual,
            "normalization": "a^2+b^2=1, first nonzero of (a, b) positive",
        }
        if self.flat is not None:
            out["flat"] = {
                "phi_const": self.flat["phi_const"],
                "support": _union_json(self.flat["support"]),
                "constancy_set": _union_json(self.flat["constancy_set"]),
            }
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _union_json(u: IntervalUnion):
    from .io import union_to_json

    return union_to_json(u)


def _validation_stride(n: int) -> int:
    """Even stride so node midpoints fall on nodes and at most ~101 nodes remain."""
    s = max(2, math.ceil((n - 1) / (VALIDATION_NODES - 1)))
    return s + (s % 2)


def _data_eq1_residual(phi: GridFunction, f: GridFunction) -> float:
    s = _validation_stride(f.n)
    idx = np.arange(0, f.n, s)
    i, j = np.meshgrid(idx, idx, indexing="ij")
    m = (i + j) // 2
    pv, fv = phi.values, f.values
    r = pv[m] * (fv[i] + fv[j]) - (pv[i] * fv[i] + pv[j] * fv[j])
    return float(np.max(np.abs(r)) / max(1.0, float(np.max(np.abs(pv * fv)))))


def _sure_support(f: GridFunction, zf: IntervalUnion) -> IntervalUnion:
    """Closed hulls of the runs of nonzero nodes.

    The true support of ``f`` can reach up to a step further on each side; the
    inner estimate keeps the half-sum set inside the true constancy set.
    """
    x = f.x
    nonzero = ~zf.contains(x)
    padded = np.concatenate(([False], nonzero, [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    return IntervalUnion([Interval.closed(float(x[a]), float(x[b - 1])) for a, b in zip(edges[::2], edges[1::2])])


def _flat_check(phi: GridFunction, f: GridFunction, tol: float):
    domain = f.open_domain
    zf = zero_set(f)
    zc = _sure_support(f, zf)
    if zc.is_empty:
        constancy = IntervalUnion.empty()
        spread = 0.0
        phi_const = float(np.mean(phi.values))
    else:
        constancy = half_sum(zc, domain)
        mask = constancy.contains(phi.x)
        vals = phi.values[mask] if np.any(mask) else phi.values[:0]
        spread = float(vals.max() - vals.min()) if vals.size else 0.0
        phi_const = float(np.mean(vals)) if vals.size else float(np.mean(phi.values))
    scale = max(1.0, float(np.max(np.abs(phi.values))))
    info = {
        "phi_const": phi_const,
        "support": zc,
        "constancy_set": constancy,
        "zero_set": zf,
        "spread": spread,
    }
    return spread <= tol * scale, info, zf


def classify_pair(phi: GridFunction, f: GridFunction, tol: float = 1e-6) -> PairFit:
    """Decide which solution alternative sampled ``(phi, f)`` belongs to.

    Flat when ``phi`` is constant (to ``tol``) on ``(Z_f^c + I)/2``;
    otherwise ``f`` must be nowhere zero and ``(f, phi f)`` is fitted by
    the basis of ``psi'' = gamma psi``. Validation requires both the
    reconstruction misfit and the residual of the data on grid nodes to be
    at most ``tol``.
    """
    check_aligned(phi, f)
    is_flat, info, zf = _flat_check(phi, f, tol)
    if is_flat:
        return PairFit(
            case=PairCase.FLAT,
            params=None,
            fit_residual=info["spread"] / max(1.0, float(np.max(np.abs(phi.values)))),
            gamma_stderr=0.0,
            data_residual=_data_eq1_residual(phi, f),
            flat=info,
        )
    if not zf.is_empty:
        raise Unclassifiable(
            "phi is not constant on the half-sum set yet f vanishes on the grid",
            misfit=math.inf,
            diagnostics={"zero_set": repr(zf), "spread": info["spread"]},
        )
    g = f.with_values(phi.values * f.values)
    gamma_hat, stderr = estimate_gamma(f, g)
    gamma = 0.0 if abs(gamma_hat) <= 3 * stderr else gamma_hat
    try:
        a, b, c, d, misfit = fit_coefficients(f, g, gamma)
    except IllConditioned as exc:
        raise Unclassifiable(str(exc), misfit=math.inf, diagnostics={"gamma_hat": gamma_hat}) from exc
    data_res = _data_eq1_residual(phi, f)
    diagnostics = {
        "gamma_hat": gamma_hat,
        "gamma_stderr": stderr,
        "misfit": misfit,
        "data_residual": data_res,
    }
    if not (misfit <= tol and data_res <= tol):
        raise Unclassifiable(
            f"data solve neither alternative (misfit {misfit:.3g}, residual {data_res:.3g}, tol {tol:g})",
            misfit=max(misfit, data_res),
            diagnostics=diagnostics,
        )
    try:
        raw = PairParams(a, b, c, d, gamma)
    except DegenerateParams as exc:
        raise Unclassifiable(str(exc), misfit=misfit, diagnostics=diagnostics) from exc
    return PairFit(
        case=case_for_gamma(gamma),
        params=normalize_params(raw),
        fit_residual=misfit,
        gamma_stderr=stderr,
        gamma_hat=gamma_hat,
        raw_params=raw,
        data_residual=data_res,
    )


# ---------------------------------------------------------------------------
# triples


@dataclass
class TripleFit:
    case: TripleCase
    params: TripleParams
    fit_residual: float
    member: Optional[ClosedFormTriple] = None
    pair_fit: Optional[PairFit] = None
    data_residual: float = 0.0

    def to_dict(self) -> dict:
        return {
            "kind": "triple_fit",
            "case": self.case.value,
            "params": self.params.as_dict(),
            "fit_residual": self.fit_residual,
            "data_residual": self.data_residual,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _sgn(v: float) -> float:
    return 1.0 if v > 0 else -1.0


def triple_params_from_pair(
    a: float,
    b: float,
    c: float,
    d: float,
    gamma: float,
    length: float,
    f_max: float,
) -> TripleParams:
    """Map basis coefficients of ``(f, g) = (1/ell', H' / ell')`` to a table row.

    ``E`` and ``B`` are left at 0; they are fixed afterwards by point matching.
    ``length`` and ``f_max`` set the thresholds that decide ``b = 0`` (for
    ``gamma = 0``) and ``|a| = |b|`` (for ``gamma > 0``).
    """
    if gamma < 0:
        s = a * a + b * b
        rg = math.sqrt(-gamma)
        two_beta = math.atan2(b, a) % (2 * math.pi)
        return TripleParams(
            TripleCase.V,
            A=(a * c + b * d) / s,
            C=(a * d - b * c) / (rg * s),
            D=math.sqrt(-gamma * s) / 2,
            alpha=rg / 2,
            beta=two_beta / 2,
        )
    if gamma == 0:
        if abs(b) * length <= 1e-6 * f_max:
            return TripleParams(TripleCase.II, A=c / a, C=-d / (2 * a), D=a / 2)
        return TripleParams(TripleCase.IV, A=d / b, C=(b * c - a * d) / b**2, D=b / 2, alpha=b, beta=a)
    rg = math.sqrt(gamma)
    norm = math.hypot(a, b)
    if abs(abs(a) - abs(b)) / norm <= 1e-6:
        s = _sgn(a * b)
        a_avg = _sgn(a) * (abs(a) + abs(b)) / 2
        return TripleParams(
            TripleCase.III,
            A=(c + s * d) / (2 * a_avg),
            C=(d - s * c) / (2 * a_avg * rg),
            D=-a_avg * rg / 2,
            alpha=-s * rg,
        )
    if abs(a) > abs(b):
        q = a * a - b * b
        return TripleParams(
            TripleCase.VI,
            A=(a * c - b * d) / q,
            C=(a * d - b * c) / (rg * q),
            D=math.sqrt(gamma * q) / (2 * _sgn(a)),
            alpha=rg / 2,
            beta=math.asinh(_sgn(a) * b / math.sqrt(q)) / 2,
        )
    q = b * b - a * a
    return TripleParams(
        TripleCase.VII,
        A=(b * d - a * c) / q,
        C=(c * b - a * d) / (rg * q),
        D=math.sqrt(gamma * q) / (2 * _sgn(b)),
        alpha=rg / 2,
        beta=math.asinh(_sgn(b) * a / math.sqrt(q)) / 2,
    )


def _check_monotone(ell: GridFunction):
    diffs = np.diff(ell.values)
    if diffs.size == 0:
        raise NonMonotoneEll("ell needs at least 2 samples", index=0)
    sign = np.sign(diffs[0])
    bad = np.nonzero(np.sign(diffs) != sign)[0] if sign != 0 else np.array([0])
    if bad.size:
        raise NonMonotoneEll(f"ell is not strictly monotone at index {int(bad[0])}", index=int(bad[0]))


def _rel_sup(model, data):
    return float(np.max(np.abs(model - data)) / max(1.0, float(np.max(np.abs(data)))))


def _data_g0h_residual(g0: GridFunction, ell: GridFunction, H: GridFunction) -> float:
    s = _validation_stride(ell.n)
    idx = np.arange(0, ell.n, s)
    i, j = np.meshgrid(idx, idx, indexing="ij")
    m = (i + j) // 2
    lv, hv = ell.values, H.values
    u = lv[i] - lv[j]
    inside = (u >= g0.x0) & (u <= g0.x_end)
    spline = g0 if g0.interpolation == "cubic" else GridFunction(g0.x0, g0.step, g0.values, "cubic")
    r = spline(u[inside]) - hv[m][inside] + (hv[i][inside] + hv[j][inside]) / 2
    if r.size == 0:
        return 0.0
    return float(np.max(np.abs(r)) / max(1.0, float(np.max(np.abs(hv)))))


def classify_triple(g0: GridFunction, ell: GridFunction, h_fn: GridFunction, tol: float = 1e-6) -> TripleFit:
    """Recover the table row of sampled ``(G0, ell, H)``.

    Builds ``phi = H'`` and ``f = 1/ell'`` with sixth-order differences,
    classifies the pair, maps its coefficients to ``(A, ..., beta)`` and pins
    ``E`` and ``B`` at the grid node nearest the domain midpoint. Case (i)
    takes ``A, B`` from a linear fit of ``H``.
    """
    check_aligned(ell, h_fn)
    _check_monotone(ell)
    domain = ell.open_domain
    dH = finite_diff(h_fn, 1, accuracy=6)
    dl = finite_diff(ell, 1, accuracy=6)
    phi = dH
    f = dl.with_values(1.0 / dl.values)
    pair = classify_pair(phi, f, tol)
    x = ell.x
    mid = int(np.argmin(np.abs(x - 0.5 * (x[0] + x[-1]))))
    scale_H = max(1.0, float(np.max(np.abs(h_fn.values))))
    diagnostics = {"pair_case": pair.case.value}

    if pair.case is PairCase.FLAT:
        A, B = np.polyfit(x - x[mid], h_fn.values, 1)
        B = B - A * x[mid]
        params = TripleParams(TripleCase.I, A=float(A), B=float(B))
        H_model = params.A * x + params.B
        g0_misfit = float(np.max(np.abs(g0.values))) / scale_H
        misfit = max(_rel_sup(H_model, h_fn.values), g0_misfit)
        member = ClosedFormTriple(params, domain, ell=ell)
    else:
        p = pair.raw_params
        L = x[-1] - x[0]
        f_max = float(np.max(np.abs(f.values)))
        base = triple_params_from_pair(p.a, p.b, p.c, p.d, p.gamma, L, f_max)
        try:
            trial = build_triple(base, domain)
            E = float(ell.values[mid] - trial.ell(x[mid]))
            B = float(h_fn.values[mid] - trial.H(x[mid]))
            params = TripleParams(**{**base.as_dict(), "E": E, "B": B})
            member = build_triple(params, domain)
            ell_model = member.ell(x)
            H_model = member.H(x)
            u = g0.x[member.g0_domain.contains(g0.x)]
            g0_model = member.g0(u)
            g0_data = g0(u)
        except (DomainViolation, DegenerateParams, OutOfDomain) as exc:
            diagnostics["error"] = str(exc)
            raise Unclassifiable(f"no table row fits: {exc}", misfit=math.inf, diagnostics=diagnostics) from exc
        misfit = max(
            _rel_sup(ell_model, ell.values),
            _rel_sup(H_model, h_fn.values),
            _rel_sup(g0_model, g0_data) if u.size else 0.0,
        )
    data_res = _data_g0h_residual(g0, ell, h_fn)
    diagnostics.update(misfit=misfit, data_residual=data_res)
    if not (misfit <= tol and data_res <= tol):
        raise Unclassifiable(
            f"triple reconstruction fails (misfit {misfit:.3g}, residual {data_res:.3g}, tol {tol:g})",
            misfit=max(misfit, data_res),
            diagnostics=diagnostics,
        )
    return TripleFit(
        case=params.case,
        params=params,
        fit_residual=misfit,
        member=member,
        pair_fit=pair,
        data_residual=data_res,
    )
