"""Command-line front end.

Exit codes: 0 success, 1 input error (a JSON error object is printed),
2 mathematical failure (threshold exceeded or data unclassifiable).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Optional

import numpy as np

from . import io
from .calculus import invariant_report
from .exceptions import MeanEqError, Unclassifiable
from .families import (
    ClosedFormPair,
    ClosedFormTriple,
    FlatPair,
    PairParams,
    TripleParams,
    build_pair,
    build_triple,
)
from .fitting import classify_pair, classify_triple
from .functions import GridFunction
from .intervals import Interval, IntervalUnion, half_sum
from .reduction import GhfSystem, ReducedSystem, lift_g0h, reduce_ghf
from .residuals import sup_residual

EXIT_OK, EXIT_INPUT, EXIT_MATH = 0, 1, 2


class InputError(Exception):
    """Bad command-line input (exit code 1)."""


class MathFailure(Exception):
    """A threshold or classification failure (exit code 2) carrying its payload."""

    def __init__(self, payload: dict):
        super().__init__(payload.get("message", "failure"))
        self.payload = payload


# ---------------------------------------------------------------------------
# argument helpers


def parse_domain(text: str) -> Interval:
    try:
        lo, hi = (float(p) for p in text.split(","))
    except ValueError as exc:
        raise InputError(f"domain must be LO,HI, got {text!r}") from exc
    return Interval.open(lo, hi)


def parse_assignments(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise InputError(f"expected key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _floats(d: dict, keys) -> dict:
    out = {}
    for k, v in d.items():
        if k not in keys:
            raise InputError(f"unknown parameter {k!r}; expected one of {sorted(keys)}")
        try:
            out[k] = float(v)
        except ValueError as exc:
            raise InputError(f"parameter {k} must be a number, got {v!r}") from exc
    return out


def _write_json(path: Optional[str], obj) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(io.dumps(obj))


def _emit(args, obj: dict, summary: str) -> None:
    if args.json:
        sys.stdout.write(io.dumps(obj))
    else:
        print(summary)


# ---------------------------------------------------------------------------
# family construction and sampling


def _make_member(args):
    chosen = [k for k in ("pair", "triple", "flat") if getattr(args, k)]
    if len(chosen) != 1:
        raise InputError("give exactly one of --pair, --triple, --flat")
    if not args.domain:
        raise InputError("--domain LO,HI is required")
    domain = parse_domain(args.domain)
    kind = chosen[0]
    values = parse_assignments(getattr(args, kind))
    if kind == "pair":
        p = _floats(values, {"a", "b", "c", "d", "gamma"})
        missing = {"a", "b", "c", "d", "gamma"} - set(p)
        if missing:
            raise InputError(f"--pair is missing {sorted(missing)}")
        return build_pair(PairParams(**p), domain)
    if kind == "triple":
        case = values.pop("case", None)
        if case is None:
            raise InputError("--triple needs case=i..vii")
        p = _floats(values, {"A", "B", "C", "D", "E", "alpha", "beta"})
        try:
            params = TripleParams(case, **p)
        except ValueError as exc:
            if isinstance(exc, MeanEqError):
                raise
            raise InputError(f"unknown triple case {case!r}") from exc
        return build_triple(params, domain)
    return _make_flat(values, domain)


def _make_flat(values: dict, domain: Interval) -> FlatPair:
    support_text = values.pop("support", "none")
    p = _floats(values, {"phi_const", "tail_slope"})
    if "phi_const" not in p:
        raise InputError("--flat needs phi_const=V")
    support = None if support_text.lower() in ("none", "empty") else parse_domain(support_text)
    phi_const = p["phi_const"]
    f_spec = None
    if support is not None:
        s0, s1 = float(support.lo), float(support.hi)
        # f(x) = (x - s0)(s1 - x), positive on the support
        f_spec = {"kind": "poly", "coeffs": [-1.0, s0 + s1, -s0 * s1]}
        const_set = half_sum(IntervalUnion.of(support), domain).parts[0]
        lo, hi = float(const_set.lo), float(const_set.hi)
    else:
        lo = hi = float(domain.midpoint)
    tail_spec = {"kind": "ramp", "value": phi_const, "slope": p.get("tail_slope", 0.0), "lo": lo, "hi": hi}
    obj = {
        "kind": "flat",
        "domain": io.interval_to_json(domain),
        "params": {
            "phi_const": phi_const,
            "support": None if support is None else io.interval_to_json(support),
        },
        "phi_tail": tail_spec,
    }
    if f_spec is not None:
        obj["f_support"] = f_spec
    return io.family_from_json(obj)


def _sample_member(member, n: int) -> tuple[str, dict]:
    if isinstance(member, ClosedFormPair):
        return "pair_samples", {
            "phi": GridFunction.sample(member.phi, member.domain, n),
            "f": GridFunction.sample(member.f, member.domain, n),
        }
    if isinstance(member, FlatPair):
        return "pair_samples", {
            "phi": GridFunction.sample(member.phi, member.domain, n),
            "f": GridFunction.sample(member.f, member.domain, n),
        }
    ell = GridFunction.sample(member.ell, member.domain, n)
    H = GridFunction.sample(member.H, member.domain, n)
    radius = float(ell.values.max() - ell.values.min())
    if radius > 0:
        u = Interval.closed(-radius, radius)
        g0 = GridFunction.sample(member.g0, u, n, interior=False)
    else:
        g0 = GridFunction(0.0, 1.0, [0.0])
    return "triple_samples", {"ell": ell, "H": H, "g0": g0}


def _root_note(member) -> str:
    if isinstance(member, ClosedFormPair):
        return "f nowhere zero: yes (analytic root check)"
    if isinstance(member, FlatPair):
        return "flat: f vanishes off support"
    return f"g0 domain {member.g0_domain!r}"


def cmd_make(args) -> int:
    member = _make_member(args)
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    family = io.family_to_json(member)
    _write_json(os.path.join(out_dir, "family.json"), family)
    kind, grids = _sample_member(member, args.n)
    io.write_bundle(os.path.join(out_dir, "bundle.json"), kind, grids, {"family": "family.json"})
    case = member.case.value
    summary = f"made {family['kind']} case={case} domain={member.domain!r} n={args.n} {_root_note(member)}"
    _emit(
        args,
        {
            "family": family,
            "case": case,
            "files": sorted(["family.json", "bundle.json"] + [f"bundle.{k}.csv" for k in grids]),
        },
        summary,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# loading inputs


def _load_family(path: str):
    with open(path, encoding="utf-8") as fh:
        return io.family_from_json(json.load(fh))


def _even_nodes(grid: GridFunction, n: int) -> np.ndarray:
    step = 2 * max(1, math.ceil((grid.n - 1) / (2 * max(1, n - 1))))
    return grid.x[::step]


def _functions_for(args):
    """Resolve ``(equation functions, domain or None, nodes or None)`` for verify."""
    eq = args.eq
    if args.family:
        member = _load_family(args.family)
        if eq == "eq1":
            if isinstance(member, ClosedFormTriple):
                phi, f = member.weight_pair()
                return {"phi": phi, "f": f}, member.domain, None, member
            return {"phi": member.phi, "f": member.f}, member.domain, None, member
        if eq == "g0h":
            if not isinstance(member, ClosedFormTriple):
                raise InputError("eq g0h needs a triple family")
            return {"g0": member.g0, "ell": member.ell, "H": member.H}, member.domain, None, member
        raise InputError("eq ghf needs a lifted bundle (--bundle)")
    if not args.bundle:
        raise InputError("give --family or --bundle")
    obj, grids = io.read_bundle(args.bundle)
    kind = obj.get("kind")
    if eq == "ghf":
        system = _ghf_from_bundle(args.bundle, obj, grids)
        return system.functions(), system.domain_j, None, None
    if eq == "eq1":
        if kind != "pair_samples":
            raise InputError(f"eq1 needs a pair_samples bundle, got {kind!r}")
        phi, f = grids["phi"], grids["f"]
        return {"phi": phi, "f": f}, None, _even_nodes(f, args.n), None
    if kind != "triple_samples":
        raise InputError(f"g0h needs a triple_samples bundle, got {kind!r}")
    g0 = grids["g0"]
    g0 = GridFunction(g0.x0, g0.step, g0.values, "cubic")
    return {"g0": g0, "ell": grids["ell"], "H": grids["H"]}, None, _even_nodes(grids["ell"], args.n), None


def _ghf_from_bundle(path, obj, grids) -> GhfSystem:
    kind = obj.get("kind")
    if kind == "ghf_lifted":
        base = os.path.dirname(os.path.abspath(path))
        triple_obj = obj["triple"]
        if isinstance(triple_obj, str):
            with open(os.path.join(base, triple_obj), encoding="utf-8") as fh:
                triple_obj = json.load(fh)
        member = io.family_from_json(triple_obj)
        red = ReducedSystem(member.domain, member.ell, member.H, member.g0, float(obj["g_at_zero"]))
        return lift_g0h(red, grids["h"])
    if kind == "ghf":
        missing = {"g", "h", "F", "G", "H"} - set(grids)
        if missing:
            raise InputError(f"ghf bundle is missing grids {sorted(missing)}")
        J = io.interval_from_json(obj["domain_j"]) if "domain_j" in obj else grids["h"].open_domain
        return GhfSystem(J, grids["g"], grids["h"], grids["F"], grids["G"], grids["H"])
    raise InputError(f"expected a ghf or ghf_lifted bundle, got {kind!r}")


def _spot_check(eq, fns, domain, k, seed):
    from .residuals import residual_eq1, residual_g0h, residual_ghf

    rng = np.random.default_rng(seed)
    lo, hi = float(domain.lo), float(domain.hi)
    span = hi - lo
    x = rng.uniform(lo + 1e-9 * span, hi - 1e-9 * span, k)
    y = rng.uniform(lo + 1e-9 * span, hi - 1e-9 * span, k)
    if eq == "eq1":
        r = residual_eq1(fns["phi"], fns["f"], x, y)
    elif eq == "g0h":
        r = residual_g0h(fns["g0"], fns["ell"], fns["H"], x, y)
    else:
        r = residual_ghf(fns["G"], fns["g"], fns["H"], fns["h"], fns["F"], x, y)
    i = int(np.argmax(np.abs(r)))
    return {"points": k, "seed": seed, "sup_abs": float(abs(r[i])), "witness": [float(x[i]), float(y[i])]}


def cmd_verify(args) -> int:
    fns, domain, nodes, member = _functions_for(args)
    report = sup_residual(args.eq, fns, domain=domain, n=args.n, nodes=nodes, dump_grid=args.dump_grid)
    out = {"residual": report.to_dict(), "tol": args.tol, "passed": report.passes(args.tol)}
    if args.spot:
        dom = domain if domain is not None else Interval.open(float(nodes[0]), float(nodes[-1]))
        out["spot_check"] = _spot_check(args.eq, fns, dom, args.spot, args.seed)
    if args.invariants:
        if args.eq != "eq1":
            raise InputError("--invariants applies to eq1")
        if domain is not None:
            phi = GridFunction.sample(fns["phi"], domain, args.inv_n)
            f = GridFunction.sample(fns["f"], domain, args.inv_n)
        else:
            phi, f = fns["phi"], fns["f"]
        out["invariants"] = invariant_report(phi, f).to_dict()
    _write_json(args.out, out)
    status = "PASS" if out["passed"] else "FAIL"
    summary = (
        f"{status} {args.eq}: sup={report.sup_abs:.3e} scale={report.scale:.3e} "
        f"tol={args.tol:g} witness=({report.witness[0]:.6g}, {report.witness[1]:.6g})"
    )
    _emit(args, out, summary)
    return EXIT_OK if out["passed"] else EXIT_MATH


def _fit_inputs(args):
    if args.bundle:
        obj, grids = io.read_bundle(args.bundle)
        kind = obj.get("kind")
        if kind == "pair_samples":
            return "pair", grids
        if kind == "triple_samples":
            return "triple", grids
        raise InputError(f"cannot fit a {kind!r} bundle")
    if args.phi and args.f:
        return "pair", {"phi": io.read_csv(args.phi), "f": io.read_csv(args.f)}
    if args.ell and args.H and args.g0:
        return "triple", {"ell": io.read_csv(args.ell), "H": io.read_csv(args.H), "g0": io.read_csv(args.g0)}
    raise InputError("give --bundle, or --phi and --f, or --ell, --H and --g0")


def _run_fit(args):
    kind, grids = _fit_inputs(args)
    try:
        if kind == "pair":
            fit = classify_pair(grids["phi"], grids["f"], args.tol)
        else:
            fit = classify_triple(grids["g0"], grids["ell"], grids["H"], args.tol)
    except Unclassifiable as exc:
        payload = {
            "error": "Unclassifiable",
            "message": str(exc),
            "misfit": exc.misfit if math.isfinite(exc.misfit) else None,
            "diagnostics": {k: v for k, v in exc.diagnostics.items() if _jsonable(v)},
        }
        raise MathFailure(payload) from exc
    return fit


def _jsonable(v) -> bool:
    if isinstance(v, float):
        return math.isfinite(v)
    return isinstance(v, (int, str, bool)) or v is None


def cmd_fit(args) -> int:
    fit = _run_fit(args)
    obj = fit.to_dict()
    _write_json(args.out, obj)
    params = obj["params"]
    detail = ""
    if params and "gamma" in params:
        detail = f" gamma={params['gamma']:.10g}"
    _emit(args, obj, f"case={obj['case']}{detail} fit_residual={obj['fit_residual']:.3e}")
    return EXIT_OK


def cmd_classify(args) -> int:
    fit = _run_fit(args)
    obj = {"case": fit.case.value, "fit_residual": fit.fit_residual}
    _write_json(args.out, obj)
    _emit(args, obj, fit.case.value)
    return EXIT_OK


def cmd_reduce(args) -> int:
    if not args.bundle:
        raise InputError("--bundle is required")
    obj, grids = io.read_bundle(args.bundle)
    system = _ghf_from_bundle(args.bundle, obj, grids)
    red, report = reduce_ghf(system, n=args.n)
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    ell = GridFunction.sample(red.ell, red.domain_i, args.n)
    H = GridFunction.sample(red.H, red.domain_i, args.n)
    radius = float(ell.values.max() - ell.values.min())
    g0 = GridFunction.sample(red.g0, Interval.closed(-radius, radius), args.n, interior=False)
    passed = report.passes(args.tol)
    extra = {
        "g_at_zero": red.g_at_zero,
        "domain_i": io.interval_to_json(red.domain_i),
        "f_consistency": report.to_dict(),
        "passed": passed,
    }
    bundle = io.write_bundle(
        os.path.join(out_dir, "reduced.json"), "triple_samples", {"ell": ell, "H": H, "g0": g0}, extra
    )
    summary = (
        f"{'PASS' if passed else 'FAIL'} reduce: I={red.domain_i!r} G(0)={red.g_at_zero:.10g} "
        f"F-consistency sup={report.sup_abs:.3e} at u={report.witness[0]:.6g}"
    )
    _emit(args, bundle, summary)
    return EXIT_OK if passed else EXIT_MATH


def cmd_lift(args) -> int:
    if not args.family:
        raise InputError("--family (a triple family JSON) is required")
    member = _load_family(args.family)
    if not isinstance(member, ClosedFormTriple):
        raise InputError("lift needs a triple family")
    if args.h:
        h = io.read_csv(args.h)
    elif args.h_poly:
        if not args.domain_j:
            raise InputError("--h-poly needs --domain-j LO,HI")
        try:
            coeffs = [float(c) for c in args.h_poly.split(",")]
        except ValueError as exc:
            raise InputError("--h-poly takes comma-separated coefficients, highest degree first") from exc
        h = GridFunction.sample(lambda x: np.polyval(coeffs, x), parse_domain(args.domain_j), args.n)
    else:
        raise InputError("give --h CSV or --h-poly with --domain-j")
    red = ReducedSystem(member.domain, member.ell, member.H, member.g0, args.g_at_zero)
    system = lift_g0h(red, h)
    h_used = system.h
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    extra = {
        "triple": io.family_to_json(member),
        "g_at_zero": args.g_at_zero,
        "domain_j": io.interval_to_json(system.domain_j),
    }
    bundle = io.write_bundle(os.path.join(out_dir, "lifted.json"), "ghf_lifted", {"h": h_used}, extra)
    _emit(args, bundle, f"lifted case={member.case.value} J={system.domain_j!r} G(0)={args.g_at_zero:g}")
    return EXIT_OK


def cmd_invariants(args) -> int:
    if args.family:
        member = _load_family(args.family)
        if isinstance(member, ClosedFormTriple):
            phi_fn, f_fn = member.weight_pair()
        elif isinstance(member, ClosedFormPair):
            phi_fn, f_fn = member.phi, member.f
        else:
            raise InputError("invariants need a pair or triple family")
        phi = GridFunction.sample(phi_fn, member.domain, args.n)
        f = GridFunction.sample(f_fn, member.domain, args.n)
    elif args.bundle:
        obj, grids = io.read_bundle(args.bundle)
        if obj.get("kind") != "pair_samples":
            raise InputError("invariants need a pair_samples bundle")
        phi, f = grids["phi"], grids["f"]
    elif args.phi and args.f:
        phi, f = io.read_csv(args.phi), io.read_csv(args.f)
    else:
        raise InputError("give --family, --bundle, or --phi and --f")
    report = invariant_report(phi, f)
    obj = report.to_dict()
    checks = report.wronskian_checks(args.tol)
    obj["wronskian_checks"] = checks
    obj["passed"] = all(checks.values()) and report.gamma_hat is not None
    _write_json(args.out, obj)
    g = "undefined" if report.gamma_hat is None else f"{report.gamma_hat:.10g}"
    summary = (
        f"{'PASS' if obj['passed'] else 'FAIL'} gamma_hat={g} lambda_hat={report.lambda_hat:.10g} "
        f"(rel dev {report.lambda_rel_dev:.2e}) step={report.step_used:g}"
    )
    _emit(args, obj, summary)
    return EXIT_OK if obj["passed"] else EXIT_MATH


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meaneq",
        description="Build, verify, fit and reduce solutions of the weighted mean functional equation.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output on stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make", parents=[common], help="construct a family and write samples")
    p.add_argument("--pair", nargs="+", metavar="K=V", help="a=.. b=.. c=.. d=.. gamma=..")
    p.add_argument("--triple", nargs="+", metavar="K=V", help="case=i..vii A= B= C= D= E= alpha= beta=")
    p.add_argument("--flat", nargs="+", metavar="K=V", help="support=LO,HI|none phi_const=V [tail_slope=S]")
    p.add_argument("--domain", help="open interval LO,HI (use --domain=-1,1 for negative LO)")
    p.add_argument("--n", type=int, default=101, help="number of samples (default 101)")
    p.add_argument("--out", help="output directory (default .)")
    p.set_defaults(func=cmd_make)

    p = sub.add_parser("verify", parents=[common], help="sweep a residual over a grid")
    p.add_argument("--eq", choices=("eq1", "g0h", "ghf"), default="eq1")
    p.add_argument("--family", help="family JSON")
    p.add_argument("--bundle", help="sample bundle JSON")
    p.add_argument("--tol", type=float, default=1e-9, help="pass iff sup <= tol*scale (default 1e-9)")
    p.add_argument("--n", type=int, default=101, help="grid size per axis (default 101)")
    p.add_argument("--invariants", action="store_true", help="also report differential invariants")
    p.add_argument("--inv-n", type=int, default=1001, help="samples for --invariants on a family")
    p.add_argument("--dump-grid", help="write the residual grid as CSV")
    p.add_argument("--spot", type=int, default=0, metavar="K", help="extra residual check at K random points")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the report JSON here")
    p.set_defaults(func=cmd_verify)

    for name, func, help_text in (
        ("fit", cmd_fit, "recover case and parameters from samples"),
        ("classify", cmd_classify, "report only the solution case of samples"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--bundle")
        p.add_argument("--phi")
        p.add_argument("--f")
        p.add_argument("--ell")
        p.add_argument("--H")
        p.add_argument("--g0")
        p.add_argument("--tol", type=float, default=1e-6, help="validation tolerance (default 1e-6)")
        p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("reduce", parents=[common], help="reduce a five-function system")
    p.add_argument("--bundle", help="ghf or ghf_lifted bundle")
    p.add_argument("--n", type=int, default=1001, help="samples of the reduced grids (default 1001)")
    p.add_argument("--tol", type=float, default=1e-9, help="F-consistency tolerance (default 1e-9)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("lift", parents=[common], help="lift a triple along a monotone h")
    p.add_argument("--family", help="triple family JSON")
    p.add_argument("--h", help="CSV grid of h")
    p.add_argument("--h-poly", help="polynomial coefficients of h, highest degree first")
    p.add_argument("--domain-j", help="J as LO,HI for --h-poly")
    p.add_argument("--g-at-zero", type=float, default=0.0)
    p.add_argument("--n", type=int, default=1001)
    p.add_argument("--out")
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("invariants", parents=[common], help="differential invariant report")
    p.add_argument("--family")
    p.add_argument("--bundle")
    p.add_argument("--phi")
    p.add_argument("--f")
    p.add_argument("--n", type=int, default=1001, help="samples when sampling a family (default 1001)")
    p.add_argument("--tol", type=float, default=1e-4, help="Wronskian tolerance relative to scale")
    p.add_argument("--out")
    p.set_defaults(func=cmd_invariants)
    return parser


def _error_object(exc: BaseException) -> dict:
    obj = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("witness", "condition", "point", "index"):
        value = getattr(exc, attr, None)
        if value is not None:
            obj[attr] = value
    return obj


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "n", 2) < 2:
        sys.stdout.write(io.dumps({"error": "InputError", "message": "--n must be at least 2"}))
        return EXIT_INPUT
    if getattr(args, "tol", 1.0) <= 0:
        sys.stdout.write(io.dumps({"error": "InputError", "message": "--tol must be positive"}))
        return EXIT_INPUT
    try:
        return args.func(args)
    except MathFailure as exc:
        sys.stdout.write(io.dumps(exc.payload))
        return EXIT_MATH
    except (InputError, MeanEqError, OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        sys.stdout.write(io.dumps(_error_object(exc)))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
