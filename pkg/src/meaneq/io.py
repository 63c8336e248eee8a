"""JSON and CSV serialization.

Floats are written in Python's shortest round-trip form, so every binary64
value survives a write/read cycle exactly. Infinite interval endpoints are
encoded as the strings ``"-inf"`` and ``"inf"``.
"""

from __future__ import annotations

import csv
import json
import math
import os
from typing import Optional

import numpy as np

from ._validation import check_uniform_grid
from .families import (
    ClosedFormPair,
    ClosedFormTriple,
    FlatPair,
    PairParams,
    TripleCase,
    TripleParams,
    build_flat_pair,
    build_pair,
    build_triple,
)
from .functions import GridFunction
from .intervals import Interval, IntervalUnion

__all__ = [
    "dumps",
    "interval_to_json",
    "interval_from_json",
    "union_to_json",
    "union_from_json",
    "family_to_json",
    "family_from_json",
    "grid_to_json",
    "grid_from_json",
    "write_csv",
    "read_csv",
    "write_bundle",
    "read_bundle",
]


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _num_out(v: float):
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _num_in(v) -> float:
    if isinstance(v, str):
        if v in ("inf", "+inf", "-inf"):
            return float(v)
        raise ValueError(f"unexpected string endpoint {v!r}")
    return float(v)


def interval_to_json(iv: Interval) -> dict:
    return {
        "lo": _num_out(iv.lo),
        "hi": _num_out(iv.hi),
        "lo_closed": bool(iv.lo_closed),
        "hi_closed": bool(iv.hi_closed),
    }


def interval_from_json(obj: dict) -> Interval:
    return Interval(
        _num_in(obj["lo"]),
        _num_in(obj["hi"]),
        bool(obj.get("lo_closed", False)),
        bool(obj.get("hi_closed", False)),
    )


def union_to_json(u: IntervalUnion) -> list:
    return [interval_to_json(p) for p in u.parts]


def union_from_json(items: list) -> IntervalUnion:
    return IntervalUnion(tuple(interval_from_json(i) for i in items))


def grid_to_json(g: GridFunction) -> dict:
    return {"x0": g.x0, "step": g.step, "n": g.n, "values": [float(v) for v in g.values]}


def grid_from_json(obj: dict) -> GridFunction:
    values = obj["values"]
    if "n" in obj and int(obj["n"]) != len(values):
        raise ValueError("grid length does not match n")
    return GridFunction(float(obj["x0"]), float(obj["step"]), values)


def family_to_json(member) -> dict:
    if isinstance(member, ClosedFormPair):
        return {
            "kind": "pair",
            "params": member.params.as_dict(),
            "domain": interval_to_json(member.domain),
        }
    if isinstance(member, ClosedFormTriple):
        out = {
            "kind": "triple",
            "params": member.params.as_dict(),
            "domain": interval_to_json(member.domain),
        }
        if member.case is TripleCase.I and isinstance(member.ell, GridFunction):
            out["ell"] = grid_to_json(member.ell)
        return out
    if isinstance(member, FlatPair):
        out = {
            "kind": "flat",
            "params": {
                "phi_const": member.phi_const,
                "support": None if member.support is None else interval_to_json(member.support),
            },
            "domain": interval_to_json(member.domain),
        }
        for key, fn in (("f_support", member.f_support), ("phi_tail", member.phi_tail)):
            if isinstance(fn, GridFunction):
                out[key] = grid_to_json(fn)
            elif isinstance(fn, dict):
                out[key] = fn
        return out
    raise TypeError(f"cannot serialize {type(member).__name__}")


def _flat_piece(spec):
    """Rebuild a flat-pair component from its JSON form."""
    if spec is None:
        return None
    if "values" in spec:
        return grid_from_json(spec)
    kind = spec.get("kind")
    if kind == "poly":
        coeffs = [float(c) for c in spec["coeffs"]]
        return lambda x: np.polyval(coeffs, x)
    if kind == "ramp":
        # value + slope * (distance to [lo, hi])
        value, slope = float(spec["value"]), float(spec["slope"])
        lo, hi = float(spec["lo"]), float(spec["hi"])
        return lambda x: value + slope * np.maximum(np.maximum(lo - x, x - hi), 0.0)
    raise ValueError(f"unknown function spec {spec!r}")


def family_from_json(obj: dict):
    kind = obj.get("kind")
    domain = interval_from_json(obj["domain"])
    if kind == "pair":
        return build_pair(PairParams(**obj["params"]), domain)
    if kind == "triple":
        ell = grid_from_json(obj["ell"]) if obj.get("ell") else None
        return build_triple(TripleParams(**obj["params"]), domain, ell=ell)
    if kind == "flat":
        params = obj["params"]
        support = interval_from_json(params["support"]) if params.get("support") else None
        member = build_flat_pair(
            domain,
            support,
            params["phi_const"],
            f_support=_flat_piece(obj.get("f_support")),
            phi_tail=_flat_piece(obj.get("phi_tail")),
        )
        # keep the declarative specs so the member serializes back unchanged
        for key in ("f_support", "phi_tail"):
            spec = obj.get(key)
            if spec is not None and "values" not in spec:
                setattr(member, key, _SpecFn(_flat_piece(spec), spec))
        return member
    raise ValueError(f"unknown family kind {kind!r}")


class _SpecFn(dict):
    """A callable that remembers the JSON spec it was built from."""

    def __init__(self, fn, spec):
        super().__init__(spec)
        self._fn = fn

    def __call__(self, x):
        return self._fn(x)


def write_csv(path: str, g: GridFunction) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("x,value\n")
        for x, v in zip(g.x, g.values):
            fh.write(f"{float(x)!r},{float(v)!r}\n")


def read_csv(path: str) -> GridFunction:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["x", "value"]:
            raise ValueError(f"{path}: expected header 'x,value'")
        xs, vs = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 columns")
            xs.append(float(row[0]))
            vs.append(float(row[1]))
    if not xs:
        raise ValueError(f"{path}: no samples")
    if len(xs) == 1:
        raise ValueError(f"{path}: need at least 2 samples")
    x0, step = check_uniform_grid(xs)
    return GridFunction(x0, step, vs)


def write_bundle(path: str, kind: str, grids: dict, extra: Optional[dict] = None) -> dict:
    """Write ``grids`` as CSV files next to a JSON bundle at ``path``."""
    base = os.path.dirname(os.path.abspath(path))
    stem = os.path.splitext(os.path.basename(path))[0]
    entries = []
    for name, g in grids.items():
        csv_name = f"{stem}.{name}.csv" if stem not in ("", name) else f"{name}.csv"
        write_csv(os.path.join(base, csv_name), g)
        entries.append({"name": name, "x0": g.x0, "step": g.step, "n": g.n, "csv_path": csv_name})
    obj = {"kind": kind, "grids": entries}
    if extra:
        obj.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))
    return obj


def read_bundle(path: str) -> tuple[dict, dict]:
    """Return ``(bundle_json, {name: GridFunction})``."""
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    base = os.path.dirname(os.path.abspath(path))
    grids = {}
    for entry in obj.get("grids", []):
        g = read_csv(os.path.join(base, entry["csv_path"]))
        if g.n != int(entry["n"]):
            raise ValueError(f"{entry['csv_path']}: expected {entry['n']} samples, found {g.n}")
        x0, step = float(entry["x0"]), float(entry["step"])
        if abs(g.x0 - x0) > 1e-9 * step or abs(g.step - step) > 1e-9 * step:
            raise ValueError(f"{entry['csv_path']}: nodes disagree with the bundle's x0/step")
        # the bundle carries the exact node parameters
        grids[entry["name"]] = GridFunction(x0, step, g.values)
    return obj, grids
