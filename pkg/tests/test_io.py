import json

import numpy as np
import pytest
from draws import random_flat, random_pair, random_triple

from meaneq import io
from meaneq.functions import GridFunction
from meaneq.intervals import Interval, IntervalUnion


def test_csv_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    g = GridFunction(0.1, 1 / 3, rng.standard_normal(50) * 10.0 ** rng.integers(-300, 300, 50))
    path = tmp_path / "g.csv"
    io.write_csv(str(path), g)
    back = io.read_csv(str(path))
    np.testing.assert_array_equal(back.values, g.values)
    assert back.n == g.n and back.step == pytest.approx(g.step, rel=1e-12)


def test_csv_rejects_bad_files(tmp_path):
    cases = {
        "header.csv": "t,v\n0,1\n1,2\n",
        "cols.csv": "x,value\n0,1,2\n",
        "one.csv": "x,value\n0,1\n",
        "empty.csv": "",
        "ragged.csv": "x,value\n0,1\n0.5,1\n1.7,1\n",
    }
    for name, text in cases.items():
        p = tmp_path / name
        p.write_text(text)
        with pytest.raises(ValueError):
            io.read_csv(str(p))


def test_bundle_round_trip_keeps_node_parameters(tmp_path):
    grids = {"phi": GridFunction(0.005, 0.01, np.sin(np.arange(100))), "f": GridFunction(0.005, 0.01, np.ones(100))}
    obj = io.write_bundle(str(tmp_path / "b.json"), "pair_samples", grids, {"family": "family.json"})
    assert {e["csv_path"] for e in obj["grids"]} == {"b.phi.csv", "b.f.csv"}
    back_obj, back = io.read_bundle(str(tmp_path / "b.json"))
    assert back_obj == obj
    for name, g in grids.items():
        assert back[name].x0 == g.x0 and back[name].step == g.step
        np.testing.assert_array_equal(back[name].values, g.values)


def test_bundle_detects_tampered_grid(tmp_path):
    grids = {"f": GridFunction(0.0, 0.5, [1.0, 2.0, 3.0])}
    io.write_bundle(str(tmp_path / "b.json"), "pair_samples", grids)
    (tmp_path / "b.f.csv").write_text("x,value\n0.0,1\n0.5,2\n")
    with pytest.raises(ValueError):
        io.read_bundle(str(tmp_path / "b.json"))


def test_interval_json_infinite_sentinels():
    iv = Interval(-np.inf, 2.0, False, True)
    obj = io.interval_to_json(iv)
    assert obj["lo"] == "-inf"
    assert io.interval_from_json(json.loads(io.dumps(obj))) == iv
    u = IntervalUnion([Interval.open(0, 1), Interval.closed(2, 3)])
    assert io.union_from_json(io.union_to_json(u)) == u
    with pytest.raises(ValueError):
        io.interval_from_json({"lo": "nope", "hi": 1})


def test_grid_json_round_trip_and_length_check():
    g = GridFunction(0.0, 0.25, [0.1, 0.2, 0.3])
    assert io.grid_from_json(io.grid_to_json(g)).values.tolist() == [0.1, 0.2, 0.3]
    with pytest.raises(ValueError):
        io.grid_from_json({"x0": 0, "step": 1, "n": 4, "values": [1, 2]})


def test_dumps_is_canonical():
    assert io.dumps({"b": 1, "a": [0.1]}) == '{\n  "a": [\n    0.1\n  ],\n  "b": 1\n}\n'
    with pytest.raises(ValueError):
        io.dumps({"x": float("nan")})


@pytest.mark.parametrize("seed", range(5))
def test_family_json_round_trip(seed):
    rng = np.random.default_rng(seed)
    members = [random_pair(rng, s) for s in (-1, 0, 1)]
    members += [random_triple(rng, c) for c in ("i", "ii", "v", "vii")]
    for m in members:
        obj = io.family_to_json(m)
        again = io.family_from_json(json.loads(io.dumps(obj)))
        assert io.family_to_json(again) == obj
        x = np.linspace(float(m.domain.lo), float(m.domain.hi), 9)[1:-1]
        if hasattr(m, "phi"):
            np.testing.assert_array_equal(again.phi(x), m.phi(x))
        else:
            np.testing.assert_array_equal(again.H(x), m.H(x))
    # flat members built from declarative specs survive unchanged
    obj = {
        "kind": "flat",
        "domain": io.interval_to_json(Interval.open(0, 2)),
        "params": {"phi_const": 1.5, "support": io.interval_to_json(Interval.open(0.5, 1))},
        "f_support": {"kind": "poly", "coeffs": [-1.0, 1.5, -0.5]},
        "phi_tail": {"kind": "ramp", "value": 1.5, "slope": 2.0, "lo": 0.25, "hi": 1.5},
    }
    member = io.family_from_json(obj)
    assert io.family_to_json(member) == obj
    assert member.phi(1.75) == 2.0


def test_family_json_rejects_unknown_kinds():
    with pytest.raises(ValueError):
        io.family_from_json({"kind": "quad", "domain": {"lo": 0, "hi": 1}})
    with pytest.raises(TypeError):
        io.family_to_json(random_flat(np.random.default_rng(0)).domain)
