import math

import numpy as np
import pytest
from draws import random_pair
from hypothesis import given, settings
from hypothesis import strategies as st

from meaneq.calculus import finite_diff, invariant_report, stencil, wronskian
from meaneq.exceptions import FNearZero, TooFewPoints
from meaneq.families import PairParams, build_pair
from meaneq.functions import GridFunction
from meaneq.intervals import Interval

O = Interval.open
seeds = st.integers(0, 2**32 - 1)


def grid(fn, lo, hi, step):
    n = int(round((hi - lo) / step)) + 1
    x = lo + step * np.arange(n)
    return GridFunction(lo, step, fn(x))


def sample_pair(pair, step=1e-3):
    L = float(pair.domain.hi - pair.domain.lo)
    n = int(round(L / step))
    phi = GridFunction.sample(pair.phi, pair.domain, n)
    f = GridFunction.sample(pair.f, pair.domain, n)
    return phi, f


# ---------------------------------------------------------------------------
# finite_diff


def test_first_derivative_of_line_is_one():
    d = finite_diff(grid(lambda x: 3 * x - 1, -1, 1, 0.01), 1)
    np.testing.assert_allclose(d.values, 3.0, rtol=1e-12)
    d1 = finite_diff(grid(lambda x: x, 0, 1, 0.01), 1)
    np.testing.assert_allclose(d1.values, 1.0, rtol=1e-12)


def test_second_derivative_of_square_is_two():
    d = finite_diff(grid(lambda x: x**2, 0, 1, 0.01), 2)
    np.testing.assert_allclose(d.values, 2.0, atol=1e-9)
    assert d.n == 99 and d.x0 == pytest.approx(0.01)


def test_fourth_derivative_of_sin():
    # the plain three-point stencil has roundoff eps/h^4 ~ 1e-3 at this step,
    # so the higher-accuracy stencil with a wider stride is used
    f = grid(np.sin, 0, 1, 1e-3)
    d = finite_diff(f, 4, accuracy=6, stride=10)
    assert np.max(np.abs(d.values - np.sin(d.x))) <= 5e-6


def test_too_few_points():
    with pytest.raises(TooFewPoints):
        finite_diff(GridFunction(0.0, 0.1, [1, 2, 3, 4]), 4)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.sampled_from([2, 4, 6]), st.lists(st.integers(-3, 3), min_size=1, max_size=8))
def test_stencils_exact_on_low_degree_polynomials(order, acc, coeffs):
    # exact (up to rounding) on polynomials of degree < order + acc
    deg = order + acc - 1
    coeffs = (coeffs + [0] * deg)[: deg + 1]
    f = grid(lambda x: np.polyval(coeffs, x), -1, 1, 0.125)
    d = finite_diff(f, order, accuracy=acc)
    exact = np.polyval(np.polyder(coeffs, order), d.x) if len(coeffs) > order else 0 * d.x
    scale = max(1.0, float(np.max(np.abs(f.values)))) / 0.125**order
    assert np.max(np.abs(d.values - exact)) <= 1e-11 * scale


def test_stencil_weights_known_values():
    radius, w = stencil(2, 2)
    assert radius == 1
    np.testing.assert_array_equal(w, [1, -2, 1])
    radius, w = stencil(1, 4)
    np.testing.assert_allclose(w, [1 / 12, -2 / 3, 0, 2 / 3, -1 / 12], rtol=1e-15)


# ---------------------------------------------------------------------------
# wronskian


def test_wronskian_equal_orders_vanish():
    f, g = grid(np.sin, 0, 1, 0.01), grid(np.exp, 0, 1, 0.01)
    assert np.all(wronskian(f, g, 2, 2).values == 0)
    pair = build_pair(PairParams(1, 2, 3, 1, -1), O(0, 0.5))
    assert np.all(wronskian(pair.f, pair.g, 1, 1, at=np.linspace(0.1, 0.4, 5)) == 0)


def test_wronskian_sin_cos():
    x = np.linspace(0, 1, 1001)
    f, g = GridFunction(0, 1e-3, np.sin(x)), GridFunction(0, 1e-3, np.cos(x))
    w = wronskian(f, g, 0, 1, accuracy=4)
    np.testing.assert_allclose(w.values, -1.0, atol=1e-10)
    pair = build_pair(PairParams(1, 0, 0, 1, -1), O(0.1, 1))
    np.testing.assert_allclose(wronskian(pair.f, pair.g, 0, 1, at=x[200:900]), -1.0, atol=1e-15)


def test_wronskian_x_and_one():
    f = grid(lambda x: x, 0, 1, 0.01)
    g = f.with_values(np.ones(f.n))
    np.testing.assert_allclose(wronskian(f, g, 0, 1).values, -1.0, rtol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 4), st.integers(0, 4), seeds)
def test_wronskian_antisymmetric(k, l, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.uniform(-2, 2, 2)
    f = grid(lambda x: np.sin(a * x) + x, 0, 1, 0.01)
    g = grid(lambda x: np.cos(b * x), 0, 1, 0.01)
    assert np.array_equal(wronskian(f, g, k, l).values, -wronskian(f, g, l, k).values)


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from([-1, 0, 1]))
def test_derivative_of_wronskian_identities(seed, sign):
    # (W01)' = W02 and (W12)' = W13 hold for any smooth f, g
    rng = np.random.default_rng(seed)
    c = rng.uniform(0.5, 2, 3)
    step = 2e-3
    f = grid(lambda x: np.exp(c[0] * x) + sign * x**3, 0, 1, step)
    g = grid(lambda x: np.sin(c[1] * x) + c[2], 0, 1, step)
    for (k, l), (k2, l2) in (((0, 1), (0, 2)), ((1, 2), (1, 3))):
        w = wronskian(f, g, k, l, accuracy=6)
        dw = finite_diff(w, 1, accuracy=6)
        target = wronskian(f, g, k2, l2, accuracy=6)
        off = int(round((dw.x0 - target.x0) / step))
        t = target.values[off : off + dw.n]
        scale = max(1.0, float(np.max(np.abs(t))))
        assert np.max(np.abs(dw.values - t)) <= 1e-4 * scale


# ---------------------------------------------------------------------------
# invariant_report


def test_invariants_affine_symbolic_oracle():
    # f = 1, g = x: W01 = 1, W12 = 0, phi' f^2 = 1
    pair = build_pair(PairParams(1, 0, 0, 1, 0), O(0, 1))
    rep = invariant_report(*sample_pair(pair))
    assert rep.lambda_hat == pytest.approx(1.0, abs=1e-9)
    assert rep.alpha_hat == pytest.approx(1.0, abs=1e-9)
    assert rep.beta_hat == pytest.approx(0.0, abs=1e-9)
    assert rep.gamma_hat == pytest.approx(0.0, abs=1e-4)
    assert rep.step_used == pytest.approx(1e-3)


def test_invariants_hyperbolic_gamma():
    pair = build_pair(PairParams(1, 0, 0, 1, 4), O(0.1, 1.1))
    rep = invariant_report(*sample_pair(pair))
    assert abs(rep.gamma_hat - 4) <= 1e-4 * 4
    # analytic oracle: W01 = sinh(2x) 2 sinh(2x) - cosh(2x) 2 cosh(2x) = -2
    assert rep.alpha_hat == pytest.approx(-2.0, rel=1e-8)
    assert all(rep.wronskian_checks().values())


def test_invariants_reject_zero_of_f():
    x = np.linspace(-0.5, 0.5, 101)
    f = GridFunction(-0.5, 0.01, x)
    phi = f.with_values(np.ones(101))
    with pytest.raises(FNearZero) as exc:
        invariant_report(phi, f)
    assert exc.value.witness == pytest.approx(0.0, abs=1e-12)


def test_invariants_gamma_absent_when_alpha_vanishes():
    # g proportional to f gives W01 = 0
    f = grid(lambda x: np.exp(x), 0, 1, 1e-3)
    phi = f.with_values(np.full(f.n, 2.0))
    rep = invariant_report(phi, f)
    assert rep.gamma_hat is None


def test_invariant_report_json():
    pair = build_pair(PairParams(1, 0.5, 0, 1, -2), O(0, 1))
    rep = invariant_report(*sample_pair(pair, 2e-3))
    obj = rep.to_dict()
    for key in ("lambda_hat", "alpha_dev", "dev_w13", "step_used", "strides", "lambda_rel_dev"):
        assert key in obj
    assert rep.to_json().startswith("{")


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from([-1, 0, 1]))
def test_invariants_on_random_pairs(seed, sign):
    pair = random_pair(np.random.default_rng(seed), sign)
    rep = invariant_report(*sample_pair(pair))
    gamma = pair.params.gamma
    assert rep.gamma_hat is not None
    err = abs(rep.gamma_hat - gamma)
    assert err <= (1e-4 * abs(gamma) if gamma else 1e-4)
    assert rep.lambda_rel_dev <= 1e-6
    assert all(rep.wronskian_checks(1e-4).values())
    assert rep.alpha_dev <= 1e-6 * rep.scales["w01"]
    assert math.isfinite(rep.beta_hat)
