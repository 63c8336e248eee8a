import numpy as np
import pytest
from draws import random_triple, sample_pair, sample_triple
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from meaneq.estimators import PairSolutionClassifier, TripleSolutionClassifier
from meaneq.families import PairCase, PairParams, build_pair
from meaneq.intervals import Interval


def pair_xy(params, domain):
    phi, f = sample_pair(build_pair(params, domain))
    return phi.x, np.column_stack([phi.values, f.values])


def test_pair_estimator_fit_predict_score():
    X, y = pair_xy(PairParams(1, 0.5, 0.2, 1, -3), Interval.open(0, 1))
    est = PairSolutionClassifier().fit(X, y)
    assert est.case_ is PairCase.TRIG
    assert est.gamma_ == pytest.approx(-3, rel=1e-4)
    assert est.predict(X[:, None]).shape == (X.size, 2)
    # f is recovered up to scale, so score phi only
    assert -est.score(X, np.column_stack([y[:, 0], est.predict(X)[:, 1]])) <= 1e-6


def test_pair_estimator_flat_predict():
    X = np.linspace(0, 1, 201)
    y = np.column_stack([np.full_like(X, 2.5), 1 + X])
    est = PairSolutionClassifier().fit(X, y)
    assert est.case_ is PairCase.FLAT and est.params_ is None
    np.testing.assert_allclose(est.predict(X), y, rtol=1e-12)


def test_estimators_require_fit():
    with pytest.raises(NotFittedError):
        PairSolutionClassifier().predict([0.1, 0.2])
    with pytest.raises(NotFittedError):
        TripleSolutionClassifier().predict_g0([0.0])


def test_estimator_params_and_clone():
    est = PairSolutionClassifier(tol=1e-5)
    assert est.get_params() == {"tol": 1e-5}
    twin = clone(est.set_params(tol=1e-4))
    assert twin.tol == 1e-4 and not hasattr(twin, "fit_")
    assert TripleSolutionClassifier().get_params() == {"tol": 1e-6}


def test_pair_estimator_rejects_bad_shapes():
    with pytest.raises(ValueError):
        PairSolutionClassifier().fit(np.linspace(0, 1, 5), np.zeros((5, 3)))
    with pytest.raises(ValueError):
        PairSolutionClassifier().fit(np.zeros((5, 2)), np.zeros((5, 2)))


def test_triple_estimator_round_trip():
    t = random_triple(np.random.default_rng(3), "vi")
    g0, ell, H = sample_triple(t)
    est = TripleSolutionClassifier().fit(ell.x, np.column_stack([ell.values, H.values]), g0=(g0.x, g0.values))
    assert est.case_.value == "vi"
    pred = est.predict(ell.x)
    np.testing.assert_allclose(pred[:, 0], ell.values, atol=1e-4 * max(1, np.max(np.abs(ell.values))))
    u = g0.x[est.member_.g0_domain.contains(g0.x)]
    np.testing.assert_allclose(est.predict_g0(u), t.g0(u), atol=1e-4 * max(1, np.max(np.abs(g0.values))))
    with pytest.raises(ValueError):
        TripleSolutionClassifier().fit(ell.x, np.column_stack([ell.values, H.values]))
