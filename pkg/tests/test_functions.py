import numpy as np
import pytest

from meaneq._validation import as_grid, check_aligned, check_uniform_grid
from meaneq.exceptions import DomainMismatch, OutOfDomain
from meaneq.functions import GridFunction, RealFunction, interior_grid
from meaneq.intervals import Interval


def test_grid_function_invariants():
    with pytest.raises(ValueError):
        GridFunction(0.0, 0.0, [1.0])
    with pytest.raises(ValueError):
        GridFunction(0.0, 0.1, [])
    g = GridFunction(1.0, 0.5, [1, 2, 3])
    assert g.domain == Interval.closed(1.0, 2.0)
    assert g.open_domain == Interval.open(0.75, 2.25)
    assert not g.values.flags.writeable


def test_grid_function_interpolates_and_is_exact_at_nodes():
    g = GridFunction(0.0, 0.5, [0.0, 1.0, 4.0])
    assert g(0.5) == 1.0
    assert g(0.75) == 2.5
    with pytest.raises(OutOfDomain):
        g(1.5)
    with pytest.raises(ValueError):
        g(0.5, 1)


def test_cubic_interpolation_reproduces_cubics():
    x = np.linspace(0, 1, 21)
    g = GridFunction(0.0, 0.05, x**3, interpolation="cubic")
    t = np.linspace(0.1, 0.9, 7)
    np.testing.assert_allclose(g(t), t**3, atol=1e-4)


def test_sample_interior_grid_offsets_half_step():
    x0, step = interior_grid(Interval.open(0, 1), 4)
    assert (x0, step) == (0.125, 0.25)
    g = GridFunction.sample(np.sin, Interval.open(0, 1), 4)
    np.testing.assert_array_equal(g.values, np.sin(g.x))
    closed = GridFunction.sample(np.sin, Interval.open(0, 1), 5, interior=False)
    assert closed.x0 == 0.0 and closed.x_end == 1.0


def test_crop_and_alignment():
    g = GridFunction(0.0, 0.1, np.arange(10.0))
    c = g.crop(2, 5)
    assert c.x0 == pytest.approx(0.2) and c.n == 3
    assert g.aligned_with(g.with_values(np.zeros(10)))
    assert not g.aligned_with(c)
    with pytest.raises(DomainMismatch):
        check_aligned(g, c)


def test_real_function_domain_and_derivatives():
    fn = RealFunction(np.exp, Interval.open(0, 1), deriv=lambda x, k: np.exp(x), name="exp")
    assert fn(0.5) == pytest.approx(np.exp(0.5))
    assert fn(0.5, 3) == pytest.approx(np.exp(0.5))
    with pytest.raises(OutOfDomain):
        fn(1.0)
    with pytest.raises(ValueError):
        RealFunction(np.exp)(0.5, 1)


def test_uniform_grid_check():
    assert check_uniform_grid([0.0, 0.5, 1.0]) == (0.0, 0.5)
    with pytest.raises(ValueError):
        check_uniform_grid([0.0, 0.5, 1.1])
    g = as_grid([0.0, 0.5, 1.0], [1, 2, 3])
    assert g.n == 3
