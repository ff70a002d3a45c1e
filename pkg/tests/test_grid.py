import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oplearn.grid import (
    FunctionSample,
    grids_overlap,
    make_uniform_grid,
    restrict,
    trapezoid_weights,
)


def test_uniform_grid_1d_nodes():
    g = make_uniform_grid(1, 5)
    assert g.points.shape == (5, 1)
    np.testing.assert_allclose(g.points[:, 0], [0.0, 0.25, 0.5, 0.75, 1.0])
    assert g.spacing == 0.25


def test_uniform_grid_2d_row_major():
    g = make_uniform_grid(2, 3)
    assert g.points.shape == (9, 2)
    # x varies slowest: node i*R + j is (x_i, y_j)
    np.testing.assert_allclose(g.points[0], [0.0, 0.0])
    np.testing.assert_allclose(g.points[1], [0.0, 0.5])
    np.testing.assert_allclose(g.points[3], [0.5, 0.0])
    np.testing.assert_allclose(g.points[8], [1.0, 1.0])


def test_grid_rejects_too_few_nodes():
    with pytest.raises(ValueError):
        make_uniform_grid(1, 1)


def test_trapezoid_weights_1d():
    g = make_uniform_grid(1, 5)
    w = trapezoid_weights(g).weights
    np.testing.assert_allclose(w, [0.125, 0.25, 0.25, 0.25, 0.125])
    assert w.sum() == pytest.approx(1.0)


def test_trapezoid_weights_2d_sum_to_one():
    g = make_uniform_grid(2, 7)
    w = trapezoid_weights(g).weights
    assert w.sum() == pytest.approx(1.0)
    # corner weight is (h/2)^2
    assert w[0] == pytest.approx((g.spacing / 2) ** 2)


def test_quadrature_exact_for_linear():
    # trapezoid integrates piecewise-linear functions exactly
    g = make_uniform_grid(1, 9)
    w = trapezoid_weights(g).weights
    vals = 3.0 * g.points[:, 0] + 2.0
    assert float(w @ vals) == pytest.approx(3.0 / 2 + 2.0, abs=1e-14)


def test_quadrature_exact_for_bilinear_2d():
    g = make_uniform_grid(2, 6)
    w = trapezoid_weights(g).weights
    x, y = g.points[:, 0], g.points[:, 1]
    vals = x * y
    assert float(w @ vals) == pytest.approx(0.25, abs=1e-14)


def test_quadrature_second_order_convergence():
    # error for a smooth integrand should shrink ~4x when h halves
    def err(R):
        g = make_uniform_grid(1, R)
        w = trapezoid_weights(g).weights
        vals = np.exp(g.points[:, 0])
        return abs(float(w @ vals) - (np.e - 1.0))

    e1, e2 = err(33), err(65)
    assert 3.5 < e1 / e2 < 4.5


def test_quadrature_second_order_convergence_2d():
    def err(R):
        g = make_uniform_grid(2, R)
        w = trapezoid_weights(g).weights
        vals = np.sin(np.pi * g.points[:, 0]) * np.sin(np.pi * g.points[:, 1])
        return abs(float(w @ vals) - (2.0 / np.pi) ** 2)

    e1, e2 = err(17), err(33)
    assert 3.5 < e1 / e2 < 4.5


def test_function_sample_validates_shape():
    g = make_uniform_grid(1, 5)
    with pytest.raises(ValueError):
        FunctionSample(g, np.zeros(4))
    with pytest.raises(ValueError):
        FunctionSample(g, np.array([1.0, 2.0, np.nan, 0.0, 0.0]))


def test_grids_overlap_examples():
    assert grids_overlap(51, 101)
    assert grids_overlap(101, 51)
    assert grids_overlap(51, 26)
    assert grids_overlap(65, 1025)
    assert not grids_overlap(65, 201)
    assert not grids_overlap(51, 65)
    assert grids_overlap(9, 9)


@given(st.integers(2, 60), st.integers(1, 6))
def test_grids_overlap_with_refinement(r, k):
    # a k-fold refinement always overlaps, and overlap is symmetric
    fine = (r - 1) * k + 1
    assert grids_overlap(r, fine)
    assert grids_overlap(fine, r)


def test_restrict_extracts_shared_nodes():
    fine = make_uniform_grid(1, 9)
    vals = np.sin(fine.points[:, 0])
    s = FunctionSample(fine, vals)
    coarse = restrict(s, make_uniform_grid(1, 5))
    np.testing.assert_allclose(coarse.values, vals[::2])


def test_restrict_2d():
    fine = make_uniform_grid(2, 5)
    vals = fine.points[:, 0] + 10 * fine.points[:, 1]
    coarse = restrict(FunctionSample(fine, vals), make_uniform_grid(2, 3))
    g3 = make_uniform_grid(2, 3)
    np.testing.assert_allclose(coarse.values, g3.points[:, 0] + 10 * g3.points[:, 1])


def test_restrict_rejects_non_nested():
    s = FunctionSample(make_uniform_grid(1, 9), np.zeros(9))
    with pytest.raises(ValueError):
        restrict(s, make_uniform_grid(1, 6))


@settings(max_examples=25)
@given(st.integers(2, 10), st.integers(2, 5))
def test_restrict_consistent_with_direct_sampling(rc, k):
    rf = (rc - 1) * k + 1
    fine = make_uniform_grid(1, rf)
    vals = np.cos(3 * fine.points[:, 0])
    out = restrict(FunctionSample(fine, vals), make_uniform_grid(1, rc))
    direct = np.cos(3 * make_uniform_grid(1, rc).points[:, 0])
    np.testing.assert_allclose(out.values, direct, atol=1e-12)
