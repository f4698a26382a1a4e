"""Operator plumbing and the pivoted least-squares kernel."""

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from angmres import LinearOperator, solve_lsq_min_norm, two_norm
from angmres.problems import circulant_shift_matrix, laplacian_2d


def test_identity_apply():
    op = LinearOperator.identity(3)
    np.testing.assert_array_equal(op.apply(np.array([1.0, 2.0, 3.0])), [1.0, 2.0, 3.0])


def test_circulant_shift_apply():
    op = LinearOperator.from_dense(circulant_shift_matrix(3))
    np.testing.assert_array_equal(op.apply(np.array([1.0, 0.0, 0.0])), [0.0, 1.0, 0.0])


def test_laplacian_matvec_matches_stencil():
    # brute-force 5-point stencil with zero Dirichlet data on a 4x4 grid
    prob = laplacian_2d(4, u0_policy="zero")
    rng = np.random.default_rng(7)
    v = rng.standard_normal(16)
    grid = v.reshape(4, 4)
    out = np.zeros((4, 4))
    for i in range(4):
        for j in range(4):
            acc = 4.0 * grid[i, j]
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                ii, jj = i + di, j + dj
                if 0 <= ii < 4 and 0 <= jj < 4:
                    acc -= grid[ii, jj]
            out[i, j] = acc
    np.testing.assert_allclose(prob.op.apply(v), out.ravel(), rtol=0, atol=1e-13)


def test_laplacian_row_sums_vanish_away_from_boundary():
    prob = laplacian_2d(5, u0_policy="zero")
    out = prob.op.apply(np.ones(25)).reshape(5, 5)
    np.testing.assert_allclose(out[1:-1, 1:-1], 0.0, rtol=0, atol=1e-14)
    assert (out[0] > 0).all() and (out[-1] > 0).all()
    assert (out[:, 0] > 0).all() and (out[:, -1] > 0).all()


def test_lsq_single_column_exact_fit():
    sol = solve_lsq_min_norm(np.array([[1.0], [0.0]]), np.array([-2.0, 0.0]))
    np.testing.assert_allclose(sol.coefficients, [2.0], rtol=0, atol=1e-14)
    assert sol.effective_rank == 1
    assert sol.residual_norm <= 1e-14


def test_lsq_duplicate_columns_truncate_to_one_coefficient():
    col = np.array([1.0, 2.0, -1.0, 0.5])
    d = np.column_stack([col, col])
    rhs = -3.0 * col
    sol = solve_lsq_min_norm(d, rhs)
    assert sol.effective_rank == 1
    assert np.count_nonzero(sol.coefficients) == 1
    assert sol.residual_norm <= 1e-12
    # the pseudo-inverse reaches the same zero minimum on the same data
    c_ref = -np.linalg.pinv(d) @ rhs
    assert two_norm(rhs + d @ c_ref) <= 1e-12


def test_lsq_residual_matches_normal_equations():
    rng = np.random.default_rng(3)
    d = rng.standard_normal((6, 3))
    rhs = rng.standard_normal(6)
    c_ref = np.linalg.solve(d.T @ d, -d.T @ rhs)
    oracle = two_norm(rhs + d @ c_ref)
    sol = solve_lsq_min_norm(d, rhs)
    assert abs(sol.residual_norm - oracle) <= 1e-10 * oracle


def test_lsq_zero_matrix_signals_stagnation():
    sol = solve_lsq_min_norm(np.zeros((4, 2)), np.array([1.0, 0.0, 0.0, 0.0]))
    assert sol.effective_rank == 0
    np.testing.assert_array_equal(sol.coefficients, [0.0, 0.0])
    assert sol.residual_norm == pytest.approx(1.0)


def test_lsq_input_validation():
    with pytest.raises(ValueError):
        solve_lsq_min_norm(np.ones((3, 1)), np.ones(3), rank_tol=0.0)
    with pytest.raises(ValueError):
        solve_lsq_min_norm(np.ones((3, 0)), np.ones(3))
    with pytest.raises(ValueError):
        solve_lsq_min_norm(np.array([[np.inf], [1.0]]), np.ones(2))


def test_two_norm_reference_values():
    assert two_norm(np.zeros(3)) == 0.0
    assert two_norm(np.array([3.0, 4.0])) == 5.0
    assert two_norm(np.ones(36)) == 6.0


def test_two_norm_overflow_safe():
    v = np.array([1e200, 1e200])
    assert two_norm(v) == pytest.approx(np.sqrt(2.0) * 1e200, rel=1e-12)


def test_operator_validates_shapes_and_entries():
    with pytest.raises(ValueError):
        LinearOperator.from_dense(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        LinearOperator.from_dense(np.ones((2, 3)))
    op = LinearOperator.identity(3)
    with pytest.raises(ValueError):
        op.apply(np.ones(4))


@st.composite
def lsq_instances(draw):
    n = draw(st.integers(1, 50))
    w = draw(st.integers(1, min(8, n)))
    seed = draw(st.integers(0, 2**31 - 1))
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, w)), rng.standard_normal(n)


@given(lsq_instances())
@settings(max_examples=60, deadline=None)
def test_lsq_at_least_as_good_as_zero_coefficients(instance):
    d, rhs = instance
    sol = solve_lsq_min_norm(d, rhs)
    assert sol.residual_norm <= two_norm(rhs) * (1.0 + 1e-10)


@given(lsq_instances())
@settings(max_examples=60, deadline=None)
def test_lsq_agrees_with_normal_equations(instance):
    d, rhs = instance
    cond = np.linalg.cond(d)
    assume(np.isfinite(cond) and cond < 1e6)
    c_ref = np.linalg.solve(d.T @ d, -d.T @ rhs)
    oracle = two_norm(rhs + d @ c_ref)
    sol = solve_lsq_min_norm(d, rhs)
    assert abs(sol.residual_norm - oracle) <= 1e-8 * max(two_norm(rhs), 1e-300)


@given(st.integers(0, 2**31 - 1), st.integers(2, 20))
@settings(max_examples=40, deadline=None)
def test_apply_is_linear(seed, n):
    rng = np.random.default_rng(seed)
    op = LinearOperator.from_dense(rng.standard_normal((n, n)))
    x = rng.standard_normal(n)
    y = rng.standard_normal(n)
    al, be = rng.uniform(-2.0, 2.0, size=2)
    lhs = op.apply(al * x + be * y)
    ref = al * op.apply(x) + be * op.apply(y)
    np.testing.assert_allclose(lhs, ref, rtol=0, atol=1e-12 * (np.abs(ref).max() + 1.0))
