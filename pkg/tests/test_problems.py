"""Benchmark problem generators, random families, spec parsing, and
operator file round-trips."""

import numpy as np
import pytest
import scipy.sparse

from angmres import (
    LinearProblem,
    ProblemSpec,
    block_shift,
    build,
    circulant_shift,
    from_file,
    laplacian_2d,
    random_diagonalizable,
    random_spd,
)
from angmres.problems import (
    circulant_shift_matrix,
    load_matrix_market,
    load_matrix_text,
    save_matrix_market,
    save_matrix_text,
)


def test_circulant_is_a_permutation_with_cyclic_order():
    prob = circulant_shift(6)
    a = prob.op.to_dense()
    assert ((a == 0.0) | (a == 1.0)).all()
    np.testing.assert_array_equal(a.sum(axis=0), 1.0)
    np.testing.assert_array_equal(a.sum(axis=1), 1.0)
    np.testing.assert_array_equal(np.linalg.matrix_power(a, 6), np.eye(6))
    np.testing.assert_array_equal(a @ prob.u_exact, prob.b)
    np.testing.assert_array_equal(prob.u0, np.ones(6))


def test_circulant_iteration_matrix_is_singular_and_not_contractive():
    prob = circulant_shift(36)
    a = prob.op.to_dense()
    ones = np.ones(36)
    # A fixes the ones vector, so M = I - A annihilates it
    np.testing.assert_array_equal(a @ ones, ones)
    m = np.eye(36) - a
    assert np.linalg.matrix_rank(m) == 35
    assert np.linalg.norm(m, 2) >= 1.0


def test_block_shift_layout():
    prob = block_shift(3, 5)
    a = prob.op.to_dense()
    assert a.shape == (45, 45)
    np.testing.assert_array_equal(np.flatnonzero(prob.b), [0, 3, 9, 18, 30])
    np.testing.assert_array_equal(np.flatnonzero(prob.u_exact), [2, 8, 17, 29, 44])
    np.testing.assert_array_equal(prob.u0, np.zeros(45))
    np.testing.assert_array_equal(a @ prob.u_exact, prob.b)
    # block-diagonal of shifts is still a permutation
    np.testing.assert_array_equal(a.sum(axis=0), 1.0)
    np.testing.assert_array_equal(a.sum(axis=1), 1.0)
    with pytest.raises(ValueError):
        block_shift(0, 5)


def test_laplacian_dimensions_and_spectrum():
    assert laplacian_2d(4).op.n == 16
    assert laplacian_2d(64).op.n == 4096
    prob = laplacian_2d(8)
    dense = prob.op.to_dense()
    np.testing.assert_array_equal(dense, dense.T)
    lam = np.linalg.eigvalsh(dense)
    assert lam[0] > 0.0 and lam[-1] < 8.0
    expected_min = 4.0 - 4.0 * np.cos(np.pi / 9.0)
    expected_max = 4.0 - 4.0 * np.cos(8.0 * np.pi / 9.0)
    np.testing.assert_allclose(lam[0], expected_min, rtol=1e-8)
    np.testing.assert_allclose(lam[-1], expected_max, rtol=1e-8)
    np.testing.assert_array_equal(prob.b, np.ones(64))


def test_laplacian_initial_guess_is_seeded():
    u_a = laplacian_2d(8, u0_seed=1).u0
    u_b = laplacian_2d(8, u0_seed=1).u0
    u_c = laplacian_2d(8, u0_seed=2).u0
    np.testing.assert_array_equal(u_a, u_b)
    assert np.abs(u_a - u_c).max() > 0.0


def test_fingerprints_are_reproducible_and_distinguishing():
    assert circulant_shift(12).fingerprint == circulant_shift(12).fingerprint
    pa, _ = random_spd(8, seed=1)
    pb, _ = random_spd(8, seed=1)
    pc, _ = random_spd(8, seed=2)
    assert pa.fingerprint == pb.fingerprint
    assert pa.fingerprint != pc.fingerprint
    assert laplacian_2d(5, u0_seed=1).fingerprint != laplacian_2d(5, u0_seed=2).fingerprint


def test_random_spd_construction():
    problem, data = random_spd(10, (0.3, 0.7), seed=4)
    a = problem.op.to_dense()
    np.testing.assert_array_equal(a, a.T)
    np.testing.assert_array_equal(a @ problem.u_exact, problem.b)
    assert data.is_spd and data.eig_condition == 1.0
    assert 0.3 < data.a <= data.b < 0.7
    assert data.operator_norm == data.b
    lam = np.linalg.eigvalsh(np.eye(10) - a)
    np.testing.assert_allclose(np.sort(lam), data.eigenvalues, atol=1e-10)


def test_random_diagonalizable_construction():
    problem, data = random_diagonalizable(9, (0.2, 0.8), 7.0, seed=5)
    m = np.eye(9) - problem.op.to_dense()
    assert data.eig_condition == 7.0
    eigs = np.sort(np.linalg.eigvals(m).real)
    np.testing.assert_allclose(eigs, data.eigenvalues, atol=1e-8)
    np.testing.assert_allclose(data.operator_norm, np.linalg.norm(m, 2), rtol=1e-10)
    assert not data.is_spd


def test_random_diagonalizable_condition_one_is_symmetric():
    problem, data = random_diagonalizable(8, (0.2, 0.8), 1.0, seed=6)
    m = np.eye(8) - problem.op.to_dense()
    assert np.abs(m - m.T).max() <= 1e-12 * np.abs(m).max()
    assert data.is_spd


def test_random_family_validation():
    with pytest.raises(ValueError):
        random_spd(5, (-0.5, 0.5))
    with pytest.raises(ValueError):
        random_spd(5, (0.8, 0.2))
    with pytest.raises(ValueError):
        random_diagonalizable(5, (0.5, 1.5))
    with pytest.raises(ValueError):
        random_diagonalizable(5, (0.2, 0.8), 0.5)


def test_problem_spec_parse_round_trip():
    assert ProblemSpec.parse("circulant") == ProblemSpec("circulant", (36,))
    assert ProblemSpec.parse("circulant:12") == ProblemSpec("circulant", (12,))
    assert ProblemSpec.parse("blockshift") == ProblemSpec("blockshift", (3, 5))
    assert ProblemSpec.parse("blockshift:2,4") == ProblemSpec("blockshift", (2, 4))
    assert ProblemSpec.parse("laplacian:8") == ProblemSpec("laplacian", (8,))
    assert ProblemSpec.parse("file:mat.txt") == ProblemSpec("file", ("mat.txt",))
    assert ProblemSpec.parse("random-spd:n=10,seed=2") == ProblemSpec(
        "random-spd", (10, 0.2, 0.8, 2)
    )
    assert ProblemSpec.parse(
        "random-diag:n=8,lo=0.3,hi=0.6,cond=2,seed=1"
    ) == ProblemSpec("random-diag", (8, 0.3, 0.6, 2.0, 1))
    spec = ProblemSpec.parse("circulant:6", u0_policy="zero", u0_seed=3)
    assert spec.u0_policy == "zero" and spec.u0_seed == 3


def test_problem_spec_parse_rejects_malformed_input():
    with pytest.raises(ValueError):
        ProblemSpec.parse("fourier:4")
    with pytest.raises(ValueError):
        ProblemSpec.parse("blockshift:1,2,3")
    with pytest.raises(ValueError):
        ProblemSpec.parse("file")
    with pytest.raises(ValueError):
        ProblemSpec.parse("random-spd:bogus=1")
    with pytest.raises(ValueError):
        ProblemSpec.parse("circulant:many")


def test_build_matches_direct_constructors():
    built = build(ProblemSpec.parse("circulant:12"))
    direct = circulant_shift(12)
    np.testing.assert_array_equal(built.op.to_dense(), direct.op.to_dense())
    np.testing.assert_array_equal(built.b, direct.b)
    np.testing.assert_array_equal(built.u0, direct.u0)

    built = build(ProblemSpec.parse("random-spd:n=7,seed=9"))
    direct, _ = random_spd(7, (0.2, 0.8), seed=9)
    np.testing.assert_array_equal(built.op.to_dense(), direct.op.to_dense())
    np.testing.assert_array_equal(built.b, direct.b)

    with pytest.raises(ValueError):
        build(ProblemSpec("nope"))


def test_matrix_text_round_trip_and_from_file(tmp_path):
    path = tmp_path / "shift.txt"
    a = circulant_shift_matrix(6) * np.pi
    save_matrix_text(path, a)
    np.testing.assert_array_equal(load_matrix_text(path), a)
    prob = from_file(path)
    assert isinstance(prob, LinearProblem)
    np.testing.assert_array_equal(prob.op.to_dense(), a)
    np.testing.assert_array_equal(prob.b, np.ones(6))
    np.testing.assert_array_equal(prob.u0, np.zeros(6))


def test_matrix_market_round_trip_and_from_file(tmp_path):
    path = tmp_path / "lap.mtx"
    t = np.diag(2.0 * np.ones(5)) - np.diag(np.ones(4), 1) - np.diag(np.ones(4), -1)
    save_matrix_market(path, scipy.sparse.csr_matrix(t))
    loaded = load_matrix_market(path)
    assert scipy.sparse.issparse(loaded)
    np.testing.assert_array_equal(loaded.toarray(), t)
    prob = from_file(path)
    np.testing.assert_array_equal(prob.op.to_dense(), t)
    np.testing.assert_array_equal(prob.b, np.ones(5))


def test_build_rejects_numerically_singular_file(tmp_path):
    path = tmp_path / "singular.txt"
    save_matrix_text(path, np.ones((3, 3)))
    with pytest.raises(ValueError, match="singular"):
        build(ProblemSpec("file", (str(path),)))
