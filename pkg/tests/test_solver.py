import numpy as np
import pytest

from slgap import (
    Interval,
    Mesh,
    PiecewiseFn,
    Problem,
    SolverError,
    gap,
    solve,
    spectral_pair,
    wronskian_residual,
)

IV = Interval(0.0, np.pi)


def test_free_problem_eigenvalues():
    prob = Problem.constant_coefficients(IV)
    res = solve(prob, Mesh(IV, 1024), k=4)
    assert np.allclose(res.lambdas, [1.0, 4.0, 9.0, 16.0], atol=1e-8)


def test_constant_density_scaling():
    prob = Problem.constant_coefficients(IV, w=2.0)
    res = solve(prob, Mesh(IV, 1024), k=3)
    assert np.allclose(res.lambdas, [0.5, 2.0, 4.5], atol=1e-8)


def test_constant_potential_shift():
    prob = Problem.constant_coefficients(IV, V=5.0)
    res = solve(prob, Mesh(IV, 1024), k=2)
    assert np.allclose(res.lambdas, [6.0, 9.0], atol=1e-8)


def test_background_potential_contributes():
    V0 = PiecewiseFn.constant(2.0, IV)
    prob = Problem(IV, PiecewiseFn.constant(1.0, IV), PiecewiseFn.constant(1.0, IV), V0)
    res = solve(prob, Mesh(IV, 512), k=1)
    assert np.isclose(res.lambdas[0], 4.0, atol=1e-7)


def test_weighted_normalization_and_signs():
    prob = Problem.constant_coefficients(IV, w=3.0)
    pair = spectral_pair(prob, Mesh(IV, 512))
    assert pair.normalization_residual() < 1e-10
    assert pair.orthogonality_residual() < 1e-10
    # sign convention: positive near the left endpoint
    assert pair.u1[0] > 0 and pair.u2[0] > 0


def test_step_potential_extrapolated_accuracy():
    V = PiecewiseFn.step(IV, 1.1, 0.0, 10.0)
    prob = Problem(IV, V, PiecewiseFn.constant(1.0, IV))
    lam_a = solve(prob, Mesh(IV, 1024), k=2).lambdas
    lam_b = solve(prob, Mesh(IV, 4096), k=2).lambdas
    assert np.max(np.abs(lam_a - lam_b)) < 1e-5


def test_gap_positive_and_consistent():
    prob = Problem.constant_coefficients(IV)
    g = gap(prob, Mesh(IV, 512))
    assert np.isclose(g, 3.0, atol=1e-8)


def test_wronskian_residual_small():
    prob = Problem.constant_coefficients(IV, V=1.0)
    pair = spectral_pair(prob, Mesh(IV, 1024))
    assert wronskian_residual(pair, prob) < 1e-4


def test_nonpositive_density_rejected():
    with pytest.raises(SolverError):
        Problem(IV, PiecewiseFn.constant(0.0, IV), PiecewiseFn.constant(-1.0, IV))


def test_mesh_too_small_rejected():
    with pytest.raises(ValueError):
        Mesh(IV, 8)
