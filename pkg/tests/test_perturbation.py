import numpy as np
import pytest

from slgap import (
    Interval,
    Mesh,
    PiecewiseFn,
    Problem,
    PerturbationDirection,
    eigenvalue_derivative,
    finite_difference_derivative,
    gap_derivative,
    perturbed_problem,
    spectral_pair,
)

IV = Interval(0.0, np.pi)
MESH = Mesh(IV, 1024)


def test_constant_potential_shift_has_unit_derivative():
    prob = Problem.constant_coefficients(IV)
    pair = spectral_pair(prob, MESH)
    d = PerturbationDirection(dV=PiecewiseFn.constant(1.0, IV))
    assert np.isclose(eigenvalue_derivative(pair, d, 1), 1.0, atol=1e-12)
    assert np.isclose(eigenvalue_derivative(pair, d, 2), 1.0, atol=1e-12)
    assert abs(gap_derivative(pair, d)) < 1e-12


def test_density_direction_sign():
    # increasing w everywhere lowers every eigenvalue
    prob = Problem.constant_coefficients(IV)
    pair = spectral_pair(prob, MESH)
    d = PerturbationDirection(dw=PiecewiseFn.constant(1.0, IV))
    assert eigenvalue_derivative(pair, d, 1) < 0
    assert eigenvalue_derivative(pair, d, 2) < 0


def test_matches_finite_differences_potential():
    V = PiecewiseFn.step(IV, 1.3, 0.0, 4.0)
    prob = Problem(IV, V, PiecewiseFn.constant(1.0, IV))
    pair = spectral_pair(prob, MESH)
    d = PerturbationDirection(dV=PiecewiseFn.step(IV, 2.0, 1.0, -0.5))
    for idx in (1, 2):
        analytic = eigenvalue_derivative(pair, d, idx)
        fd = finite_difference_derivative(prob, d, idx, MESH)
        assert abs(analytic - fd) < 1e-4 * max(1.0, abs(fd))


def test_matches_finite_differences_joint():
    prob = Problem(
        IV,
        PiecewiseFn.polynomial([0.0, 0.5], IV),
        PiecewiseFn.constant(1.5, IV),
    )
    pair = spectral_pair(prob, MESH)
    d = PerturbationDirection(
        dV=PiecewiseFn.polynomial([0.2, -0.1], IV),
        dw=PiecewiseFn.step(IV, 1.0, 0.3, -0.2),
    )
    analytic = gap_derivative(pair, d)
    fd = finite_difference_derivative(prob, d, 2, MESH) - finite_difference_derivative(
        prob, d, 1, MESH
    )
    assert abs(analytic - fd) < 1e-4 * max(1.0, abs(fd))


def test_perturbed_problem_composition():
    prob = Problem.constant_coefficients(IV, V=1.0, w=2.0)
    d = PerturbationDirection(
        dV=PiecewiseFn.constant(2.0, IV), dw=PiecewiseFn.constant(-1.0, IV)
    )
    p2 = perturbed_problem(prob, d, 0.5)
    assert np.isclose(p2.V(1.0), 2.0)
    assert np.isclose(p2.w(1.0), 1.5)


def test_empty_direction_rejected():
    with pytest.raises(ValueError):
        PerturbationDirection()
