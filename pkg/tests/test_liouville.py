import numpy as np
import pytest

from slgap import (
    Interval,
    Mesh,
    PiecewiseFn,
    Problem,
    SolverError,
    convexity_report,
    equality_condition_residual,
    eigenvalue_equivalence_check,
    gap,
    lavine_bound,
    liouville_potential,
    transformed_length,
)

IV = Interval(0.0, np.pi)


def _problem(V, w, iv=IV):
    return Problem(iv, V, w)


def test_unit_density_is_identity_transform():
    prob = Problem.constant_coefficients(IV, V=2.0)
    data = liouville_potential(prob)
    assert np.isclose(data.L, np.pi, atol=1e-12)
    assert np.allclose(data.psi, 2.0, atol=1e-12)
    assert np.allclose(data.dpsi, 0.0, atol=1e-10)


def test_transformed_length_quadrature():
    w = PiecewiseFn.polynomial([1.0, 0.2], IV)  # w = 1 + 0.2 x
    prob = _problem(PiecewiseFn.constant(0.0, IV), w)
    exact = (2.0 / (3 * 0.2)) * ((1 + 0.2 * np.pi) ** 1.5 - 1.0)
    assert np.isclose(transformed_length(prob), exact, atol=1e-10)


def test_bound_for_free_problem_is_sharp():
    prob = Problem.constant_coefficients(IV)
    assert np.isclose(lavine_bound(prob), 3.0, atol=1e-12)
    assert np.isclose(gap(prob, Mesh(IV, 1024)), 3.0, atol=1e-8)


def test_convexity_detected():
    V = PiecewiseFn.polynomial([0.0, -np.pi, 1.0], IV)  # convex parabola
    prob = _problem(V, PiecewiseFn.constant(1.0, IV))
    rep = convexity_report(liouville_potential(prob))
    assert rep["convex"]
    V2 = PiecewiseFn.polynomial([0.0, np.pi, -1.0], IV)  # concave
    rep2 = convexity_report(liouville_potential(_problem(V2, PiecewiseFn.constant(1.0, IV))))
    assert not rep2["convex"]


def test_spectrum_invariant_under_transform():
    w = PiecewiseFn.polynomial([1.0, 0.1, 0.05], IV)
    V = PiecewiseFn.polynomial([0.5, 0.3], IV)
    prob = _problem(V, w)
    assert eigenvalue_equivalence_check(prob, n=2048) < 1e-5


def test_jump_density_rejected():
    w = PiecewiseFn.step(IV, 1.0, 2.0, 1.0)
    prob = _problem(PiecewiseFn.constant(0.0, IV), w)
    with pytest.raises(SolverError, match="w not C"):
        liouville_potential(prob)


def test_equality_residual_zero_for_constant_coefficients():
    prob = Problem.constant_coefficients(IV, V=1.5, w=2.0)
    assert equality_condition_residual(prob) < 1e-12
    assert np.isclose(
        gap(prob, Mesh(IV, 2048)),
        3 * np.pi**2 / transformed_length(prob) ** 2,
        atol=1e-7,
    )
