import numpy as np
import pytest

from slgap import (
    Interval,
    PiecewiseFn,
    ValidationError,
    single_barrier_violations,
    single_well_violations,
    validate_single_barrier,
    validate_single_well,
)

IV = Interval(0.0, np.pi)


def test_constant_and_polynomial_evaluation():
    c = PiecewiseFn.constant(2.5, IV)
    assert c(1.0) == 2.5
    p = PiecewiseFn.polynomial([1.0, 2.0, 3.0], IV)
    xs = np.linspace(0, np.pi, 7)
    assert np.allclose(p(xs), 1 + 2 * xs + 3 * xs**2)


def test_step_limits_and_jumps():
    s = PiecewiseFn.step(IV, 1.0, 0.0, 5.0)
    left, right = s.limits(1.0)
    assert left == 0.0 and right == 5.0
    assert s.jump_locations() == [1.0]
    assert s(0.5) == 0.0 and s(1.5) == 5.0


def test_from_steps_matches_step():
    s = PiecewiseFn.from_steps([0.0, 1.0, 2.0, np.pi], [1.0, 3.0, 2.0])
    assert s(0.5) == 1.0 and s(1.5) == 3.0 and s(2.5) == 2.0


def test_derivative_and_integral_exact():
    p = PiecewiseFn.polynomial([0.0, 0.0, 1.0], IV)  # x^2
    assert np.isclose(p.derivative()(1.3), 2.6)
    assert np.isclose(p.integral(0.0, 2.0), 8.0 / 3.0)


def test_cell_average_over_jump():
    s = PiecewiseFn.step(IV, 1.0, 0.0, 4.0)
    # cell [0.5, 1.5] straddles the jump: average is 2
    assert np.isclose(s.cell_average(0.5, 1.5), 2.0)


def test_addition_and_scaling():
    p = PiecewiseFn.polynomial([1.0, 1.0], IV)
    q = PiecewiseFn.step(IV, 1.0, 0.0, 2.0)
    r = p + q.scaled(0.5)
    assert np.isclose(r(1.5), 1.0 + 1.5 + 1.0)


def test_reflection():
    s = PiecewiseFn.step(IV, 1.0, 0.0, 5.0)
    r = s.reflected()
    assert np.isclose(r(np.pi - 0.5), 0.0)
    assert np.isclose(r(0.5), 5.0)


def test_round_trip_dict():
    s = PiecewiseFn.step(IV, 1.0, 0.0, 5.0)
    assert PiecewiseFn.from_dict(s.to_dict()) == s


def test_single_well_accepts_valid_step():
    s = PiecewiseFn.step(IV, 1.0, 3.0, 0.0)
    # decreasing step: well with transition anywhere at/after the jump
    assert single_well_violations(s, 1.5, 5.0) == []
    validate_single_well(s, 1.5, 5.0)


def test_single_well_rejects_barrier():
    s = PiecewiseFn.from_steps([0.0, 1.0, 2.0, np.pi], [0.0, 5.0, 0.0])
    assert single_well_violations(s, 1.5, 5.0) != []
    with pytest.raises(ValidationError):
        validate_single_well(s, 1.5, 5.0)


def test_single_well_rejects_out_of_bounds():
    s = PiecewiseFn.constant(7.0, IV)
    assert single_well_violations(s, 1.5, 5.0) != []


def test_single_barrier_accepts_valid_shape():
    s = PiecewiseFn.from_steps([0.0, 1.0, 2.0, np.pi], [1.0, 4.0, 2.0])
    assert single_barrier_violations(s, 1.5, 1.0, 4.0) == []
    validate_single_barrier(s, 1.5, 1.0, 4.0)


def test_single_barrier_rejects_well_shape():
    s = PiecewiseFn.from_steps([0.0, 1.0, 2.0, np.pi], [4.0, 1.0, 4.0])
    assert single_barrier_violations(s, 1.5, 1.0, 4.0) != []
