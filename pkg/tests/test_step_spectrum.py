import warnings

import numpy as np
import pytest

from slgap import (
    Interval,
    Mesh,
    StepProblem,
    count_eigenvalues_below,
    eigenvalues_step,
    secular_residual,
    solve,
    step_eigenfunction,
    step_gap,
    step_spectrum_full,
)
from slgap.step_spectrum import eigenvalues_below_threshold

IV = Interval(0.0, np.pi)


def _sp(x_minus, Vmax, xhat_minus, N_big, w_low):
    return StepProblem(IV, x_minus, Vmax, xhat_minus, N_big, w_low)


def test_free_limit_recovers_integers():
    sp = _sp(1.0, 0.0, 1.5, 1.0, 1.0)
    lam = eigenvalues_step(sp, 3)
    assert np.allclose(lam, [1.0, 4.0, 9.0], rtol=1e-10)


def test_roots_are_secular_zeros():
    sp = _sp(1.2, 3.0, 1.7, 1.4, 1.0)
    for lam in eigenvalues_step(sp, 3):
        assert abs(secular_residual(sp, lam)) < 1e-7 * max(1.0, lam)


def test_matches_matrix_solver_above_threshold():
    sp = _sp(0.9, 0.3, 1.4, 1.2, 0.9)
    assert count_eigenvalues_below(sp, sp.threshold) == 0
    lam = eigenvalues_step(sp, 2)
    ref = solve(sp.to_problem(), Mesh(IV, 4096), k=2).lambdas
    assert np.max(np.abs(lam - ref) / ref) < 1e-6


def test_counting_consistent_with_roots():
    sp = _sp(1.1, 4.0, 1.6, 1.5, 1.0)
    lam = eigenvalues_step(sp, 4)
    mids = 0.5 * (lam[:-1] + lam[1:])
    base = count_eigenvalues_below(sp, lam[0] - 1e-6)
    for j, m in enumerate(mids):
        assert count_eigenvalues_below(sp, m) == base + j + 1


def test_below_threshold_deep_well():
    # deep well: ground state below Vmax / w_low
    sp = _sp(2.8, 200.0, 2.9, 1.0, 1.0)
    n = count_eigenvalues_below(sp, sp.threshold)
    assert n >= 2
    lam = eigenvalues_below_threshold(sp, 2)
    ref = solve(sp.to_problem(), Mesh(IV, 8191), k=2).lambdas
    assert np.max(np.abs(lam - ref) / ref) < 1e-5


def test_zero_exactly_on_region_boundary():
    # k * width hits a multiple of pi at the jump: boundary zero must not
    # be counted twice
    sp = _sp(0.1 * np.pi, 100.0, 0.1 * np.pi, 1.0, 1.0)
    g = step_gap(sp)
    ref = solve(sp.to_problem(), Mesh(IV, 8191), k=2).lambdas
    assert abs(g - (ref[1] - ref[0])) < 1e-4


def test_step_gap_matches_solver_across_regimes():
    cases = [
        _sp(1.0, 0.5, 1.5, 1.2, 1.0),  # both roots secular
        _sp(2.5, 60.0, 2.6, 1.0, 1.0),  # ground state below threshold
        _sp(3.0, 400.0, 3.05, 1.0, 1.0),  # both roots below threshold
    ]
    for sp in cases:
        ref = solve(sp.to_problem(), Mesh(IV, 8191), k=2).lambdas
        assert abs(step_gap(sp) - (ref[1] - ref[0])) < 2e-4


def test_full_spectrum_warns_below_threshold():
    sp = _sp(2.5, 60.0, 2.6, 1.0, 1.0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        lam = step_spectrum_full(sp, k=2)
    assert any("below the secular threshold" in str(w.message) for w in caught)
    assert lam[0] < lam[1] < sp.threshold


def test_eigenfunction_satisfies_equation():
    sp = _sp(1.2, 3.0, 1.7, 1.4, 1.0)
    lam = eigenvalues_step(sp, 2)
    prob = sp.to_problem()
    for v in lam:
        ef = step_eigenfunction(sp, float(v))
        x = np.linspace(0.05, np.pi - 0.05, 400)
        # avoid the jump points where u'' is discontinuous
        keep = (np.abs(x - sp.x_minus) > 0.02) & (np.abs(x - sp.xhat_minus) > 0.02)
        x = x[keep]
        h = 1e-5
        upp = (ef(x + h) - 2 * ef(x) + ef(x - h)) / h**2
        resid = -upp + prob.V(x) * ef(x) - v * prob.w(x) * ef(x)
        assert np.max(np.abs(resid)) < 1e-3 * max(1.0, v)


def test_reflection_preserves_spectrum():
    sp = _sp(1.2, 0.5, 1.7, 1.4, 1.0)
    rp = StepProblem(IV, 1.2, 0.5, 1.7, 1.4, 1.0, reflected=True)
    ref = solve(rp.to_problem(), Mesh(IV, 4096), k=2).lambdas
    lam = eigenvalues_step(sp, 2)
    assert np.max(np.abs(lam - ref) / ref) < 1e-6


def test_invalid_geometry_rejected():
    with pytest.raises(ValueError):
        _sp(2.0, 1.0, 1.0, 1.5, 1.0)  # xhat before x_minus
    with pytest.raises(ValueError):
        _sp(1.0, 1.0, 1.5, 1.0, 1.5)  # w_low > N_big
