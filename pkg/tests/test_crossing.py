import numpy as np
import pytest

from slgap import (
    CrossingError,
    Interval,
    Mesh,
    PiecewiseFn,
    Problem,
    find_crossings,
    ratio_monotonicity,
    spectral_pair,
)

IV = Interval(0.0, np.pi)
MESH = Mesh(IV, 2048)


def _pair(V=None, w=None):
    prob = Problem(
        IV,
        V or PiecewiseFn.constant(0.0, IV),
        w or PiecewiseFn.constant(1.0, IV),
    )
    return spectral_pair(prob, MESH)


def test_free_problem_crossings_exact():
    # u1 = sin x, u2 = sin 2x: |u1| = |u2| at pi/3 and 2pi/3
    rep = find_crossings(_pair())
    assert np.isclose(rep.x_minus, np.pi / 3, atol=1e-3)
    assert np.isclose(rep.x_plus, 2 * np.pi / 3, atol=1e-3)
    assert rep.crossing_counts[0] == 2
    assert rep.ratio_monotone


def test_weighted_crossing_interval_ordering():
    w = PiecewiseFn.step(IV, 1.8, 2.0, 1.0)
    rep = find_crossings(_pair(w=w))
    assert rep.x_minus < rep.x_plus
    assert rep.xhat_minus < rep.xhat_plus
    # the weighted difference region is contained in the plain one
    assert rep.x_minus <= rep.xhat_minus + 1e-9
    assert rep.xhat_plus <= rep.x_plus + 1e-9


def test_asymmetric_potential_crossings_interior():
    V = PiecewiseFn.step(IV, 1.0, 0.0, 8.0)
    rep = find_crossings(_pair(V=V))
    assert 1 <= rep.crossing_counts[0] <= 2
    assert 1 <= rep.crossing_counts[1] <= 2
    assert IV.a < rep.x_minus < IV.b or IV.a < rep.x_plus < IV.b


def test_ratio_strictly_decreasing():
    monotone, worst = ratio_monotonicity(_pair())
    assert monotone
    assert worst < 0


def test_degenerate_data_raises():
    pair = _pair()
    # u2 identical to u1 has no admissible crossing structure
    broken = type(pair)(
        pair.lambda1, pair.lambda2, pair.u1, pair.u1.copy(), pair.mesh, pair.w_nodes
    )
    with pytest.raises(CrossingError):
        find_crossings(broken)
