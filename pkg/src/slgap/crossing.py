"""Crossing points of the two lowest eigenfunctions.

With the sign convention u1, u2 > 0 near the left endpoint, u1^2 - u2^2
is positive exactly on an interval (x_minus, x_plus) whose endpoints are
the crossings of |u1| = |u2| (one or both interior), and likewise
lambda1 u1^2 - lambda2 u2^2 is positive exactly on (xhat_minus,
xhat_plus).  This module locates both pairs from nodal eigenfunction
data, reports endpoint sentinels when a crossing sits on the boundary,
and checks the strict decrease of u2/u1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .solver import SpectralPair

__all__ = [
    "CrossingReport",
    "CrossingError",
    "find_crossings",
    "ratio_monotonicity",
]

#: |u1^2 - u2^2| below this over a span wider than 2h counts as a tangency
DEGENERACY_TOL = 1e-12

#: nodes with |u1| below this are excluded from the ratio check
RATIO_U1_FLOOR = 1e-10


class CrossingError(RuntimeError):
    """Crossing structure contradicts the expected one/two-crossing form."""


@dataclass(frozen=True)
class CrossingReport:
    """Crossing locations; boundary values of the interval encode
    "crossing at the endpoint"."""

    x_minus: float
    x_plus: float
    xhat_minus: float
    xhat_plus: float
    ratio_monotone: bool
    crossing_counts: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "x_minus": self.x_minus,
            "x_plus": self.x_plus,
            "xhat_minus": self.xhat_minus,
            "xhat_plus": self.xhat_plus,
            "ratio_monotone": self.ratio_monotone,
            "crossing_counts": list(self.crossing_counts),
        }


def _interior_roots(x: np.ndarray, f: np.ndarray, h: float) -> list[float]:
    """Sign-change locations of nodal data f, refined on the linear
    interpolant of the underlying eigenfunctions."""
    # degeneracy guard: a near-zero plateau wider than two cells
    tiny = np.abs(f) < DEGENERACY_TOL
    if tiny.any():
        runs = np.diff(np.flatnonzero(np.diff(np.concatenate([[0], tiny.view(np.int8), [0]]))))
        spans = runs[::2] if tiny[0] else runs[1::2] if runs.size > 1 else runs[:0]
        if spans.size and spans.max() > 2:
            raise CrossingError("near-tangency plateau wider than 2 cells")
    roots = []
    s = np.sign(f)
    for i in np.flatnonzero(s[:-1] * s[1:] < 0):
        x0, x1 = x[i], x[i + 1]
        f0, f1 = f[i], f[i + 1]
        roots.append(float(x0 - f0 * (x1 - x0) / (f1 - f0)))
    return roots


def _positive_interval(
    x_full: np.ndarray, f_full: np.ndarray, h: float, what: str
) -> tuple[float, float, int]:
    """Interval on which f > 0, given one or two interior crossings."""
    a, b = float(x_full[0]), float(x_full[-1])
    roots = _interior_roots(x_full[1:-1], f_full[1:-1], h)
    count = len(roots)
    if count == 2:
        lo, hi = roots
        mid_sign = f_full[1:-1][(x_full[1:-1] > lo) & (x_full[1:-1] < hi)]
        if mid_sign.size and np.median(np.sign(mid_sign)) < 0:
            raise CrossingError(f"{what}: difference negative between its crossings")
        return lo, hi, count
    if count == 1:
        r = roots[0]
        after = f_full[1:-1][x_full[1:-1] > r + h]
        positive_after = after.size and np.median(np.sign(after)) > 0
        return (r, b, count) if positive_after else (a, r, count)
    raise CrossingError(f"{what}: found {count} interior crossings, expected 1 or 2")


def find_crossings(pair: SpectralPair) -> CrossingReport:
    """Locate x_minus, x_plus and xhat_minus, xhat_plus from a solved pair.

    Raises CrossingError if either count falls outside {1, 2}, which
    signals a solver failure or violated structural hypotheses.
    """
    mesh = pair.mesh
    x_full = mesh.full_nodes
    u1 = np.concatenate([[0.0], pair.u1, [0.0]])
    u2 = np.concatenate([[0.0], pair.u2, [0.0]])
    f = u1**2 - u2**2
    g = pair.lambda1 * u1**2 - pair.lambda2 * u2**2
    x_lo, x_hi, n1 = _positive_interval(x_full, f, mesh.h, "u1^2 - u2^2")
    xh_lo, xh_hi, n2 = _positive_interval(
        x_full, g, mesh.h, "lambda1 u1^2 - lambda2 u2^2"
    )
    monotone, _ = ratio_monotonicity(pair)
    return CrossingReport(x_lo, x_hi, xh_lo, xh_hi, monotone, (n1, n2))


def ratio_monotonicity(pair: SpectralPair) -> tuple[bool, float]:
    """Whether v = u2/u1 strictly decreases across interior nodes.

    Returns (monotone, max_violation): the largest forward difference of
    v where u1 is bounded away from zero; negative when monotone.
    """
    scale = float(np.max(np.abs(pair.u1)))
    keep = np.abs(pair.u1) > RATIO_U1_FLOOR * max(scale, 1.0)
    v = pair.u2[keep] / pair.u1[keep]
    diffs = np.diff(v)
    if diffs.size == 0:
        return True, float("-inf")
    worst = float(np.max(diffs))
    return worst < 0.0, worst
