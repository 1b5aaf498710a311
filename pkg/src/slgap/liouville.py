"""Liouville normal form: transformed potential, convexity, gap bounds.

The substitution xi = integral of sqrt(w) maps the weighted problem to
-eta'' + psi(xi) eta = lambda eta on [0, L] with the same spectrum,
where

    psi = w''/(4 w^2) - 5 (w')^2 / (16 w^3) + (V0 + V)/w,
    L   = integral over the interval of sqrt(w).

When psi is convex the gap obeys Gamma >= 3 pi^2 / L^2, with equality
exactly for constant psi.  psi and its xi-derivatives are computed from
exact piecewise-polynomial derivatives of the coefficients; the chain
rule used throughout is d/dxi = (1/sqrt(w)) d/dx.

Densities with value jumps are rejected (psi needs w in C^2 piecewise;
a jump makes the transform ill-defined as implemented here).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .coefficients import PiecewiseFn
from .solver import Mesh, Problem, SolverError, solve, solve_sampled

__all__ = [
    "LiouvilleData",
    "liouville_potential",
    "transformed_eigenvalues",
    "eigenvalue_equivalence_check",
    "convexity_report",
    "lavine_bound",
    "transformed_length",
    "equality_condition_residual",
]

CONVEXITY_TOL = 1e-10


@dataclass(frozen=True)
class LiouvilleData:
    """Transformed potential sampled on the image of a uniform x-grid."""

    L: float
    x: np.ndarray  # uniform interior x nodes
    xi: np.ndarray  # xi(x), strictly increasing, in (0, L)
    psi: np.ndarray
    dpsi: np.ndarray  # d psi / d xi
    d2psi: np.ndarray  # d^2 psi / d xi^2


def _require_smooth_density(problem: Problem) -> None:
    jumps = problem.w.jump_locations()
    if jumps:
        raise SolverError(
            "Liouville transform unavailable: w not C^2 "
            f"(value jump at x={jumps[0]:.6g})"
        )


def _sqrt_w_cumulative(problem: Problem, x_grid: np.ndarray) -> np.ndarray:
    """Cumulative integral of sqrt(w) at the given ascending grid points,
    by 8-point Gauss-Legendre on each subinterval."""
    nodes, weights = np.polynomial.legendre.leggauss(8)
    lo = x_grid[:-1]
    hi = x_grid[1:]
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    acc = np.zeros(lo.size)
    for t, wt in zip(nodes, weights):
        acc += wt * np.sqrt(problem.w(mid + half * t))
    return np.concatenate([[0.0], np.cumsum(acc * half)])


def transformed_length(problem: Problem) -> float:
    """L = integral of sqrt(w) over the interval."""
    iv = problem.interval
    grid = np.unique(
        np.concatenate(
            [np.linspace(iv.a, iv.b, 257), np.asarray(problem.w.breakpoints)]
        )
    )
    return float(_sqrt_w_cumulative(problem, grid)[-1])


def lavine_bound(problem: Problem) -> float:
    """Gap lower bound 3 pi^2 / L^2 (valid when psi is convex)."""
    L = transformed_length(problem)
    return float(3.0 * np.pi**2 / L**2)


def _psi_terms(problem: Problem, x: np.ndarray):
    """psi, d psi/dx, d^2 psi/dx^2 from exact piecewise derivatives."""
    w = problem.w
    q = problem.potential
    w0 = w(x)
    w1 = w.derivative()(x)
    w2 = w.derivative().derivative()(x)
    w3 = w.derivative().derivative().derivative()(x)
    w4 = w.derivative().derivative().derivative().derivative()(x)
    V = q(x)
    V1 = q.derivative()(x)
    V2 = q.derivative().derivative()(x)
    psi = w2 / (4 * w0**2) - 5 * w1**2 / (16 * w0**3) + V / w0
    dpsi_dx = (
        w3 / (4 * w0**2)
        - 9.0 / 8.0 * w1 * w2 / w0**3
        + 15.0 / 16.0 * w1**3 / w0**4
        + V1 / w0
        - V * w1 / w0**2
    )
    d2psi_dx2 = (
        w4 / (4 * w0**2)
        - w3 * w1 / (2 * w0**3)
        - 9.0 / 8.0 * ((w2**2 + w1 * w3) / w0**3 - 3 * w1**2 * w2 / w0**4)
        + 15.0 / 16.0 * (3 * w1**2 * w2 / w0**4 - 4 * w1**4 / w0**5)
        + V2 / w0
        - 2 * V1 * w1 / w0**2
        - V * w2 / w0**2
        + 2 * V * w1**2 / w0**3
    )
    return psi, dpsi_dx, d2psi_dx2


def liouville_potential(problem: Problem, n: int = 2048) -> LiouvilleData:
    """psi with first and second xi-derivatives on a uniform x-grid."""
    _require_smooth_density(problem)
    iv = problem.interval
    x_full = np.linspace(iv.a, iv.b, n + 2)
    xi_full = _sqrt_w_cumulative(problem, x_full)
    x = x_full[1:-1]
    xi = xi_full[1:-1]
    psi, dpsi_dx, d2psi_dx2 = _psi_terms(problem, x)
    w0 = problem.w(x)
    w1 = problem.w.derivative()(x)
    dpsi = dpsi_dx / np.sqrt(w0)
    d2psi = d2psi_dx2 / w0 - dpsi_dx * w1 / (2 * w0**2)
    return LiouvilleData(float(xi_full[-1]), x, xi, psi, dpsi, d2psi)


def convexity_report(data: LiouvilleData) -> dict:
    """{"convex": bool, "min_d2psi": float} from the interior nodes."""
    m = float(np.min(data.d2psi))
    return {"convex": m >= -CONVEXITY_TOL, "min_d2psi": m}


def transformed_eigenvalues(problem: Problem, n: int = 4096, k: int = 2) -> np.ndarray:
    """Eigenvalues of -eta'' + psi eta = lambda eta on [0, L], with one
    Richardson refinement, sampling psi through the inverse map x(xi)."""
    _require_smooth_density(problem)
    iv = problem.interval
    # dense monotone samples of xi(x) for the inverse map
    dense = np.linspace(iv.a, iv.b, 8 * n + 1)
    xi_dense = _sqrt_w_cumulative(problem, dense)
    L = float(xi_dense[-1])
    x_of_xi = CubicSpline(xi_dense, dense)

    def eig(m: int) -> np.ndarray:
        h = L / (m + 1)
        xi_nodes = h * np.arange(1, m + 1)
        x_nodes = np.clip(x_of_xi(xi_nodes), iv.a, iv.b)
        psi, _, _ = _psi_terms(problem, x_nodes)
        lam, _ = solve_sampled(psi, np.ones(m), h, k)
        return lam

    lam_c = eig(n)
    lam_f = eig(2 * n + 1)
    return (4.0 * lam_f - lam_c) / 3.0


def eigenvalue_equivalence_check(problem: Problem, n: int = 4096) -> float:
    """Max relative discrepancy of lambda1, lambda2 between the original
    problem and its Liouville normal form."""
    lam_orig = solve(problem, Mesh(problem.interval, n), k=2).lambdas
    lam_tr = transformed_eigenvalues(problem, n=n, k=2)
    return float(np.max(np.abs(lam_tr - lam_orig) / np.abs(lam_orig)))


def equality_condition_residual(problem: Problem, n: int = 2048) -> float:
    """Max |d psi/dx| over interior nodes; ~0 certifies constant psi and
    hence the equality case of the Lavine-type bound."""
    _require_smooth_density(problem)
    iv = problem.interval
    x = np.linspace(iv.a, iv.b, n + 2)[1:-1]
    _, dpsi_dx, _ = _psi_terms(problem, x)
    return float(np.max(np.abs(dpsi_dx)))
