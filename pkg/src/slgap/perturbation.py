"""Eigenvalue derivatives under joint potential/density perturbations.

For a one-parameter family V + kappa dV, w + kappa dw the derivative of a
weighted-normalized eigenvalue at kappa = 0 is

    d lambda_n / d kappa = -lambda_n * int dw u_n^2 + int dV u_n^2,

evaluated here with the same trapezoid quadrature and dual-cell
coefficient sampling the solver uses, so the dV = 1, w = 1 case returns
exactly 1 up to roundoff.  A central finite-difference evaluator with
one Richardson refinement is provided as the independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coefficients import PiecewiseFn
from .solver import Mesh, Problem, SpectralPair, solve

__all__ = [
    "PerturbationDirection",
    "eigenvalue_derivative",
    "gap_derivative",
    "finite_difference_derivative",
    "perturbed_problem",
]

NORMALIZATION_TOL = 1e-6


@dataclass(frozen=True)
class PerturbationDirection:
    """Direction (dV, dw); either part may be None meaning zero."""

    dV: PiecewiseFn | None = None
    dw: PiecewiseFn | None = None

    def __post_init__(self):
        if self.dV is None and self.dw is None:
            raise ValueError("direction must perturb V or w")


def _direction_samples(
    direction: PerturbationDirection, mesh: Mesh
) -> tuple[np.ndarray | None, np.ndarray | None]:
    edges = mesh.dual_edges
    dV = None if direction.dV is None else direction.dV.cell_averages(edges)
    dw = None if direction.dw is None else direction.dw.cell_averages(edges)
    return dV, dw


def eigenvalue_derivative(
    pair: SpectralPair, direction: PerturbationDirection, index: int
) -> float:
    """d lambda_index / d kappa at kappa = 0, index in {1, 2}."""
    if index not in (1, 2):
        raise ValueError("index must be 1 or 2")
    nr = pair.normalization_residual()
    if nr > NORMALIZATION_TOL:
        raise ValueError(f"pair not normalized (residual {nr:.3g})")
    u = pair.u1 if index == 1 else pair.u2
    lam = pair.lambda1 if index == 1 else pair.lambda2
    dV, dw = _direction_samples(direction, pair.mesh)
    out = 0.0
    if dw is not None:
        out -= lam * pair.mesh.quad(dw * u**2)
    if dV is not None:
        out += pair.mesh.quad(dV * u**2)
    return float(out)


def gap_derivative(pair: SpectralPair, direction: PerturbationDirection) -> float:
    """Derivative of the gap lambda2 - lambda1 along the direction."""
    return eigenvalue_derivative(pair, direction, 2) - eigenvalue_derivative(
        pair, direction, 1
    )


def perturbed_problem(
    problem: Problem, direction: PerturbationDirection, kappa: float
) -> Problem:
    """Problem with V + kappa dV and w + kappa dw."""
    V = problem.V
    w = problem.w
    if direction.dV is not None:
        V = V + direction.dV.scaled(kappa)
    if direction.dw is not None:
        w = w + direction.dw.scaled(kappa)
    return Problem(problem.interval, V, w, problem.V0)


def finite_difference_derivative(
    problem: Problem,
    direction: PerturbationDirection,
    index: int,
    mesh: Mesh | None = None,
    eps: float = 1e-4,
    richardson: bool = True,
) -> float:
    """Central-difference eigenvalue derivative, refined once at eps/2.

    Independent of the analytic formula; each evaluation is a full
    eigensolve of the perturbed problem.
    """
    if index not in (1, 2):
        raise ValueError("index must be 1 or 2")

    def central(e: float) -> float:
        lp = solve(perturbed_problem(problem, direction, +e), mesh, k=index).lambdas[index - 1]
        lm = solve(perturbed_problem(problem, direction, -e), mesh, k=index).lambdas[index - 1]
        return (lp - lm) / (2 * e)

    d1 = central(eps)
    if not richardson:
        return float(d1)
    d2 = central(eps / 2)
    return float((4 * d2 - d1) / 3)
