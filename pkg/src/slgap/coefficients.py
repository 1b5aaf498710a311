"""Piecewise-polynomial coefficient functions and the constrained classes.

Potentials and densities are represented as piecewise polynomials (degree
up to 3 per piece) on a finite interval.  Evaluation is left-continuous at
interior breakpoints; one-sided limits and exact cell averages are exposed
for the solver, which needs jump-aware sampling.

The two constrained classes are

* single-well: non-increasing up to a transition point, then
  non-decreasing, with values in [0, M];
* single-barrier: non-decreasing then non-increasing, with values in
  [N_less, N_big].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Interval",
    "PiecewiseFn",
    "SingleWellSpec",
    "SingleBarrierSpec",
    "Violation",
    "ValidationError",
    "single_well_violations",
    "single_barrier_violations",
    "validate_single_well",
    "validate_single_barrier",
]

#: default resolution of the monotonicity/bounds validation grid
VALIDATION_GRID_N = 4096

#: tolerance for monotonicity and bound checks on the validation grid
VALIDATION_TOL = 1e-12


@dataclass(frozen=True)
class Interval:
    """Finite interval [a, b] with a < b."""

    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise ValueError("interval endpoints must be finite")
        if not self.a < self.b:
            raise ValueError(f"interval requires a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.a - tol <= x <= self.b + tol

    def reflect(self, x):
        """Mirror image a + b - x."""
        return self.a + self.b - np.asarray(x)


def _polyval(coeffs: np.ndarray, x):
    """Evaluate a polynomial given ascending coefficients."""
    return np.polynomial.polynomial.polyval(x, coeffs)


@dataclass(frozen=True)
class Violation:
    x: float
    message: str

    def __str__(self):
        return f"x={self.x:.6g}: {self.message}"


class ValidationError(ValueError):
    """A coefficient function failed class validation."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        preview = "; ".join(str(v) for v in violations[:5])
        more = "" if len(violations) <= 5 else f" (+{len(violations) - 5} more)"
        super().__init__(f"{len(violations)} violation(s): {preview}{more}")


@dataclass(frozen=True)
class PiecewiseFn:
    """Piecewise polynomial on [breakpoints[0], breakpoints[-1]].

    ``pieces[j]`` holds ascending global-x coefficients of the polynomial
    governing (breakpoints[j], breakpoints[j+1]].  Evaluation is
    left-continuous at interior breakpoints; the left endpoint takes the
    first piece.
    """

    breakpoints: tuple[float, ...]
    pieces: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        if bp.ndim != 1 or bp.size < 2:
            raise ValueError("need at least two breakpoints")
        if not np.all(np.diff(bp) > 0):
            raise ValueError("breakpoints must be strictly ascending")
        if len(self.pieces) != bp.size - 1:
            raise ValueError(
                f"{bp.size - 1} pieces expected, got {len(self.pieces)}"
            )
        if any(len(p) == 0 for p in self.pieces):
            raise ValueError("empty piece coefficients")
        object.__setattr__(self, "breakpoints", tuple(float(x) for x in bp))
        object.__setattr__(
            self, "pieces", tuple(tuple(float(c) for c in p) for p in self.pieces)
        )

    # -- constructors ----------------------------------------------------

    @classmethod
    def constant(cls, value: float, interval: Interval) -> "PiecewiseFn":
        return cls((interval.a, interval.b), ((float(value),),))

    @classmethod
    def polynomial(cls, coeffs: Sequence[float], interval: Interval) -> "PiecewiseFn":
        """Single polynomial with ascending coefficients on the interval."""
        return cls((interval.a, interval.b), (tuple(coeffs),))

    @classmethod
    def step(
        cls, interval: Interval, jump: float, left: float, right: float
    ) -> "PiecewiseFn":
        """One-jump step function; ``jump`` strictly inside the interval."""
        if not interval.a < jump < interval.b:
            raise ValueError("jump location must be interior")
        return cls(
            (interval.a, jump, interval.b), ((float(left),), (float(right),))
        )

    @classmethod
    def from_steps(
        cls, breakpoints: Sequence[float], values: Sequence[float]
    ) -> "PiecewiseFn":
        """Piecewise constant with len(values) == len(breakpoints) - 1."""
        return cls(tuple(breakpoints), tuple((float(v),) for v in values))

    @classmethod
    def from_callable(
        cls,
        f: Callable[[float], float],
        df: Callable[[float], float],
        interval: Interval,
        n_pieces: int = 64,
    ) -> "PiecewiseFn":
        """Cubic Hermite interpolant of a smooth function.

        Matches value and first derivative at uniformly spaced knots, so
        the result is C^1 with O(h^4) value error.
        """
        knots = np.linspace(interval.a, interval.b, n_pieces + 1)
        pieces = []
        for x0, x1 in zip(knots[:-1], knots[1:]):
            h = x1 - x0
            f0, f1 = float(f(x0)), float(f(x1))
            d0, d1 = float(df(x0)), float(df(x1))
            # Hermite cubic in s = x - x0, then shifted to global x
            c0 = f0
            c1 = d0
            c2 = (3 * (f1 - f0) / h - 2 * d0 - d1) / h
            c3 = (2 * (f0 - f1) / h + d0 + d1) / h**2
            # shift basis from (x - x0)^k to global x^k
            p = np.polynomial.Polynomial([c0, c1, c2, c3])(
                np.polynomial.Polynomial([-x0, 1.0])
            )
            pieces.append(tuple(p.coef))
        return cls(tuple(knots), tuple(pieces))

    # -- basic queries ---------------------------------------------------

    @property
    def interval(self) -> Interval:
        return Interval(self.breakpoints[0], self.breakpoints[-1])

    @property
    def degree(self) -> int:
        return max(len(p) - 1 for p in self.pieces)

    def _piece_index(self, x):
        bp = np.asarray(self.breakpoints)
        idx = np.searchsorted(bp, x, side="left") - 1
        return np.clip(idx, 0, len(self.pieces) - 1)

    def __call__(self, x):
        """Left-continuous evaluation; raises if x leaves the interval."""
        xv = np.asarray(x, dtype=float)
        a, b = self.breakpoints[0], self.breakpoints[-1]
        tol = 1e-12 * (1 + abs(a) + abs(b))
        if np.any(xv < a - tol) or np.any(xv > b + tol):
            raise ValueError("evaluation point outside the interval")
        idx = self._piece_index(xv)
        out = np.empty_like(xv, dtype=float)
        flat_idx = np.atleast_1d(idx)
        flat_x = np.atleast_1d(xv)
        flat_out = np.atleast_1d(out)
        for j in np.unique(flat_idx):
            sel = flat_idx == j
            flat_out[sel] = _polyval(np.array(self.pieces[j]), flat_x[sel])
        if out.ndim == 0:
            return float(flat_out[0])
        return out

    def limits(self, x: float) -> tuple[float, float]:
        """One-sided limits (left, right) at x; equal away from jumps."""
        bp = np.asarray(self.breakpoints)
        j = int(np.clip(np.searchsorted(bp, x, side="left") - 1, 0, len(self.pieces) - 1))
        k = int(np.clip(np.searchsorted(bp, x, side="right") - 1, 0, len(self.pieces) - 1))
        return (
            float(_polyval(np.array(self.pieces[j]), x)),
            float(_polyval(np.array(self.pieces[k]), x)),
        )

    def jump_locations(self, tol: float = 1e-12) -> list[float]:
        """Interior breakpoints where the value is discontinuous."""
        out = []
        for x in self.breakpoints[1:-1]:
            lo, hi = self.limits(x)
            if abs(hi - lo) > tol * (1 + abs(lo) + abs(hi)):
                out.append(x)
        return out

    # -- calculus --------------------------------------------------------

    def derivative(self) -> "PiecewiseFn":
        """Piecewise derivative (distributional parts at jumps dropped)."""
        pieces = []
        for p in self.pieces:
            c = np.polynomial.polynomial.polyder(np.array(p))
            pieces.append(tuple(c) if c.size else (0.0,))
        return PiecewiseFn(self.breakpoints, tuple(pieces))

    def integral(self, lo: float, hi: float) -> float:
        """Exact integral over [lo, hi] within the interval."""
        if hi < lo:
            return -self.integral(hi, lo)
        a, b = self.breakpoints[0], self.breakpoints[-1]
        tol = 1e-12 * (1 + abs(a) + abs(b))
        if lo < a - tol or hi > b + tol:
            raise ValueError("integration limits outside the interval")
        lo, hi = max(lo, a), min(hi, b)
        bp = np.asarray(self.breakpoints)
        total = 0.0
        for j, p in enumerate(self.pieces):
            left = max(lo, bp[j])
            right = min(hi, bp[j + 1])
            if right <= left:
                continue
            anti = np.polynomial.polynomial.polyint(np.array(p))
            total += _polyval(anti, right) - _polyval(anti, left)
        return float(total)

    def cell_average(self, lo: float, hi: float) -> float:
        """Exact mean value over [lo, hi]."""
        if hi <= lo:
            raise ValueError("empty cell")
        return self.integral(lo, hi) / (hi - lo)

    def cell_averages(self, edges: np.ndarray) -> np.ndarray:
        """Exact mean values over consecutive cells defined by ascending edges."""
        bp = np.asarray(self.breakpoints)
        edges = np.clip(np.asarray(edges, dtype=float), bp[0], bp[-1])
        antis = [np.polynomial.polynomial.polyint(np.array(p)) for p in self.pieces]
        # integral over each whole piece, cumulated
        piece_int = np.array(
            [
                _polyval(antis[j], bp[j + 1]) - _polyval(antis[j], bp[j])
                for j in range(len(self.pieces))
            ]
        )
        cum = np.concatenate([[0.0], np.cumsum(piece_int)])
        idx = np.asarray(self._piece_index(edges))
        vals = np.empty_like(edges)
        for j in np.unique(idx):
            sel = idx == j
            vals[sel] = cum[j] + _polyval(antis[j], edges[sel]) - _polyval(
                antis[j], bp[j]
            )
        return np.diff(vals) / np.diff(edges)

    # -- algebra ---------------------------------------------------------

    def __add__(self, other: "PiecewiseFn") -> "PiecewiseFn":
        if not isinstance(other, PiecewiseFn):
            return NotImplemented
        a1, b1 = self.breakpoints[0], self.breakpoints[-1]
        a2, b2 = other.breakpoints[0], other.breakpoints[-1]
        if abs(a1 - a2) > 1e-12 or abs(b1 - b2) > 1e-12:
            raise ValueError("interval mismatch in piecewise addition")
        bp = np.union1d(self.breakpoints, other.breakpoints)
        pieces = []
        for x0, x1 in zip(bp[:-1], bp[1:]):
            mid = 0.5 * (x0 + x1)
            p1 = np.array(self.pieces[int(self._piece_index(mid))])
            p2 = np.array(other.pieces[int(other._piece_index(mid))])
            n = max(p1.size, p2.size)
            c = np.zeros(n)
            c[: p1.size] += p1
            c[: p2.size] += p2
            pieces.append(tuple(c))
        return PiecewiseFn(tuple(bp), tuple(pieces))

    def scaled(self, factor: float) -> "PiecewiseFn":
        return PiecewiseFn(
            self.breakpoints,
            tuple(tuple(factor * c for c in p) for p in self.pieces),
        )

    def reflected(self) -> "PiecewiseFn":
        """Composition with x -> a + b - x on the same interval."""
        a, b = self.breakpoints[0], self.breakpoints[-1]
        bp = tuple(a + b - x for x in reversed(self.breakpoints))
        sub = np.polynomial.Polynomial([a + b, -1.0])
        pieces = []
        for p in reversed(self.pieces):
            q = np.polynomial.Polynomial(np.array(p))(sub)
            pieces.append(tuple(q.coef))
        return PiecewiseFn(bp, tuple(pieces))

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "breakpoints": list(self.breakpoints),
            "pieces": [list(p) for p in self.pieces],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewiseFn":
        return cls(tuple(d["breakpoints"]), tuple(tuple(p) for p in d["pieces"]))


# ---------------------------------------------------------------------------
# constrained classes


@dataclass(frozen=True)
class SingleWellSpec:
    """Validated single-well function: down then up, values in [0, M]."""

    fn: PiecewiseFn
    transition: float
    upper_bound: float


@dataclass(frozen=True)
class SingleBarrierSpec:
    """Validated single-barrier density: up then down, values in [N_less, N_big]."""

    fn: PiecewiseFn
    transition: float
    lower_bound: float
    upper_bound: float


def _piece_extrema(p: np.ndarray, lo: float, hi: float) -> tuple[float, float]:
    """Min and max of a polynomial over [lo, hi] via derivative roots."""
    xs = [lo, hi]
    d = np.polynomial.polynomial.polyder(p)
    if d.size > 1:
        roots = np.polynomial.polynomial.polyroots(d)
        for r in roots:
            if abs(r.imag) < 1e-12 and lo < r.real < hi:
                xs.append(float(r.real))
    vals = _polyval(p, np.array(xs))
    return float(vals.min()), float(vals.max())


def _piece_derivative_range(p: np.ndarray, lo: float, hi: float) -> tuple[float, float]:
    d = np.polynomial.polynomial.polyder(p)
    if d.size == 0:
        return 0.0, 0.0
    return _piece_extrema(d, lo, hi)


def _monotone_violations(
    fn: PiecewiseFn,
    lo: float,
    hi: float,
    direction: int,
    tol: float,
    grid_n: int,
) -> list[Violation]:
    """Check fn is monotone on [lo, hi]; direction +1 non-decreasing, -1 non-increasing.

    Polynomial pieces of degree >= 2 are checked exactly through derivative
    extrema; jumps and low-degree pieces through one-sided limits and a
    uniform grid.
    """
    if hi - lo <= 0:
        return []
    word = "non-decreasing" if direction > 0 else "non-increasing"
    out: list[Violation] = []
    bp = np.asarray(fn.breakpoints)
    # exact per-piece derivative sign where the piece overlaps [lo, hi]
    for j, p in enumerate(fn.pieces):
        a, b = max(lo, bp[j]), min(hi, bp[j + 1])
        if b <= a:
            continue
        dmin, dmax = _piece_derivative_range(np.array(p), a, b)
        bad = dmax > tol if direction < 0 else dmin < -tol
        if bad:
            worst = dmax if direction < 0 else dmin
            out.append(
                Violation(0.5 * (a + b), f"piece derivative {worst:.3g} not {word}")
            )
    # jumps at interior breakpoints inside [lo, hi]
    for x in fn.breakpoints[1:-1]:
        if lo - tol <= x <= hi + tol:
            l, r = fn.limits(x)
            if direction < 0 and r - l > tol * (1 + abs(l) + abs(r)):
                out.append(Violation(x, f"upward jump {r - l:.3g} where {word}"))
            if direction > 0 and l - r > tol * (1 + abs(l) + abs(r)):
                out.append(Violation(x, f"downward jump {l - r:.3g} where {word}"))
    # grid fallback (covers roundoff pathologies; cheap)
    xs = np.linspace(lo, hi, max(8, int(grid_n * (hi - lo) / fn.interval.length)))
    vals = fn(xs)
    diffs = direction * np.diff(vals)
    bad = np.where(diffs < -max(tol, 1e-12 * np.max(np.abs(vals)) * grid_n))[0]
    if bad.size and not out:
        i = int(bad[np.argmin(diffs[bad])])
        out.append(Violation(float(xs[i]), f"grid values not {word}"))
    return out


def _bound_violations(
    fn: PiecewiseFn, lower: float, upper: float, tol: float
) -> list[Violation]:
    out = []
    bp = np.asarray(fn.breakpoints)
    scale = 1 + abs(lower) + abs(upper)
    for j, p in enumerate(fn.pieces):
        vmin, vmax = _piece_extrema(np.array(p), bp[j], bp[j + 1])
        if vmin < lower - tol * scale:
            out.append(Violation(0.5 * (bp[j] + bp[j + 1]), f"value {vmin:.6g} below {lower:.6g}"))
        if vmax > upper + tol * scale:
            out.append(Violation(0.5 * (bp[j] + bp[j + 1]), f"value {vmax:.6g} above {upper:.6g}"))
    return out


def single_well_violations(
    fn: PiecewiseFn,
    transition: float,
    upper_bound: float,
    tol: float = VALIDATION_TOL,
    grid_n: int = VALIDATION_GRID_N,
) -> list[Violation]:
    """All points where the single-well requirements fail (empty if valid)."""
    iv = fn.interval
    if not iv.contains(transition, tol=1e-12 * (1 + iv.length)):
        raise ValueError(f"transition {transition} outside [{iv.a}, {iv.b}]")
    if upper_bound <= 0:
        raise ValueError("upper bound M must be positive")
    out = _monotone_violations(fn, iv.a, transition, -1, tol, grid_n)
    out += _monotone_violations(fn, transition, iv.b, +1, tol, grid_n)
    out += _bound_violations(fn, 0.0, upper_bound, tol)
    return out


def single_barrier_violations(
    fn: PiecewiseFn,
    transition: float,
    lower_bound: float,
    upper_bound: float,
    tol: float = VALIDATION_TOL,
    grid_n: int = VALIDATION_GRID_N,
) -> list[Violation]:
    """All points where the single-barrier requirements fail (empty if valid)."""
    iv = fn.interval
    if not iv.contains(transition, tol=1e-12 * (1 + iv.length)):
        raise ValueError(f"transition {transition} outside [{iv.a}, {iv.b}]")
    if not 0 < lower_bound <= upper_bound:
        raise ValueError("need 0 < N_less <= N_big")
    out = _monotone_violations(fn, iv.a, transition, +1, tol, grid_n)
    out += _monotone_violations(fn, transition, iv.b, -1, tol, grid_n)
    out += _bound_violations(fn, lower_bound, upper_bound, tol)
    return out


def validate_single_well(
    fn: PiecewiseFn, transition: float, upper_bound: float, **kw
) -> SingleWellSpec:
    """Return the validated spec or raise ValidationError with all failures."""
    violations = single_well_violations(fn, transition, upper_bound, **kw)
    if violations:
        raise ValidationError(violations)
    return SingleWellSpec(fn, float(transition), float(upper_bound))


def validate_single_barrier(
    fn: PiecewiseFn,
    transition: float,
    lower_bound: float,
    upper_bound: float,
    **kw,
) -> SingleBarrierSpec:
    """Return the validated spec or raise ValidationError with all failures."""
    violations = single_barrier_violations(fn, transition, lower_bound, upper_bound, **kw)
    if violations:
        raise ValidationError(violations)
    return SingleBarrierSpec(fn, float(transition), float(lower_bound), float(upper_bound))
