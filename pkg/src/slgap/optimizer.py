"""Gap minimization over single-well potentials and single-barrier densities.

The minimizers are one-jump step functions, so the main search runs over
the five-parameter step family (potential jump location and height,
density jump location and low level, orientations): golden-section over
the jump locations, nested over a bound-respecting coordinate descent on
the levels, from a multistart grid of starting locations.  Candidates
whose orientation and ordering match the canonical step layout are
evaluated through the closed-form step spectrum; the rest fall back to
the finite-difference solver.

A richer search over K-piece monotone piecewise-constant coefficients
(well-shaped potential, barrier-shaped density) corroborates that extra
pieces do not beat the one-jump steps.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .coefficients import (
    Interval,
    PiecewiseFn,
    single_barrier_violations,
    single_well_violations,
)
from .perturbation import PerturbationDirection, gap_derivative
from .solver import Mesh, Problem, SpectralPair, gap, spectral_pair
from .step_spectrum import (
    StepProblem,
    count_eigenvalues_below,
    step_eigenfunction,
    step_gap,
)

__all__ = [
    "SearchSpace",
    "Optimum",
    "minimize_step_family",
    "corroborate_monotone_pwc",
    "verify_stationarity",
]

#: jump locations are kept at least this fraction of the length from the ends
LOCATION_MARGIN = 1e-4

#: stop a descent once a full sweep improves the gap by less than this
SWEEP_TOL = 1e-10

MAX_SWEEPS = 200

_INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SearchSpace:
    """Feasible classes: potentials in [0, M] (single well), densities in
    [N_less, N_big] (single barrier), on the given interval."""

    interval: Interval
    M: float
    N_less: float
    N_big: float
    family: str = "step_family"
    K: int = 4
    mesh_n: int = 512

    def __post_init__(self):
        if self.M < 0:
            raise ValueError("M must be >= 0")
        if not 0 < self.N_less <= self.N_big:
            raise ValueError("need 0 < N_less <= N_big")
        if self.family not in ("step_family", "monotone_pwc"):
            raise ValueError(f"unknown family {self.family!r}")
        if not 1 <= self.K <= 8:
            raise ValueError("K must be between 1 and 8")

    @property
    def potential_active(self) -> bool:
        return self.M > 0

    @property
    def density_active(self) -> bool:
        return self.N_big > self.N_less

    def to_dict(self) -> dict:
        return {
            "interval": [self.interval.a, self.interval.b],
            "M": self.M,
            "N_less": self.N_less,
            "N_big": self.N_big,
            "family": self.family,
            "K": self.K,
            "mesh_n": self.mesh_n,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SearchSpace":
        a, b = d["interval"]
        return cls(
            Interval(float(a), float(b)),
            float(d["M"]),
            float(d["N_less"]),
            float(d["N_big"]),
            d.get("family", "step_family"),
            int(d.get("K", 4)),
            int(d.get("mesh_n", 512)),
        )


@dataclass(frozen=True)
class Optimum:
    """Best candidate found, with its trace and stationarity residual."""

    V_star: PiecewiseFn
    w_star: PiecewiseFn
    gamma: float
    params: dict
    trace: list
    stationarity: float
    space: SearchSpace

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "params": self.params,
            "stationarity": self.stationarity,
            "V": self.V_star.to_dict(),
            "w": self.w_star.to_dict(),
            "space": self.space.to_dict(),
            "trace_length": len(self.trace),
        }


# -- one-dimensional searches ----------------------------------------------


def _golden(f, a: float, b: float, iters: int):
    """Golden-section refinement on [a, b]; returns the best probed point."""
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def _line_min(
    f,
    lo: float,
    hi: float,
    seeds=(),
    scan_n: int = 9,
    iters: int = 40,
    geometric: bool = False,
):
    """Minimize f on [lo, hi]: coarse scan (plus seed points), then
    golden-section on the bracketing triple of the scan minimum.

    With geometric=True the scan also covers [lo, hi] logarithmically,
    which resolves minima many orders of magnitude below hi.
    """
    xs = set(np.linspace(lo, hi, scan_n))
    if geometric and hi > 0:
        g_lo = max(lo, 1e-8 * hi)
        if g_lo < hi:
            xs.update(np.geomspace(g_lo, hi, scan_n))
    for s in seeds:
        if lo <= s <= hi:
            xs.add(float(s))
    xs = np.array(sorted(xs))
    fs = np.array([f(x) for x in xs])
    i = int(np.argmin(fs))
    best_x, best_f = float(xs[i]), float(fs[i])
    a = float(xs[max(i - 1, 0)])
    b = float(xs[min(i + 1, xs.size - 1)])
    if b > a:
        gx, gf = _golden(f, a, b, iters)
        if gf < best_f:
            best_x, best_f = float(gx), float(gf)
    return best_x, best_f


def _local_min(f, x0: float, f0: float, lo: float, hi: float, r0: float, iters: int):
    """Minimize f near x0: expand a symmetric bracket until neither edge
    improves on its interior (or the domain is filled), then golden."""
    r = r0
    for _ in range(60):
        a, b = max(lo, x0 - r), min(hi, x0 + r)
        fa = f(a) if a < x0 else f0
        fb = f(b) if b > x0 else f0
        if (fa >= f0 or a == lo) and (fb >= f0 or b == hi):
            break
        if fa < f0:
            x0, f0 = a, fa
        if fb < f0:
            x0, f0 = b, fb
        r *= 2.0
    else:
        a, b = lo, hi
    gx, gf = _golden(f, a, b, iters)
    if gf < f0:
        return float(gx), float(gf)
    return x0, f0


# -- step-family candidates -------------------------------------------------


@dataclass(frozen=True)
class _Candidate:
    """Point of the step family.  v_low_left: potential is 0 left of x_V
    and C right of it; w_big_left: density is N_big left of x_w."""

    x_V: float
    C: float
    x_w: float
    w_low: float
    v_low_left: bool
    w_big_left: bool


def _candidate_coefficients(
    space: SearchSpace, cand: _Candidate
) -> tuple[PiecewiseFn, PiecewiseFn]:
    iv = space.interval
    if cand.C <= 0:
        V = PiecewiseFn.constant(0.0, iv)
    else:
        left, right = (0.0, cand.C) if cand.v_low_left else (cand.C, 0.0)
        V = PiecewiseFn.step(iv, cand.x_V, left, right)
    if cand.w_low >= space.N_big:
        w = PiecewiseFn.constant(space.N_big, iv)
    else:
        left, right = (
            (space.N_big, cand.w_low) if cand.w_big_left else (cand.w_low, space.N_big)
        )
        w = PiecewiseFn.step(iv, cand.x_w, left, right)
    return V, w


def _candidate_gap(space: SearchSpace, cand: _Candidate) -> float:
    """Gap of a step-family candidate, closed-form whenever the candidate
    matches the canonical one-jump layout (possibly after reflection)."""
    iv = space.interval
    a, b = iv.a, iv.b
    v_const = cand.C <= 0
    w_const = cand.w_low >= space.N_big
    # orient and order; inactive coordinates follow the active ones
    if v_const and w_const:
        mid = 0.5 * (a + b)
        return step_gap(StepProblem(iv, mid, 0.0, mid, space.N_big, space.N_big))
    if w_const:
        if cand.v_low_left:
            sp = StepProblem(iv, cand.x_V, cand.C, cand.x_V, space.N_big, space.N_big)
        else:
            x = a + b - cand.x_V
            sp = StepProblem(iv, x, cand.C, x, space.N_big, space.N_big, reflected=True)
        return step_gap(sp)
    if v_const:
        if cand.w_big_left:
            sp = StepProblem(iv, cand.x_w, 0.0, cand.x_w, space.N_big, cand.w_low)
        else:
            x = a + b - cand.x_w
            sp = StepProblem(iv, x, 0.0, x, space.N_big, cand.w_low, reflected=True)
        return step_gap(sp)
    if cand.v_low_left and cand.w_big_left and cand.x_V <= cand.x_w:
        return step_gap(
            StepProblem(iv, cand.x_V, cand.C, cand.x_w, space.N_big, cand.w_low)
        )
    if not cand.v_low_left and not cand.w_big_left and cand.x_w <= cand.x_V:
        return step_gap(
            StepProblem(
                iv,
                a + b - cand.x_V,
                cand.C,
                a + b - cand.x_w,
                space.N_big,
                cand.w_low,
                reflected=True,
            )
        )
    # mixed orientation or reversed ordering: no closed form, use the solver
    V, w = _candidate_coefficients(space, cand)
    return gap(Problem(iv, V, w), Mesh(iv, space.mesh_n))


class _Tracker:
    """Running best with a monotone (iteration, gamma) trace."""

    def __init__(self):
        self.evals = 0
        self.best_gamma = np.inf
        self.best_cand: _Candidate | None = None
        self.trace: list[tuple[int, float]] = []

    def __call__(self, space: SearchSpace, cand: _Candidate) -> float:
        g = _candidate_gap(space, cand)
        self.evals += 1
        if g < self.best_gamma - 0.0:
            self.best_gamma = g
            self.best_cand = cand
            self.trace.append((self.evals, g))
        return g


def _descend_candidate(
    space: SearchSpace,
    tracker: _Tracker,
    cand: _Candidate,
    sweeps: int,
    scan_n: int,
    iters: int,
    local_after_first: bool = True,
) -> tuple[_Candidate, float]:
    """Cyclic coordinate descent: golden-section over each jump location
    with nested level descent, then over each level within its bounds."""
    iv = space.interval
    margin = LOCATION_MARGIN * iv.length
    lo_x, hi_x = iv.a + margin, iv.b - margin
    gamma = tracker(space, cand)
    state = {"cand": cand, "gamma": gamma}

    def level_descent(c: _Candidate, g: float, use_local: bool) -> tuple[_Candidate, float]:
        if space.potential_active:
            def fC(C):
                return tracker(space, replace(c, C=float(C)))

            if use_local:
                C, g = _local_min(fC, c.C, g, 0.0, space.M, max(1e-6 * space.M, 1e-9), iters)
            else:
                C, g = _line_min(fC, 0.0, space.M, seeds=[c.C], scan_n=scan_n, iters=iters, geometric=True)
            c = replace(c, C=C)
        if space.density_active:
            def fw(wl):
                return tracker(space, replace(c, w_low=float(wl)))

            span = space.N_big - space.N_less
            if use_local:
                wl, g = _local_min(fw, c.w_low, g, space.N_less, space.N_big, 0.05 * span, iters)
            else:
                wl, g = _line_min(fw, space.N_less, space.N_big, seeds=[c.w_low], scan_n=scan_n, iters=iters)
            c = replace(c, w_low=wl)
        return c, g

    # initial full-range level pass from the raw start
    cand, gamma = level_descent(cand, gamma, use_local=False)
    for sweep in range(sweeps):
        gamma_before = gamma
        use_local = local_after_first and sweep > 0
        if space.potential_active:
            def fxV(x):
                c2, g2 = level_descent(replace(cand, x_V=float(x)), np.inf, use_local=True)
                state["cand"], state["gamma"] = c2, g2
                return g2

            x, g = _line_min(fxV, lo_x, hi_x, seeds=[cand.x_V], scan_n=scan_n, iters=iters)
            if g < gamma:
                gamma = g
                fxV(x)  # rebuild the level state at the accepted location
                cand = state["cand"]
                gamma = min(gamma, state["gamma"])
        if space.density_active:
            def fxw(x):
                c2, g2 = level_descent(replace(cand, x_w=float(x)), np.inf, use_local=True)
                state["cand"], state["gamma"] = c2, g2
                return g2

            x, g = _line_min(fxw, lo_x, hi_x, seeds=[cand.x_w], scan_n=scan_n, iters=iters)
            if g < gamma:
                gamma = g
                fxw(x)
                cand = state["cand"]
                gamma = min(gamma, state["gamma"])
        cand, gamma = level_descent(cand, gamma, use_local=use_local)
        if gamma_before - gamma < SWEEP_TOL:
            break
    return cand, gamma


def _starting_points(space: SearchSpace) -> list[_Candidate]:
    """Multistart grid: 3x3 over the two jump locations for the aligned
    orientation class, plus anti-aligned starts when both coefficients
    are free; nine location starts when only one of them is."""
    iv = space.interval
    qs = [iv.a + f * iv.length for f in (0.25, 0.5, 0.75)]
    nines = [iv.a + f * iv.length for f in np.linspace(0.1, 0.9, 9)]
    C0 = min(space.M, 1.0) if space.potential_active else 0.0
    w0 = 0.5 * (space.N_less + space.N_big) if space.density_active else space.N_big
    out = []
    if space.potential_active and space.density_active:
        for xv, xw in itertools.product(qs, qs):
            out.append(_Candidate(xv, C0, xw, w0, True, True))
        for xv in qs:
            out.append(_Candidate(xv, C0, iv.a + iv.b - xv, w0, True, False))
    elif space.potential_active:
        for xv in nines:
            out.append(_Candidate(xv, C0, xv, space.N_big, True, True))
    elif space.density_active:
        for xw in nines:
            out.append(_Candidate(xw, 0.0, xw, w0, True, True))
    else:
        mid = 0.5 * (iv.a + iv.b)
        out.append(_Candidate(mid, 0.0, mid, space.N_big, True, True))
    return out


def _canonical_params(space: SearchSpace, cand: _Candidate) -> tuple[_Candidate, dict]:
    """Reflect if needed so the potential jump (or the density jump when
    the potential is constant) lies in the left half of the interval."""
    iv = space.interval
    mid = 0.5 * (iv.a + iv.b)
    key_x = cand.x_V if cand.C > 0 else cand.x_w
    if (cand.C > 0 or cand.w_low < space.N_big) and key_x > mid:
        cand = _Candidate(
            iv.a + iv.b - cand.x_V,
            cand.C,
            iv.a + iv.b - cand.x_w,
            cand.w_low,
            not cand.v_low_left,
            not cand.w_big_left,
        )
    params = {
        "x_V": cand.x_V,
        "C": cand.C,
        "x_w": cand.x_w,
        "w_low": cand.w_low,
        "v_low_left": cand.v_low_left,
        "w_big_left": cand.w_big_left,
    }
    return cand, params


def minimize_step_family(
    space: SearchSpace,
    screen_sweeps: int = 2,
    refine_sweeps: int = MAX_SWEEPS,
    scan_n: int = 9,
    screen_iters: int = 16,
    refine_iters: int = 48,
    stationarity_mesh_n: int = 4096,
) -> Optimum:
    """Minimize the gap over the one-jump step family.

    Runs a cheap coordinate descent from every multistart point, then
    refines the best start with tight golden-section tolerances.  The
    trace is the monotone sequence of accepted best gaps.
    """
    tracker = _Tracker()
    results = []
    for start in _starting_points(space):
        c, g = _descend_candidate(
            space, tracker, start, screen_sweeps, scan_n, screen_iters
        )
        results.append((g, c))
    results.sort(key=lambda t: (t[0], t[1].x_V, t[1].x_w, t[1].C, t[1].w_low))
    best_g, best_c = results[0]
    best_c, best_g = _descend_candidate(
        space, tracker, best_c, refine_sweeps, scan_n, refine_iters
    )
    if tracker.best_gamma < best_g:
        best_g, best_c = tracker.best_gamma, tracker.best_cand
    best_c, params = _canonical_params(space, best_c)
    V_star, w_star = _candidate_coefficients(space, best_c)
    opt = Optimum(V_star, w_star, float(best_g), params, tracker.trace, np.nan, space)
    resid = verify_stationarity(opt, mesh_n=stationarity_mesh_n)
    return replace(opt, stationarity=float(resid))


# -- monotone piecewise-constant corroboration ------------------------------


@dataclass
class _PwcShape:
    """K-piece monotone shape: levels fall to piece ``pivot`` then rise
    (well) or rise then fall (barrier), within [lo, hi]."""

    breakpoints: list  # interior, length K - 1
    levels: list  # length K
    pivot: int
    lo: float
    hi: float
    well: bool

    def level_bounds(self, i: int) -> tuple[float, float]:
        v, K = self.levels, len(self.levels)
        if self.well:
            if i < self.pivot:
                return (v[i + 1], v[i - 1] if i > 0 else self.hi)
            if i > self.pivot:
                return (v[i - 1], v[i + 1] if i < K - 1 else self.hi)
            down = v[i - 1] if i > 0 else self.hi
            up = v[i + 1] if i < K - 1 else self.hi
            return (self.lo, min(down, up))
        if i < self.pivot:
            return (v[i - 1] if i > 0 else self.lo, v[i + 1])
        if i > self.pivot:
            return (v[i + 1] if i < K - 1 else self.lo, v[i - 1])
        down = v[i - 1] if i > 0 else self.lo
        up = v[i + 1] if i < K - 1 else self.lo
        return (max(down, up), self.hi)

    def to_fn(self, iv: Interval) -> PiecewiseFn:
        bp = [iv.a] + list(self.breakpoints) + [iv.b]
        return PiecewiseFn.from_steps(bp, self.levels)


def _pwc_descent(
    space: SearchSpace,
    shapes: dict,
    evaluate,
    sweeps: int,
    scan_n: int,
    iters: int,
) -> float:
    """Coordinate descent over all levels and breakpoints of the active
    shapes; returns the best gap found (shapes mutated in place)."""
    iv = space.interval
    margin = LOCATION_MARGIN * iv.length
    gamma = evaluate()
    for _ in range(sweeps):
        before = gamma
        for shape in shapes.values():
            K = len(shape.levels)
            for i in range(K - 1):
                left = shape.breakpoints[i - 1] if i > 0 else iv.a
                right = shape.breakpoints[i + 1] if i < K - 2 else iv.b
                lo, hi = left + margin, right - margin
                if hi - lo <= 0:
                    continue
                old = shape.breakpoints[i]

                def f(t):
                    shape.breakpoints[i] = float(t)
                    return evaluate()

                t, g = _line_min(f, lo, hi, seeds=[old], scan_n=scan_n, iters=iters)
                shape.breakpoints[i] = t if g <= gamma else old
                gamma = min(gamma, g) if g <= gamma else evaluate()
            for i in range(K):
                lo, hi = shape.level_bounds(i)
                if hi - lo <= 0:
                    continue
                old = shape.levels[i]

                def f(v):
                    shape.levels[i] = float(v)
                    return evaluate()

                v, g = _line_min(f, lo, hi, seeds=[old], scan_n=scan_n, iters=iters)
                shape.levels[i] = v if g <= gamma else old
                gamma = min(gamma, g) if g <= gamma else evaluate()
        if before - gamma < SWEEP_TOL:
            break
    return gamma


def corroborate_monotone_pwc(
    space: SearchSpace,
    K: int | None = None,
    sweeps: int = 3,
    scan_n: int = 7,
    iters: int = 14,
    stationarity_mesh_n: int = 2048,
) -> Optimum:
    """Search K-piece monotone piecewise-constant coefficients (well V,
    barrier w) with every transition index, to corroborate that one-jump
    steps are not beaten by richer monotone shapes."""
    K = space.K if K is None else K
    if not 1 <= K <= 8:
        raise ValueError("K must be between 1 and 8")
    iv = space.interval
    uniform = list(iv.a + iv.length * np.arange(1, K) / K)
    mesh = Mesh(iv, space.mesh_n)

    trace: list[tuple[int, float]] = []
    evals = [0]

    def make_eval(shapes):
        def evaluate():
            V = (
                shapes["V"].to_fn(iv)
                if "V" in shapes
                else PiecewiseFn.constant(0.0, iv)
            )
            w = (
                shapes["w"].to_fn(iv)
                if "w" in shapes
                else PiecewiseFn.constant(space.N_big, iv)
            )
            evals[0] += 1
            return gap(Problem(iv, V, w), mesh)

        return evaluate

    pivots_V = range(K) if space.potential_active else [None]
    pivots_w = range(K) if space.density_active else [None]
    # breakpoint initializations: uniform, compressed left, compressed right
    inits = [list(uniform)]
    if K > 1:
        frac = 0.35
        inits.append(list(iv.a + frac * iv.length * np.arange(1, K) / K))
        inits.append(list(iv.b - frac * iv.length * (K - np.arange(1, K)) / K))
    best = None
    for jV, jw in itertools.product(pivots_V, pivots_w):
        for bp0 in inits:
            shapes = {}
            if jV is not None:
                levels = [space.M] * K
                levels[jV] = 0.0
                shapes["V"] = _PwcShape(list(bp0), levels, jV, 0.0, space.M, True)
            if jw is not None:
                levels = [space.N_less] * K
                levels[jw] = space.N_big
                shapes["w"] = _PwcShape(
                    list(bp0), levels, jw, space.N_less, space.N_big, False
                )
            g = _pwc_descent(space, shapes, make_eval(shapes), sweeps, scan_n, iters)
            if best is None or g < best[0]:
                best = (g, shapes)
                trace.append((evals[0], g))
    gamma, shapes = best
    # polish the winning configuration with one more sweep round
    gamma = min(
        gamma,
        _pwc_descent(space, shapes, make_eval(shapes), sweeps, scan_n, iters),
    )
    trace.append((evals[0], gamma))
    V_star = shapes["V"].to_fn(iv) if "V" in shapes else PiecewiseFn.constant(0.0, iv)
    w_star = (
        shapes["w"].to_fn(iv) if "w" in shapes else PiecewiseFn.constant(space.N_big, iv)
    )
    params = {
        "family": "monotone_pwc",
        "K": K,
        "V_breakpoints": list(shapes["V"].breakpoints) if "V" in shapes else [],
        "V_levels": list(shapes["V"].levels) if "V" in shapes else [0.0],
        "w_breakpoints": list(shapes["w"].breakpoints) if "w" in shapes else [],
        "w_levels": list(shapes["w"].levels) if "w" in shapes else [space.N_big],
    }
    opt = Optimum(V_star, w_star, float(gamma), params, trace, np.nan, space)
    resid = verify_stationarity(opt, mesh_n=stationarity_mesh_n)
    return replace(opt, stationarity=float(resid))


# -- first-order optimality -------------------------------------------------


def _sup_norm(fn: PiecewiseFn) -> float:
    iv = fn.interval
    xs = np.unique(
        np.concatenate([np.linspace(iv.a, iv.b, 129), np.asarray(fn.breakpoints)])
    )
    vals = [abs(fn(x)) for x in xs]
    for x in fn.breakpoints[1:-1]:
        vals.extend(abs(v) for v in fn.limits(x))
    return float(max(vals))


def _stays_in_class(probe: PiecewiseFn, well: bool, lo: float, hi: float) -> bool:
    """Whether the probe is single-well (or single-barrier) for some
    transition point, with values within [lo, hi]."""
    iv = probe.interval
    transitions = set(probe.breakpoints)
    bp = probe.breakpoints
    transitions.update(0.5 * (x0 + x1) for x0, x1 in zip(bp[:-1], bp[1:]))
    for a in sorted(transitions):
        try:
            if well:
                v = single_well_violations(probe, a, max(hi, 1e-300))
            else:
                v = single_barrier_violations(probe, a, lo, hi)
        except ValueError:
            continue
        if not v:
            return True
    return False


def _comparison_directions(opt: Optimum) -> list[PerturbationDirection]:
    """First-order comparison directions V1 - V_* and w1 - w_* for a
    family of one-jump class members V1, w1 (plus the constant extremes),
    scaled to unit sup norm.

    Only admissible directions are kept: the segment toward V1 (or w1)
    must stay inside the single-well (single-barrier) class, which a
    mixture of oppositely oriented monotone steps does not."""
    space = opt.space
    iv = space.interval
    probe_t = 1.0 / 1024.0
    xs = list(iv.a + iv.length * np.linspace(0.1, 0.9, 9))
    xs += [x for x in opt.V_star.jump_locations() + opt.w_star.jump_locations()]
    xs = sorted({float(x) for x in xs if iv.a < x < iv.b})
    dirs = []

    def add(base: PiecewiseFn, target: PiecewiseFn, well: bool, lo: float, hi: float):
        diff = target + base.scaled(-1.0)
        norm = _sup_norm(diff)
        if norm < 1e-14:
            return
        probe = base + diff.scaled(probe_t)
        if not _stays_in_class(probe, well, lo, hi):
            return
        fn = diff.scaled(1.0 / norm)
        if well:
            dirs.append(PerturbationDirection(dV=fn))
        else:
            dirs.append(PerturbationDirection(dw=fn))

    if space.potential_active:
        cands = [
            PiecewiseFn.constant(0.0, iv),
            PiecewiseFn.constant(space.M, iv),
        ]
        for x in xs:
            cands.append(PiecewiseFn.step(iv, x, 0.0, space.M))
            cands.append(PiecewiseFn.step(iv, x, space.M, 0.0))
        for V1 in cands:
            add(opt.V_star, V1, True, 0.0, space.M)
    if space.density_active:
        cands = [
            PiecewiseFn.constant(space.N_less, iv),
            PiecewiseFn.constant(space.N_big, iv),
        ]
        for x in xs:
            cands.append(PiecewiseFn.step(iv, x, space.N_less, space.N_big))
            cands.append(PiecewiseFn.step(iv, x, space.N_big, space.N_less))
        for w1 in cands:
            add(opt.w_star, w1, False, space.N_less, space.N_big)
    return dirs


def _optimum_pair(opt: Optimum, mesh_n: int) -> SpectralPair:
    """Spectral pair at the optimum; closed-form eigenfunctions when the
    optimum is a canonical step pair with both eigenvalues above the
    secular threshold (where thin sub-grid regions defeat the solver)."""
    space = opt.space
    iv = space.interval
    problem = Problem(iv, opt.V_star, opt.w_star)
    mesh = Mesh(iv, mesh_n)
    p = opt.params
    if {"x_V", "C", "x_w", "w_low"} <= set(p):
        cand = _Candidate(
            p["x_V"], p["C"], p["x_w"], p["w_low"], p["v_low_left"], p["w_big_left"]
        )
        sp = None
        a, b = iv.a, iv.b
        if cand.C <= 0 and cand.w_low >= space.N_big:
            mid = 0.5 * (a + b)
            sp = StepProblem(iv, mid, 0.0, mid, space.N_big, space.N_big)
        elif cand.w_low >= space.N_big:
            x = cand.x_V if cand.v_low_left else a + b - cand.x_V
            sp = StepProblem(
                iv, x, cand.C, x, space.N_big, space.N_big,
                reflected=not cand.v_low_left,
            )
        elif cand.C <= 0:
            x = cand.x_w if cand.w_big_left else a + b - cand.x_w
            sp = StepProblem(
                iv, x, 0.0, x, space.N_big, cand.w_low,
                reflected=not cand.w_big_left,
            )
        elif cand.v_low_left and cand.w_big_left and cand.x_V <= cand.x_w:
            sp = StepProblem(iv, cand.x_V, cand.C, cand.x_w, space.N_big, cand.w_low)
        elif not cand.v_low_left and not cand.w_big_left and cand.x_w <= cand.x_V:
            sp = StepProblem(
                iv, a + b - cand.x_V, cand.C, a + b - cand.x_w,
                space.N_big, cand.w_low, reflected=True,
            )
        if sp is not None and count_eigenvalues_below(sp, sp.threshold) == 0:
            from .step_spectrum import eigenvalues_step

            lam1, lam2 = eigenvalues_step(sp, 2)
            u1 = np.asarray(step_eigenfunction(sp, lam1)(mesh.nodes), dtype=float)
            u2 = np.asarray(step_eigenfunction(sp, lam2)(mesh.nodes), dtype=float)
            w_nodes = problem.w.cell_averages(mesh.dual_edges)
            # renormalize on the mesh quadrature so the Feynman-Hellmann
            # integrals see an exactly unit-norm pair
            u1 = u1 / np.sqrt(mesh.quad(w_nodes * u1**2))
            u2 = u2 / np.sqrt(mesh.quad(w_nodes * u2**2))
            return SpectralPair(float(lam1), float(lam2), u1, u2, mesh, w_nodes)
    return spectral_pair(problem, mesh)


def verify_stationarity(opt: Optimum, mesh_n: int = 4096) -> float:
    """Most negative gap derivative along sampled admissible directions
    (V1 - V_*, w1 - w_*); near a minimizer this should be >= -tol.

    Returns 0.0 when the feasible set admits no direction (M = 0 and
    N_less = N_big).
    """
    dirs = _comparison_directions(opt)
    if not dirs:
        return 0.0
    pair = _optimum_pair(opt, mesh_n)
    return float(min(gap_derivative(pair, d) for d in dirs))
