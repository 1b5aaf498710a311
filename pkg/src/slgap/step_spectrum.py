"""Closed-form spectrum of one-jump step-coefficient problems.

For the canonical step pair

    V(x) = 0 on (a, x_minus),            Vmax on (x_minus, b)
    w(x) = N_big on (a, xhat_minus),     w_low on (xhat_minus, b)

with x_minus <= xhat_minus, an eigenfunction is a sine in each of the
three constant-coefficient regions and matching u, u' at the two jumps
collapses to a single transcendental equation in lambda.  Its real roots
above the threshold Vmax / w_low are exactly the eigenvalues there.

The residual is evaluated in product form

    G(lambda) = eta sin(z L_r) cos(Theta) + z cos(z L_r) sin(Theta),
    Theta = eta (xhat_minus - x_minus) + unwrap(arctan((eta/t) tan(t (x_minus - a))))

which is continuous in lambda (no tangent poles); the arctan term is
unwrapped to the continuous branch so no roots are lost near poles of
tan(t (x_minus - a)).

Eigenvalues below the threshold (possible for large Vmax, where the
right region is evanescent rather than oscillatory) are outside the
closed form's validity; `step_spectrum_full` delegates those indices to
the finite-difference solver.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .coefficients import Interval, PiecewiseFn
from .solver import Mesh, Problem, SolverError, solve

__all__ = [
    "StepProblem",
    "SecularParams",
    "StepEigenfunction",
    "secular_residual",
    "eigenvalues_step",
    "count_eigenvalues_below",
    "step_gap",
    "step_spectrum_full",
    "step_eigenfunction",
]


@dataclass(frozen=True)
class StepProblem:
    """One-jump step potential and density on an interval.

    Canonical orientation: potential jumps up at x_minus, density jumps
    down at xhat_minus, with a < x_minus <= xhat_minus < b.  A reflected
    instance represents the mirror image x -> a + b - x (same spectrum).
    """

    interval: Interval
    x_minus: float
    Vmax: float
    xhat_minus: float
    N_big: float
    w_low: float
    reflected: bool = False

    def __post_init__(self):
        a, b = self.interval.a, self.interval.b
        if not (a < self.x_minus <= self.xhat_minus < b):
            raise ValueError("need a < x_minus <= xhat_minus < b")
        if self.Vmax < 0:
            raise ValueError("Vmax must be >= 0")
        if not 0 < self.w_low <= self.N_big:
            raise ValueError("need 0 < w_low <= N_big")

    @property
    def threshold(self) -> float:
        """Validity threshold max(V)/min(w) of the secular equation."""
        return self.Vmax / self.w_low

    def to_problem(self) -> Problem:
        """The equivalent piecewise-constant-coefficient Problem."""
        iv = self.interval
        a, b = iv.a, iv.b
        eps = 1e-12 * iv.length

        def step(jump, left, right):
            if jump - a < eps or b - jump < eps:
                return PiecewiseFn.constant(left if b - jump < eps else right, iv)
            return PiecewiseFn.step(iv, jump, left, right)

        V = step(self.x_minus, 0.0, self.Vmax)
        w = step(self.xhat_minus, self.N_big, self.w_low)
        if self.reflected:
            V, w = V.reflected(), w.reflected()
        return Problem(iv, V, w)


@dataclass(frozen=True)
class SecularParams:
    """Wave numbers of the three constant-coefficient regions."""

    eta: float  # middle region: sqrt(lambda N_big - Vmax)
    z: float  # right region: sqrt(lambda w_low - Vmax)
    t: float  # left region: sqrt(lambda N_big)

    @classmethod
    def at(cls, sp: StepProblem, lam: float) -> "SecularParams":
        if lam <= sp.threshold:
            raise ValueError(
                f"lambda={lam:.6g} at or below validity threshold {sp.threshold:.6g}"
            )
        return cls(
            float(np.sqrt(lam * sp.N_big - sp.Vmax)),
            float(np.sqrt(lam * sp.w_low - sp.Vmax)),
            float(np.sqrt(lam * sp.N_big)),
        )


def _unwrapped_atan_tan(theta: float, c: float) -> float:
    """Continuous branch of arctan(c * tan(theta)) for c > 0.

    Equals the principal value on (-pi/2, pi/2) and increases by pi across
    each pole of tan, matching the phase of c sin(theta), cos(theta).
    """
    k = np.floor(theta / np.pi + 0.5)
    r = theta - k * np.pi
    return float(k * np.pi + np.arctan(c * np.tan(r)))


def secular_residual(sp: StepProblem, lam: float) -> float:
    """Pole-free residual G(lambda); zero exactly at eigenvalues above the
    threshold.

    G is the product form of eta tan(z L_r) = -z tan(Theta): both sides
    multiplied by cos(z L_r) cos(Theta), with Theta carried on a
    continuous branch.
    """
    p = SecularParams.at(sp, lam)
    a = sp.interval.a
    left_width = sp.x_minus - a
    mid_width = sp.xhat_minus - sp.x_minus
    right_width = sp.interval.b - sp.xhat_minus
    phi0 = _unwrapped_atan_tan(p.t * left_width, p.eta / p.t)
    theta = p.eta * mid_width + phi0
    zl = p.z * right_width
    return float(p.eta * np.sin(zl) * np.cos(theta) + p.z * np.cos(zl) * np.sin(theta))


def _phase_rate_bound(sp: StepProblem, s: float) -> float:
    """Upper bound on d(total phase)/ds at lambda = threshold + s^2."""
    a, b = sp.interval.a, sp.interval.b
    lw, mw, rw = sp.x_minus - a, sp.xhat_minus - sp.x_minus, b - sp.xhat_minus
    sqrt_wl = np.sqrt(sp.w_low)
    sqrt_N = np.sqrt(sp.N_big)
    return rw * sqrt_wl + mw * sqrt_N + lw * sp.N_big / sqrt_wl + 1e-12


def eigenvalues_step(
    sp: StepProblem,
    k: int = 2,
    lam_max: float | None = None,
) -> np.ndarray:
    """First k secular roots above the validity threshold.

    Scans lambda = threshold + s^2 with steps bounded by the shortest
    tangent period of the three regions, brackets sign changes of the
    continuous residual, and polishes each bracket to ~1e-12 relative.

    Raises SolverError if fewer than k roots exist below lam_max.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    roots: list[float] = []
    th = sp.threshold
    scale = max(1.0, th)
    s = 1e-7 * np.sqrt(scale)
    f_prev = secular_residual(sp, th + s**2)
    s_prev = s
    while len(roots) < k:
        ds = (np.pi / 8.0) / _phase_rate_bound(sp, s)
        # near s=0 the phase is linear in s, so a plain cap suffices
        s = s_prev + min(ds, 0.25 * np.sqrt(scale) + 0.1)
        lam = th + s**2
        if lam_max is not None and lam > lam_max and len(roots) < k:
            if th + s_prev**2 > lam_max:
                raise SolverError(
                    f"only {len(roots)} secular roots below lam_max={lam_max:.6g}"
                )
            lam = lam_max
            s = np.sqrt(lam - th)
        f = secular_residual(sp, lam)
        if f == 0.0:
            roots.append(lam)
        elif np.sign(f) != np.sign(f_prev):
            lo, hi = th + s_prev**2, lam
            root = brentq(
                lambda l: secular_residual(sp, l), lo, hi, rtol=4e-15, maxiter=200
            )
            roots.append(float(root))
        s_prev, f_prev = s, f
        if lam_max is not None and lam >= lam_max:
            if len(roots) < k:
                raise SolverError(
                    f"only {len(roots)} secular roots below lam_max={lam_max:.6g}"
                )
            break
    return np.array(roots[:k])


def _shoot(sp: StepProblem, lam: float) -> tuple[float, int]:
    """Propagate u(a) = 0, u'(a) = 1 to b in closed form.

    Returns (u(b) up to a positive factor, interior zero count).  Each
    region is a constant-coefficient piece: oscillatory pieces advance an
    exact Pruefer phase (zeros are its pi-crossings), hyperbolic pieces
    use the tanh form with the common cosh factor dropped, which keeps
    the propagation overflow-free and preserves the sign of u.
    """
    iv = sp.interval
    regions = [
        (sp.x_minus - iv.a, lam * sp.N_big),
        (sp.xhat_minus - sp.x_minus, lam * sp.N_big - sp.Vmax),
        (iv.b - sp.xhat_minus, lam * sp.w_low - sp.Vmax),
    ]
    u, du = 0.0, 1.0
    zeros = 0
    for width, ksq in regions:
        if width <= 0:
            continue
        # a zero sitting exactly on a region edge was already counted by
        # the previous region; snap it so the phase does not recount it
        if abs(u) <= 1e-11 * abs(du):
            u = 0.0
        if ksq > 1e-14 * max(1.0, abs(lam)):
            k = np.sqrt(ksq)
            theta0 = np.arctan2(k * u, du) % np.pi
            zeros += int(np.floor((theta0 + k * width) / np.pi))
            c, s = np.cos(k * width), np.sin(k * width)
            u, du = u * c + (du / k) * s, -u * k * s + du * c
        else:
            if ksq < -1e-14 * max(1.0, abs(lam)):
                kappa = np.sqrt(-ksq)
                t = np.tanh(kappa * width)
                u_new = u + (du / kappa) * t
                du_new = u * kappa * t + du
            else:
                u_new = u + du * width
                du_new = du
            if u != 0.0 and u_new != 0.0 and np.sign(u_new) == -np.sign(u):
                zeros += 1
            u, du = u_new, du_new
        # renormalize to avoid scale drift between regions
        scale = max(abs(u), abs(du))
        if scale > 0:
            u, du = u / scale, du / scale
    return float(u), zeros


def count_eigenvalues_below(sp: StepProblem, lam: float) -> int:
    """Exact number of eigenvalues strictly below lam, by Sturm
    oscillation: the interior zero count of the shooting solution."""
    return _shoot(sp, lam)[1]


def eigenvalues_below_threshold(sp: StepProblem, k: int) -> np.ndarray:
    """First k eigenvalues below the secular threshold, by shooting.

    Each eigenvalue is bracketed with bisection on the exact zero count
    (count = m - 1 on the left, m on the right), then polished as a root
    of u(b; lambda).  Requires count_eigenvalues_below(threshold) >= k.
    """
    th = sp.threshold
    out = []
    for m in range(1, k + 1):
        lo, hi = 0.0, th
        if count_eigenvalues_below(sp, hi) < m:
            raise SolverError(f"fewer than {m} eigenvalues below the threshold")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if count_eigenvalues_below(sp, mid) >= m:
                hi = mid
            else:
                lo = mid
        if lo == 0.0:
            # no strictly positive left edge found; widen minimally
            lo = np.nextafter(0.0, 1.0)
        flo, fhi = _shoot(sp, lo)[0], _shoot(sp, hi)[0]
        if np.sign(flo) != np.sign(fhi):
            root = brentq(lambda l: _shoot(sp, l)[0], lo, hi, rtol=4e-15, maxiter=200)
        else:
            # the count bisection has pinched the eigenvalue to float
            # precision but u(b) does not change sign across the pair of
            # adjacent floats (zero grazing a region edge)
            root = 0.5 * (lo + hi)
        out.append(float(root))
    return np.array(out)


def step_gap(sp: StepProblem) -> float:
    """Gap lambda2 - lambda1 entirely in closed form: secular roots above
    the validity threshold, shooting roots below it."""
    th = sp.threshold
    n_below = count_eigenvalues_below(sp, th) if th > 0 else 0
    if n_below == 0:
        lam = eigenvalues_step(sp, 2)
        return float(lam[1] - lam[0])
    if n_below >= 2:
        lam = eigenvalues_below_threshold(sp, 2)
        return float(lam[1] - lam[0])
    lam1 = eigenvalues_below_threshold(sp, 1)[0]
    lam2 = eigenvalues_step(sp, 1)[0]
    return float(lam2 - lam1)


def step_spectrum_full(
    sp: StepProblem,
    k: int = 2,
    mesh_n: int = 2048,
) -> np.ndarray:
    """First k eigenvalues, delegating below-threshold indices to the
    finite-difference solver.

    The secular closed form only covers lambda > Vmax / w_low; when the
    lowest eigenvalues sit below that (deep well), they are computed by
    the matrix solver instead and a warning is issued.
    """
    th = sp.threshold
    n_below = count_eigenvalues_below(sp, th) if th > 0 else 0
    if n_below == 0:
        return eigenvalues_step(sp, k)
    warnings.warn(
        f"{min(n_below, k)} eigenvalue(s) below the secular threshold {th:.6g} "
        "taken from the finite-difference solver",
        stacklevel=2,
    )
    res = solve(sp.to_problem(), Mesh(sp.interval, mesh_n), k=min(max(k, n_below), 10))
    if n_below >= k:
        return res.lambdas[:k].copy()
    above = eigenvalues_step(sp, k - n_below)
    return np.concatenate([res.lambdas[:n_below], above])


@dataclass(frozen=True)
class StepEigenfunction:
    """Closed-form eigenfunction of a step problem at a secular root.

    In canonical orientation, with s = x - a:

        alpha1 sin(t s)                                   on (a, x_minus)
        beta1 sin(eta (x - x_minus)) + beta2 cos(...)     on (x_minus, xhat_minus)
        alpha2 sin(z (b - x))                             on (xhat_minus, b)

    Reflected instances evaluate the canonical form at a + b - x.
    """

    sp: StepProblem
    lam: float
    params: SecularParams
    alpha1: float
    beta1: float
    beta2: float
    alpha2: float

    def __call__(self, x):
        xv = np.asarray(x, dtype=float)
        iv = self.sp.interval
        if self.sp.reflected:
            xv = iv.a + iv.b - xv
        p = self.params
        s = xv - iv.a
        out = np.empty_like(xv)
        left = xv <= self.sp.x_minus
        right = xv >= self.sp.xhat_minus
        mid = ~left & ~right
        out[left] = self.alpha1 * np.sin(p.t * s[left])
        th = p.eta * (xv[mid] - self.sp.x_minus)
        out[mid] = self.beta1 * np.sin(th) + self.beta2 * np.cos(th)
        out[right] = self.alpha2 * np.sin(p.z * (iv.b - xv[right]))
        if out.ndim == 0:
            return float(out)
        return out


def step_eigenfunction(
    sp: StepProblem, lam: float, matching_tol: float = 1e-8
) -> StepEigenfunction:
    """Matched, weighted-normalized closed-form eigenfunction at a root.

    Raises ValueError if lambda is not a secular root (the two interface
    conditions at xhat_minus cannot both be met).
    """
    p = SecularParams.at(sp, lam)
    iv = sp.interval
    lw = sp.x_minus - iv.a
    mw = sp.xhat_minus - sp.x_minus
    rw = iv.b - sp.xhat_minus
    alpha1 = 1.0
    beta2 = alpha1 * np.sin(p.t * lw)
    beta1 = (p.t * alpha1 / p.eta) * np.cos(p.t * lw)
    # value and slope of the middle piece at xhat_minus
    th = p.eta * mw
    u_mid = beta1 * np.sin(th) + beta2 * np.cos(th)
    du_mid = p.eta * (beta1 * np.cos(th) - beta2 * np.sin(th))
    # third piece: u = alpha2 sin(z (b - x)), u' = -alpha2 z cos(z (b - x))
    sin_r, cos_r = np.sin(p.z * rw), np.cos(p.z * rw)
    if abs(sin_r) >= abs(p.z * cos_r) / max(p.z, 1.0):
        alpha2 = u_mid / sin_r
    else:
        alpha2 = -du_mid / (p.z * cos_r)
    scale = max(abs(u_mid), abs(du_mid) / max(p.z, 1.0), 1e-30)
    resid = max(
        abs(alpha2 * sin_r - u_mid),
        abs(-alpha2 * p.z * cos_r - du_mid) / max(p.z, 1.0),
    )
    if resid > matching_tol * scale:
        raise ValueError(
            f"lambda={lam!r} is not a secular root (matching residual {resid:.3g})"
        )
    fn = StepEigenfunction(sp, float(lam), p, alpha1, float(beta1), float(beta2), float(alpha2))
    # weighted normalization: integral of w u^2 over the three regions
    prob = sp.to_problem()
    a, b = iv.a, iv.b
    cuts = sorted({a, sp.x_minus, sp.xhat_minus, b})
    if sp.reflected:
        cuts = sorted(a + b - np.array(cuts))
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        wval = prob.w((lo + hi) / 2)
        val, _ = quad(lambda x: fn(x) ** 2, lo, hi, limit=200, epsabs=1e-13, epsrel=1e-12)
        total += wval * val
    norm = 1.0 / np.sqrt(total)
    # sign: positive just inside the left endpoint
    probe = fn(a + 1e-6 * iv.length)
    if probe < 0:
        norm = -norm
    return StepEigenfunction(
        sp,
        float(lam),
        p,
        fn.alpha1 * norm,
        fn.beta1 * norm,
        fn.beta2 * norm,
        fn.alpha2 * norm,
    )
