"""Verification harnesses built on the oracle and the WKB engine.

* :func:`error_scan` checks the certified approximation on a grid.
* :func:`envelope_scan` and :func:`integral_bound_scan` check the Sonin
  envelope, the amplitude factor mu and the bounds on the integral of |eps b|.
* :func:`invert_phase`, :func:`wkb_zero_seeds` and :func:`refine_zeros` find
  zeros from the phase, :func:`bisect_roots` and :func:`largest_zero` find
  them by sign changes alone, and :func:`xmax_bounds` brackets the largest.
* :func:`mass_concentration` computes the weighted L2 mass of the
  orthonormal polynomial inside ``|x| <= eta``.
* :func:`central_binom_check` and :func:`benchmark_eval` cover the remaining
  numeric claims and the timing report.

Every report is assembled in grid order, so results are reproducible bit for
bit for a fixed input.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import _accel, kernels
from .errors import ConvergenceError, DomainError, InputError, RangeError
from .oracle import (
    DEFAULT_DIGITS,
    CoeffVector,
    PrecisionContext,
    build_coeffs,
    eval_g_exact,
    eval_g_prime_exact,
    eval_p,
    eval_p_prime,
    l2_norm_sq,
)
from .params import SQRT_7_6, UltraParams, theorem_interval
from .quadrature import adaptive_integrate
from .wkb import (
    A1_eval,
    abs_eps_b_integral_quadrature,
    approx_g_grid,
    eps_b_integral_closed,
    eps_b_integral_quadrature,
    g_zero,
    g_zero_exact,
    mu_bound,
    r_bound,
    sonin_S,
)

__all__ = [
    "SCAN_SLACK",
    "ScanReport",
    "EnvelopeReport",
    "IntegralReport",
    "ZeroSet",
    "XmaxBracket",
    "MassReport",
    "BinomRow",
    "BenchReport",
    "phi_grid",
    "error_scan",
    "envelope_scan",
    "integral_bound_scan",
    "invert_phase",
    "wkb_zero_seeds",
    "refine_zeros",
    "bisect_roots",
    "largest_zero",
    "xmax_bounds",
    "mass_concentration",
    "adaptive_integrate",
    "central_binom_rows",
    "central_binom_check",
    "benchmark_eval",
]

SCAN_SLACK = 1e-10  # absolute-plus-relative slack on the certified radius
MIN_GRID = 16
NEWTON_MAX_ITER = 50


def _digits(ctx) -> int:
    if ctx is None:
        return DEFAULT_DIGITS
    if isinstance(ctx, PrecisionContext):
        return ctx.digits
    return PrecisionContext(int(ctx)).digits


def _require_even(p: UltraParams, what: str):
    if p.k % 2:
        raise DomainError(f"odd k: {what} not defined by Theorem 1")


def phi_grid(x_end: float, n: int) -> np.ndarray:
    """``x_end * sin(phi_j)`` with phi_j uniform on ``[0, pi/2 - pi/(4n)]``.

    The stretching puts points where cos B oscillates fastest, near the
    turning point, and keeps the last point off the endpoint.
    """
    if n < MIN_GRID:
        raise InputError(f"grid needs at least {MIN_GRID} points, got {n}")
    phi = np.linspace(0.0, math.pi / 2 - math.pi / (4 * n), n)
    return x_end * np.sin(phi)


# --------------------------------------------------------------------------
# certification scans


@dataclass(frozen=True)
class ScanReport:
    """Grid check of |g/g(0) - cos B| <= r_bound.

    ``max_violation`` is the largest ``|r_measured| - r_bound`` over points
    with a finite bound; it is negative when every point passes outright.
    ``passed`` applies the slack ``SCAN_SLACK * (1 + r_bound)``.
    """

    params: UltraParams
    grid_size: int
    max_violation: float
    worst_x: float
    certified_fraction: float
    passed: bool
    timing: float
    x: np.ndarray = field(repr=False)
    cos_B: np.ndarray = field(repr=False)
    ratio: np.ndarray = field(repr=False)
    r_bound: np.ndarray = field(repr=False)

    @property
    def violation(self) -> np.ndarray:
        return np.abs(self.ratio - self.cos_B) - self.r_bound

    def rows(self) -> list[dict]:
        return [
            {"x": x, "cos_B": c, "g_ratio": g, "r_measured": abs(g - c), "r_bound": r, "violation": abs(g - c) - r}
            for x, c, g, r in zip(self.x.tolist(), self.cos_B.tolist(), self.ratio.tolist(), self.r_bound.tolist())
        ]


def _ratios(p: UltraParams, cv: CoeffVector, xs) -> np.ndarray:
    g0 = eval_g_exact(p, cv, 0.0)
    return np.array([float(eval_g_exact(p, cv, float(x)) / g0) for x in xs])


def error_scan(p: UltraParams, n_points: int = 256, ctx=None, x_end: float | None = None) -> ScanReport:
    """Compare the oracle against the certified main term on a phi-uniform grid.

    Parameters
    ----------
    p : UltraParams
        Even ``k`` only.
    n_points : int
        Grid size, at least 16.
    ctx : PrecisionContext or int, optional
        Oracle precision in decimal digits.
    x_end : float, optional
        Right end of the grid; defaults to the end of the theorem interval.

    Examples
    --------
    >>> from oscpoly.params import derive_params
    >>> error_scan(derive_params(2, 0.0), 16).passed
    True
    """
    _require_even(p, "approximation")
    t0 = time.perf_counter()
    end = theorem_interval(p).x_end if x_end is None else float(x_end)
    xs = phi_grid(end, n_points)
    cv = build_coeffs(p.k, p.alpha, _digits(ctx))
    B = kernels.phase_closed(p.u, p.q, p.one_minus_q, xs)
    r = r_bound(p, xs)
    ratio = _ratios(p, cv, xs)
    cosB = np.cos(B)
    finite = np.isfinite(r)
    viol = np.where(finite, np.abs(ratio - cosB) - r, -np.inf)
    i = int(np.argmax(viol))
    ok = bool(np.all(~finite | (np.abs(ratio - cosB) <= r + SCAN_SLACK * (1 + r))))
    return ScanReport(
        params=p,
        grid_size=n_points,
        max_violation=float(viol[i]),
        worst_x=float(xs[i]),
        certified_fraction=float(np.mean(finite)),
        passed=ok,
        timing=time.perf_counter() - t0,
        x=xs,
        cos_B=cosB,
        ratio=ratio,
        r_bound=r,
    )


@dataclass(frozen=True)
class EnvelopeReport:
    """Sonin envelope and amplitude checks on one grid.

    ``max_excess`` is the largest ``(g^2 - S)/S`` over points with A1 > 0;
    ``s0_rel_err`` compares S(0) with the closed form of g(0)^2.
    """

    params: UltraParams
    grid_size: int
    max_excess: float
    n_skipped: int
    s0_rel_err: float
    max_ratio: float
    mu: float

    @property
    def envelope_ok(self) -> bool:
        return self.max_excess <= 0.0

    @property
    def mu_ok(self) -> bool:
        return self.max_ratio <= self.mu * (1 + 1e-8)


def envelope_scan(p: UltraParams, n_points: int = 256, ctx=None) -> EnvelopeReport:
    """Check g^2 <= S, S(0) = g(0)^2 and max |g/g(0)| <= mu on the theorem interval."""
    _require_even(p, "envelope")
    digits = _digits(ctx)
    cv = build_coeffs(p.k, p.alpha, digits)
    mp = cv.mp
    xs = phi_grid(theorem_interval(p).x_end, n_points)
    g0 = eval_g_exact(p, cv, 0.0)
    closed = g_zero_exact(p, digits)
    S0 = sonin_S(p, 0.0, g0, eval_g_prime_exact(p, cv, 0.0))
    s0_err = float(abs(S0 - closed * closed) / (closed * closed))
    excess = -math.inf
    skipped = 0
    max_ratio = 0.0
    for x in xs.tolist():
        g = eval_g_exact(p, cv, x)
        max_ratio = max(max_ratio, float(abs(g / g0)))
        if not A1_eval(p, x) > 0:
            skipped += 1
            continue
        S = sonin_S(p, x, g, eval_g_prime_exact(p, cv, x))
        # g^2 == S exactly wherever g' vanishes; allow the oracle's own rounding
        e = float((g * g - S) / S) - mp.mpf(10) ** (-(digits - 10))
        excess = max(excess, float(e))
    return EnvelopeReport(p, n_points, excess, skipped, s0_err, max_ratio, mu_bound(p))


@dataclass(frozen=True)
class IntegralReport:
    """Quadrature of the |eps b| integral against its bound, and the closed form of the eps b integral."""

    params: UltraParams
    grid_size: int
    max_bound_ratio: float  # max of quadrature / bound, <= 1 when the bound holds
    closed_max_err: float  # nan when q <= 0
    n_points_checked: int

    @property
    def bound_ok(self) -> bool:
        return self.max_bound_ratio <= 1.0


def integral_bound_scan(p: UltraParams, n_points: int = 256, closed_tol: float = 1e-10,
                        rtol: float = 1e-11) -> IntegralReport:
    """Check the integral bound on the theorem-interval grid (points strictly inside the turning point)."""
    xs = phi_grid(theorem_interval(p).x_end, n_points)
    turning = p.turning_point
    xs = xs[(xs > 0) & (xs < turning)]
    bounds = kernels.eps_b_bound(p.u, p.q, p.one_minus_q, xs)
    worst = 0.0
    closed_err = math.nan if p.q <= 0 else 0.0
    for x, bd in zip(xs.tolist(), bounds.tolist()):
        val = abs_eps_b_integral_quadrature(p, x, 1e-14, rtol)
        worst = max(worst, val / bd)
        if p.q > 0:
            c = float(eps_b_integral_closed(p, x))
            J = eps_b_integral_quadrature(p, x, 1e-14, rtol)
            closed_err = max(closed_err, abs(c - J) / max(1.0, abs(c)))
    return IntegralReport(p, n_points, worst, closed_err, len(xs))


# --------------------------------------------------------------------------
# phase inversion and zeros


def invert_phase(p: UltraParams, target: float, tol: float = 1e-12) -> float:
    """Solve B(x) = target on the theorem interval.

    Bisection narrows the bracket, then Newton with B' = b finishes; any
    Newton step that leaves the bracket is replaced by a bisection step.

    Raises
    ------
    RangeError
        If ``target`` is negative or exceeds B at the end of the interval.
    """
    x_end = theorem_interval(p).x_end
    u, q, w = p.u, p.q, p.one_minus_q
    B_end = kernels.phase_closed(u, q, w, x_end)
    if not (0.0 <= target <= B_end + 4 * np.finfo(float).eps * B_end):
        raise RangeError(f"target {target} outside [0, B(x_end) = {B_end}]")
    if target == 0.0:
        return 0.0
    if target >= B_end:
        return x_end
    lo, hi = 0.0, x_end
    while hi - lo > 1e-3 * x_end:
        mid = 0.5 * (lo + hi)
        if kernels.phase_closed(u, q, w, mid) < target:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(200):
        f = kernels.phase_closed(u, q, w, x) - target
        if abs(f) <= tol:
            return x
        if f < 0:
            lo = x
        else:
            hi = x
        b = kernels.b_values(u, q, w, x)
        nxt = x - f / b if b > 0 else math.nan
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if nxt == x or hi - lo <= 2 * math.ulp(hi):
            return x
        x = nxt
    return x


def wkb_zero_seeds(p: UltraParams) -> np.ndarray:
    """Points where cos B = 0, i.e. B = (j + 1/2) pi, on the theorem interval."""
    _require_even(p, "zero seeding")
    x_end = theorem_interval(p).x_end
    B_end = kernels.phase_closed(p.u, p.q, p.one_minus_q, x_end)
    seeds = []
    j = 0
    while (j + 0.5) * math.pi <= B_end:
        seeds.append(invert_phase(p, (j + 0.5) * math.pi))
        j += 1
    return np.array(seeds)


@dataclass(frozen=True)
class ZeroSet:
    """Refined zeros in increasing order.

    ``merged`` counts seeds whose Newton iteration landed on a zero already
    found; near alpha = sqrt(7/6) the phase admits one seed past the largest
    zero.
    """

    seeds: tuple
    refined: tuple  # mpmath numbers
    newton_iters: tuple
    bracket_verified: tuple
    completeness_guaranteed: bool  # alpha >= sqrt(7/6)
    merged: int = 0

    @property
    def monotone(self) -> bool:
        return all(a < b for a, b in zip(self.refined, self.refined[1:]))

    def as_floats(self) -> np.ndarray:
        return np.array([float(z) for z in self.refined])


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _bracketed(cv: CoeffVector, z, h) -> bool:
    return _sign(eval_p(cv, z - h)) * _sign(eval_p(cv, z + h)) < 0


def refine_zeros(p: UltraParams, seeds, ctx=None) -> ZeroSet:
    """Newton on the oracle polynomial from each seed, in oracle precision.

    Raises
    ------
    ConvergenceError
        If an iteration leaves (0, 1) or 50 iterations do not converge.
    """
    digits = _digits(ctx)
    cv = build_coeffs(p.k, p.alpha, digits)
    mp = cv.mp
    step_tol = mp.mpf(10) ** (-(digits - 8))
    h = mp.mpf(10) ** (-(digits // 2))
    refined, iters, brk = [], [], []
    merged = 0
    for s in seeds:
        x = mp.mpf(float(s))
        for it in range(1, NEWTON_MAX_ITER + 1):
            dp = eval_p_prime(cv, x)
            if dp == 0:
                raise ConvergenceError(f"P' vanished during Newton from seed {float(s)}")
            step = eval_p(cv, x) / dp
            x -= step
            if not 0 < x < 1:
                raise ConvergenceError(f"Newton from seed {float(s)} left (0, 1)")
            if abs(step) <= step_tol * max(1, abs(x)):
                break
        else:
            raise ConvergenceError(f"Newton from seed {float(s)} did not converge in {NEWTON_MAX_ITER} iterations")
        if any(abs(x - z) <= h for z in refined):
            merged += 1
            continue
        refined.append(x)
        iters.append(it)
        brk.append(_bracketed(cv, x, h))
    order = sorted(range(len(refined)), key=lambda i: refined[i])
    guaranteed = p.alpha >= SQRT_7_6 * (1 - 4 * np.finfo(float).eps)
    return ZeroSet(
        seeds=tuple(float(s) for s in seeds),
        refined=tuple(refined[i] for i in order),
        newton_iters=tuple(iters[i] for i in order),
        bracket_verified=tuple(brk[i] for i in order),
        completeness_guaranteed=guaranteed,
        merged=merged,
    )


def _bisect(cv: CoeffVector, lo, hi, s_lo: int, width):
    mp = cv.mp
    lo, hi = mp.mpf(lo), mp.mpf(hi)
    while hi - lo > width:
        mid = (lo + hi) / 2
        s = _sign(eval_p(cv, mid))
        if s == 0:
            return mid
        if s == s_lo:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def _theta_grid(k: int) -> list:
    # cos(theta) on (0, 1]: zeros of P_k sit roughly pi/k apart in theta
    m = 16 * k + 64
    return [math.cos(0.5 * math.pi * j / m) for j in range(m)]


def bisect_roots(k: int, alpha: float, ctx=None) -> list:
    """All zeros in (0, 1) by sign changes on a fine grid and bisection only (no derivatives).

    Returned in increasing order as mpmath numbers.
    """
    digits = _digits(ctx)
    cv = build_coeffs(k, alpha, digits)
    width = cv.mp.mpf(10) ** (-(digits - 3))
    grid = _theta_grid(k)[::-1]  # ascending x
    signs = [_sign(eval_p(cv, x)) for x in grid]
    roots = []
    for (a, sa), (b, sb) in zip(zip(grid, signs), zip(grid[1:], signs[1:])):
        if sa == 0:
            roots.append(cv.mp.mpf(a))
        elif sa * sb < 0:
            roots.append(_bisect(cv, a, b, sa, width))
    if signs[-1] == 0:
        roots.append(cv.mp.mpf(grid[-1]))
    return roots


def largest_zero(k: int, alpha: float, ctx=None):
    """Largest zero in (0, 1), walking down from x = 1; ``None`` when there is none."""
    digits = _digits(ctx)
    cv = build_coeffs(k, alpha, digits)
    width = cv.mp.mpf(10) ** (-(digits - 3))
    grid = _theta_grid(k)
    prev_x, prev_s = grid[0], _sign(eval_p(cv, grid[0]))
    for x in grid[1:]:
        s = _sign(eval_p(cv, x))
        if s == 0:
            return cv.mp.mpf(x)
        if prev_s * s < 0:
            return _bisect(cv, x, prev_x, s, width)
        prev_x, prev_s = x, s
    return None


@dataclass(frozen=True)
class XmaxBracket:
    """Bracket for the largest zero: ``lower_variant < x_max < upper``.

    ``simplified_upper`` is the square root of the simplified bound on
    ``x_max**2`` (nan for alpha < 0); ``first_factor`` is the leading
    square root, which never exceeds ``sqrt(1 - q)``.
    """

    upper: float
    lower_variant: float
    simplified_upper: float
    first_factor: float


def xmax_bounds(p: UltraParams) -> XmaxBracket:
    """Upper bound on the largest zero at theta = 0 and its theta = 1 variant."""
    k, a = p.k, p.alpha
    if not (a > -1 and k >= 5):
        raise DomainError(f"x_max bounds need alpha > -1 and k >= 5, got k={k}, alpha={a}")
    d = (k + a + 1) ** 2 - k
    first = math.sqrt(k * (k + 2 * a + 1) / d)
    corr = 3 * (a + 1) ** (4 / 3) / (2 * k ** (1 / 6) * (k + 2 * a + 1) ** (1 / 6) * d ** (5 / 6))
    if a >= 0:
        simp = math.sqrt(p.one_minus_q * (1 - 3 * a ** (4 / 3) / (2 * (k + a) ** (4 / 3) * k ** (2 / 3))))
    else:
        simp = math.nan
    return XmaxBracket(upper=first - corr, lower_variant=first - 3 * corr, simplified_upper=simp, first_factor=first)


# --------------------------------------------------------------------------
# mass concentration


@dataclass(frozen=True)
class MassReport:
    """Weighted L2 mass of the orthonormal polynomial on [-eta, eta] and the two lower bounds."""

    params: UltraParams
    eta: float
    delta: float
    z: float
    integral: float
    bound1: float
    bound2: float

    @property
    def passed(self) -> bool:
        return self.integral > self.bound1 > self.bound2


def mass_concentration(p: UltraParams, tol: float = 1e-10, ctx=None) -> MassReport:
    """Integral of (1-x^2)^alpha (P / sqrt(L))^2 over [-eta, eta].

    Computed as twice the integral over [0, eta], split at the WKB zero seeds
    so that each panel holds at most one sign change of P.

    Raises
    ------
    DomainError
        Unless k >= 10 is even, alpha >= 3 - k/2 and |alpha| >= 1.
    """
    k, a = p.k, p.alpha
    if k < 10 or k % 2 or a < 3 - k / 2 or abs(a) < 1:
        raise DomainError(f"mass bound needs even k >= 10, alpha >= 3 - k/2, |alpha| >= 1; got k={k}, alpha={a}")
    omq, u = p.one_minus_q, p.u
    delta = 4 * 2 ** (1 / 3) / (3 * omq ** (2 / 3) * u ** (1 / 3))
    eta = math.sqrt(omq) * (1 - delta)
    z = omq ** (1 / 3) * u ** (1 / 6)
    bound1 = 1 - 5 / (3 * z)
    bound2 = 1 - (5 / 3) * ((k + a) / ((k + 2 * a) * k)) ** (1 / 3)

    digits = _digits(ctx)
    cv = build_coeffs(k, a, digits)
    mp = cv.mp
    scale = l2_norm_sq(k, a, digits).scale
    am = mp.mpf(a)

    def integrand(t):
        t = float(t)
        return float(mp.power(1 - mp.mpf(t) ** 2, am) * (scale * eval_p(cv, t)) ** 2)

    cuts = [0.0] + [s for s in wkb_zero_seeds(p).tolist() if s < eta] + [eta]
    half = math.fsum(adaptive_integrate(integrand, lo, hi, tol / (2 * len(cuts))) for lo, hi in zip(cuts, cuts[1:])
                     if hi > lo)
    return MassReport(p, eta, delta, z, 2 * half, bound1, bound2)


# --------------------------------------------------------------------------
# central binomial inequality


@dataclass(frozen=True)
class BinomRow:
    x: float
    binom: float
    rhs: float
    w: float
    holds: bool


def central_binom_rows(x_grid, digits: int = 30) -> list[BinomRow]:
    """Gamma(2x+1)/Gamma(x+1)^2 against 4^x / sqrt(pi (x + 1/2)), and the ratio w(x), per grid point."""
    xs = [float(x) for x in x_grid]
    if any(not x > 0 for x in xs):
        raise DomainError("central binomial check needs x > 0")
    mp = mpmath.MPContext()
    mp.dps = digits
    rows = []
    for x in xs:
        xm = mp.mpf(x)
        log_c = mp.loggamma(2 * xm + 1) - 2 * mp.loggamma(xm + 1)
        log_r = xm * mp.log(4) - mp.log(mp.pi * (xm + mp.mpf(1) / 2)) / 2
        rows.append(BinomRow(x, float(mp.exp(log_c)), float(mp.exp(log_r)), float(mp.exp(log_c - log_r)),
                             bool(log_c > log_r)))
    return rows


def central_binom_check(x_grid, digits: int = 30) -> bool:
    """True iff the inequality holds at every point and w is non-increasing along the sorted grid.

    Examples
    --------
    >>> central_binom_check([0.5, 1, 2, 4])
    True
    """
    rows = sorted(central_binom_rows(x_grid, digits), key=lambda r: r.x)
    return all(r.holds for r in rows) and all(b.w <= a.w for a, b in zip(rows, rows[1:]))


# --------------------------------------------------------------------------
# benchmark


@dataclass(frozen=True)
class BenchReport:
    k: int
    alpha: float
    n_points: int
    n_oracle: int
    approx_ns: float  # per point
    oracle_ns: float  # per point, measured on the first n_oracle points
    backend: str

    @property
    def ratio(self) -> float:
        return self.oracle_ns / self.approx_ns


def benchmark_eval(p: UltraParams, n_points: int = 100_000, oracle_points: int = 2_000, ctx=None,
                   backend: str | None = None) -> BenchReport:
    """Per-point wall time of the approximation against the oracle.

    The approximation runs on all ``n_points``; the oracle, at tens of
    microseconds per point, on the first ``oracle_points`` of the same grid.
    """
    _require_even(p, "approximation")
    xs = np.linspace(0.0, theorem_interval(p).x_end, n_points, endpoint=False)
    g0 = g_zero(p)
    approx_g_grid(p, xs[:16], g0, backend=backend)  # compile outside the timed region
    t0 = time.perf_counter()
    approx_g_grid(p, xs, g0, backend=backend)
    t_approx = time.perf_counter() - t0
    cv = build_coeffs(p.k, p.alpha, _digits(ctx))
    sub = xs[: max(1, min(oracle_points, n_points))].tolist()
    t0 = time.perf_counter()
    for x in sub:
        eval_g_exact(p, cv, x)
    t_oracle = time.perf_counter() - t0
    return BenchReport(p.k, p.alpha, n_points, len(sub), 1e9 * t_approx / n_points, 1e9 * t_oracle / len(sub),
                       backend or _accel.BACKEND)
