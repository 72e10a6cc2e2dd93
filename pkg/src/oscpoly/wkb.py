"""Closed-form WKB approximation of g(x) = sqrt(b) (1-x^2)^((alpha+1)/2) P_k(x).

For even k and x on the theorem interval,

    g(x) = g(0) (cos B(x) + r(x)),   B(x) = integral_0^x b(t) dt,

with |r(x)| bounded by elementary functions of (u, q, x).  This module
evaluates every ingredient: the frequency b, the perturbation epsilon, the
phase B (closed form, angle-substituted form and quadrature), g(0), the
error envelope, the Sonin envelope with its sign polynomials A1/A2, the
amplitude factor mu and the integral bounds on |epsilon b|.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from . import kernels
from .errors import DomainError
from .params import MuBranch, UltraParams, classify_regime, theorem_interval

__all__ = [
    "PhaseEval",
    "CertifiedValue",
    "EnvelopeEval",
    "eval_b",
    "eval_epsilon",
    "phase_eval",
    "phase_B_closed",
    "phase_B_phi",
    "phase_B_quadrature",
    "g_zero",
    "g_zero_exact",
    "g_zero_orthonormal_estimate",
    "r_bound",
    "approx_g",
    "approx_g_grid",
    "A1_eval",
    "A2_eval",
    "x_star",
    "sonin_S",
    "envelope_eval",
    "mu_bound",
    "mu_candidates",
    "eps_b_integral_bound",
    "eps_b_integral_closed",
    "eps_b_integral_quadrature",
    "abs_eps_b_integral_quadrature",
]

MIDDLE_SHIFT = 27.0 / 25.0  # the 1.08 in the middle-branch mu bound
_SLACK = 4.0 * 2.220446049250313e-16


@dataclass(frozen=True)
class PhaseEval:
    x: float
    b: float
    epsilon: float
    B: float


@dataclass(frozen=True)
class CertifiedValue:
    """Main term ``g0 * cos B(x)`` with the relative error radius ``r_radius``.

    When ``certified`` is true, ``|g(x) - main| <= |g0| * r_radius``.
    """

    x: float
    main: float
    r_radius: float
    certified: bool
    g0: float
    B: float


@dataclass(frozen=True)
class EnvelopeEval:
    S: float
    A1: float
    A2: float
    x0: float
    mu: float


def _as_array(x):
    return np.atleast_1d(np.asarray(x, dtype=float))


def _natural_end(p: UltraParams) -> float:
    # formulas for B live on [0, sqrt(1-q)]; for q < 0 that exceeds 1
    return min(p.turning_point, 1.0)


def _check_range(p: UltraParams, x, upper: float, strict: bool, what: str):
    xs = _as_array(x)
    tol = upper * _SLACK
    if np.any(xs < 0.0) or np.any(xs > upper + tol) or (strict and np.any(xs >= upper)):
        bad = xs[(xs < 0.0) | (xs >= upper if strict else xs > upper + tol)]
        raise DomainError(f"{what}: x={bad[0]!r} outside [0, {upper!r}{')' if strict else ']'}")


def eval_b(p: UltraParams, x):
    """Local frequency b(x) = sqrt((1-q-x^2) u) / (1 - x^2)."""
    xs = _as_array(x)
    if np.any(xs * xs >= 1.0) or np.any(xs * xs > p.one_minus_q + _SLACK):
        raise DomainError(f"eval_b: need x^2 < 1 and x^2 <= 1-q (q={p.q})")
    return kernels.b_values(p.u, p.q, p.one_minus_q, x)


def eval_epsilon(p: UltraParams, x):
    """Relative perturbation epsilon(x) of the g-equation; finite strictly inside the turning point."""
    xs = _as_array(x)
    if np.any(xs * xs >= p.one_minus_q) or np.any(xs * xs >= 1.0):
        raise DomainError("eval_epsilon: x must lie strictly inside the turning point")
    return kernels.eps_values(p.u, p.q, p.one_minus_q, x)


def phase_B_closed(p: UltraParams, x):
    """B(x) from the two-branch closed form (arcsin / arcsinh rearrangement).

    Valid on ``0 <= x <= sqrt(1-q)`` (and ``x < 1`` when ``q < 0``).
    """
    _check_range(p, x, _natural_end(p), strict=p.q < 0 and _natural_end(p) == 1.0, what="phase_B_closed")
    out = kernels.phase_closed(p.u, p.q, p.one_minus_q, x)
    if np.any(np.isnan(out)):
        raise DomainError("phase_B_closed: argument left [-1, 1] beyond the clamp tolerance")
    return out


def phase_B_phi(p: UltraParams, x):
    """B(x) through x = sqrt(1-q) sin(phi).

    Raises DomainError where the substitution breaks down (1 + q tan^2 phi <= 0,
    only possible for q < 0).
    """
    _check_range(p, x, _natural_end(p), strict=p.q < 0 and _natural_end(p) == 1.0, what="phase_B_phi")
    out = kernels.phase_phi(p.u, p.q, p.one_minus_q, x)
    if np.any(np.isnan(out)):
        raise DomainError("phase_B_phi: 1 + q tan^2(phi) <= 0")
    return out


def phase_B_quadrature(p: UltraParams, x: float, tol: float = 1e-12) -> float:
    """B(x) as the adaptive quadrature of b over [0, x]; independent of the closed forms."""
    _check_range(p, x, _natural_end(p), strict=False, what="phase_B_quadrature")
    return kernels.integrate_profile(kernels.INTEGRAND_B, p.u, p.q, p.one_minus_q, 0.0, float(x), tol)


def phase_eval(p: UltraParams, x: float) -> PhaseEval:
    return PhaseEval(x=float(x), b=float(eval_b(p, x)), epsilon=float(eval_epsilon(p, x)), B=float(phase_B_closed(p, x)))


def _require_even(p: UltraParams, what: str):
    if p.k % 2:
        raise DomainError(f"odd k: {what} not defined by Theorem 1")


def g_zero_exact(p: UltraParams, digits: int = 50):
    """g(0) = (-1/4)^(k/2) binom(k+alpha, k/2) (k^2+2k alpha+k+alpha+1)^(1/4) in extended precision.

    The binomial goes through the gamma function (mpmath), not through the
    oracle's product form.
    """
    _require_even(p, "g(0)")
    mp = mpmath.MPContext()
    mp.dps = digits + 10
    a = mp.mpf(p.alpha)
    m = p.k // 2
    core = p.k * p.k + 2 * p.k * a + p.k + a + 1
    return (mp.mpf(-1) / 4) ** m * mp.binomial(p.k + a, m) * mp.root(core, 4)


def g_zero(p: UltraParams) -> float:
    """g(0) rounded to double."""
    return float(g_zero_exact(p, 30))


def g_zero_orthonormal_estimate(p: UltraParams) -> float:
    """Stirling estimate of g(0) for the orthonormal polynomial."""
    _require_even(p, "g(0)")
    return (-1.0) ** (p.k // 2) * math.sqrt((2 * p.k + 2 * p.alpha + 1) / math.pi)


def _mark_turning_point(p: UltraParams, x, r):
    # the double turning point is rounded inside sqrt(1-q), where the formula
    # is finite but meaningless; report it as the uncertified marker
    if p.q < 0:
        return r
    if np.ndim(r) == 0:
        return math.inf if x >= p.turning_point else r
    return np.where(np.asarray(x) >= p.turning_point, np.inf, r)


def r_bound(p: UltraParams, x):
    """Relative error radius of the main term; inf at the case II turning point."""
    _check_range(p, x, _natural_end(p), strict=False, what="r_bound")
    return _mark_turning_point(p, x, kernels.r_bound(p.u, p.q, p.one_minus_q, x))


def _check_theorem_x(p: UltraParams, x):
    ti = theorem_interval(p)
    _check_range(p, x, ti.x_end, strict=False, what="approx_g")


def approx_g(p: UltraParams, x: float) -> CertifiedValue:
    """g(x) ~ g(0) cos B(x) with its certified relative error radius.

    Examples
    --------
    >>> from oscpoly.params import derive_params
    >>> cv = approx_g(derive_params(2, 0.0), 0.0)
    >>> cv.r_radius, cv.certified
    (0.0, True)
    """
    _require_even(p, "approximation")
    _check_theorem_x(p, x)
    g0 = g_zero(p)
    B = float(kernels.phase_closed(p.u, p.q, p.one_minus_q, float(x)))
    r = float(_mark_turning_point(p, float(x), kernels.r_bound(p.u, p.q, p.one_minus_q, float(x))))
    return CertifiedValue(x=float(x), main=g0 * math.cos(B), r_radius=r, certified=math.isfinite(r), g0=g0, B=B)


def approx_g_grid(p: UltraParams, xs, g0: float | None = None, backend=None):
    """Vectorized main term and radius: returns ``(main, r_radius)`` arrays."""
    _require_even(p, "approximation")
    xs = _as_array(xs)
    _check_theorem_x(p, xs)
    if g0 is None:
        g0 = g_zero(p)
    B = kernels.phase_closed(p.u, p.q, p.one_minus_q, xs, backend=backend)
    return g0 * np.cos(B), _mark_turning_point(p, xs, kernels.r_bound(p.u, p.q, p.one_minus_q, xs, backend=backend))


def A1_eval(p: UltraParams, x):
    """4u(1-q-x^2)^3 + 3x^2 - 6q x^4 - x^6 - 2(1-q)(1-2q) = 4u(1-q-x^2)^3 (1 + epsilon).

    Its sign is that of 1 + epsilon inside the turning point.

    Examples
    --------
    >>> from oscpoly.params import derive_params
    >>> p = derive_params(2, 1.0)
    >>> A1_eval(p, 0.0) == 4 * p.u - 2
    True
    """
    x = np.asarray(x, dtype=float)
    x2 = x * x
    q, u, w = p.q, p.u, p.one_minus_q
    out = 4 * u * (w - x2) ** 3 + x2 * (3 - x2 * (6 * q + x2)) - 2 * w * (1 - 2 * q)
    return float(out) if out.ndim == 0 else out


def A2_eval(p: UltraParams, x):
    """(1-q)(1-4q) - (1+q)x^2; its sign is that of the Sonin function's slope."""
    x = np.asarray(x, dtype=float)
    out = (1 - p.q) * (1 - 4 * p.q) - (1 + p.q) * x * x
    return float(out) if out.ndim == 0 else out


def x_star(p: UltraParams) -> float:
    """Positive root of A2, where the Sonin envelope peaks when q < 1/4."""
    if p.q >= 0.25:
        raise DomainError(f"x_star needs q < 1/4, got q={p.q}")
    return math.sqrt((1 - p.q) * (1 - 4 * p.q) / (1 + p.q))


def sonin_S(p: UltraParams, x, g, g_prime):
    """Sonin envelope S = g^2 + g'^2 / ((1 + eps) b^2).

    ``g`` and ``g_prime`` may be doubles or mpmath numbers; with mpmath input
    the whole expression is evaluated in that precision.
    """
    if not A1_eval(p, float(x)) > 0:
        raise DomainError(f"sonin_S: A1(x) <= 0 at x={float(x)}")
    if isinstance(g, mpmath.ctx_mp_python._mpf):
        mp = g.context
        xm, a = mp.mpf(x), mp.mpf(p.alpha)
        u = (p.k + a) * (p.k + a + 1)
        q = (a * a - 1) / u
        x2 = xm * xm
        s = 1 - q - x2
        b2 = s * u / (1 - x2) ** 2
        eps = -(x2 ** 3 + 6 * q * x2 ** 2 - 3 * x2 + 4 * q * q - 6 * q + 2) / (4 * u * s ** 3)
        return g * g + g_prime * g_prime / ((1 + eps) * b2)
    b = float(eval_b(p, x))
    eps = float(eval_epsilon(p, x))
    return g * g + g_prime * g_prime / ((1 + eps) * b * b)


def mu_candidates(p: UltraParams) -> dict:
    """Every mu formula that applies to ``p`` (two at |alpha| = sqrt(7/6))."""
    reg = classify_regime(p)
    a2 = p.alpha * p.alpha
    out = {}
    if reg.mu_branch == MuBranch.Outer:
        out["Outer"] = 1.0
        return out
    if reg.mu_branch == MuBranch.Middle or reg.on_boundary:
        out["Middle"] = math.sqrt((a2 - 1) / (a2 - MIDDLE_SHIFT))
    if reg.mu_branch == MuBranch.Inner or reg.on_boundary:
        v = a2 - 1
        out["Inner"] = 2 * (2 - a2) ** 1.5 / math.sqrt(1 + 8 * v * v - 4 * v ** 3)
    return out


def mu_bound(p: UltraParams) -> float:
    """Bound on sup |g(x)/g(0)| over the theorem interval."""
    return max(mu_candidates(p).values())


def envelope_eval(p: UltraParams, x: float, g, g_prime) -> EnvelopeEval:
    x0 = x_star(p) if p.q < 0.25 else float("nan")
    return EnvelopeEval(S=float(sonin_S(p, x, g, g_prime)), A1=A1_eval(p, x), A2=A2_eval(p, x), x0=x0, mu=mu_bound(p))


def eps_b_integral_bound(p: UltraParams, x):
    """Upper bound on integral_0^x |eps(t) b(t)| dt, branch chosen by q."""
    _check_range(p, x, _natural_end(p), strict=False, what="eps_b_integral_bound")
    return kernels.eps_b_bound(p.u, p.q, p.one_minus_q, x)


def eps_b_integral_closed(p: UltraParams, x):
    """Closed form of integral_0^x eps(t) b(t) dt (q > 0 only)."""
    if not p.q > 0:
        raise DomainError(f"closed form of the eps*b integral needs q > 0, got q={p.q}")
    _check_range(p, x, p.turning_point, strict=True, what="eps_b_integral_closed")
    return kernels.eps_b_closed(p.u, p.q, p.one_minus_q, x)


def eps_b_integral_quadrature(p: UltraParams, x: float, tol: float = 1e-14, rtol: float = 1e-12) -> float:
    """Quadrature of the signed integral of eps*b.

    The integrand changes sign for 0 < q < 1/2 and the result can be far
    smaller than its pieces, so the absolute tolerance is floored at
    ``rtol`` times the integral of |eps b| (the roundoff scale).
    """
    _check_range(p, x, p.turning_point, strict=True, what="eps_b_integral_quadrature")
    scale = abs_eps_b_integral_quadrature(p, x, tol, rtol)
    return kernels.integrate_profile(kernels.INTEGRAND_EPS_B, p.u, p.q, p.one_minus_q, 0.0, float(x),
                                     max(tol, rtol * scale), rtol)


def abs_eps_b_integral_quadrature(p: UltraParams, x: float, tol: float = 1e-14, rtol: float = 1e-12) -> float:
    _check_range(p, x, p.turning_point, strict=True, what="abs_eps_b_integral_quadrature")
    return kernels.integrate_profile(kernels.INTEGRAND_ABS_EPS_B, p.u, p.q, p.one_minus_q, 0.0, float(x), tol, rtol)
