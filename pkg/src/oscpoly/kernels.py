"""Double-precision inner loops of the WKB engine.

Every kernel exists twice: a scalar loop compiled with numba (``*_loop``)
and a vectorized numpy version (``*_np``).  The public functions dispatch on
:data:`oscpoly._accel.BACKEND`, or on an explicit ``backend=`` argument, which
the benchmark uses to time both paths in one process.

All kernels take ``(u, q, w)`` with ``w = 1 - q`` passed separately (see
:class:`oscpoly.params.UltraParams`), and abscissae ``x >= 0``.
"""
from __future__ import annotations

import math

import numpy as np

from . import _accel
from ._accel import njit
from .errors import DomainError, ToleranceError
from .quadrature import GK_NODES, GK_WEIGHTS, G_WEIGHTS, MAX_DEPTH, ROUNDOFF, adaptive_integrate

__all__ = [
    "R_COEF_QNEG",
    "INTEGRAND_B",
    "INTEGRAND_EPS_B",
    "INTEGRAND_ABS_EPS_B",
    "b_values",
    "eps_values",
    "eps_b_values",
    "phase_closed",
    "phase_phi",
    "r_bound",
    "eps_b_bound",
    "eps_b_closed",
    "integrate_profile",
]

R_COEF_QNEG = 68.0 / 25.0  # 2.72 = (34/15)(6/5)
_CLAMP_ULPS = 4.0
_EPS = 2.220446049250313e-16
_SPLIT = 134217729.0  # 2^27 + 1
_PANEL_CAP = 20000

INTEGRAND_B = 0
INTEGRAND_EPS_B = 1
INTEGRAND_ABS_EPS_B = 2


# --------------------------------------------------------------------------
# scalar pieces shared by the numba loops
#
# Near the turning point 1 - q - x^2 is a small difference of O(1) numbers.
# It is formed as w - x^2 with w = 1 - q correctly rounded and x^2 split
# exactly into hi + lo, so the result carries a single rounding.


@njit(cache=True)
def _gap(w, x):
    p = x * x
    c = _SPLIT * x
    xh = c - (c - x)
    xl = x - xh
    lo = ((xh * xh - p) + 2.0 * xh * xl) + xl * xl
    return (w - p) - lo


@njit(cache=True)
def _omx2(x):
    return (1.0 - x) * (1.0 + x)


@njit(cache=True)
def _root_gap(w, x):
    # sqrt(1-q-x^2); a gap below zero by the clamp tolerance counts as the
    # turning point, further out gives -1.0 as a flag
    s = _gap(w, x)
    if s < 0.0:
        if -s <= _CLAMP_ULPS * _EPS * w:
            return 0.0
        return -1.0
    return math.sqrt(s)


@njit(cache=True)
def _omega(q, w, x):
    # x^6 + 6q x^4 - 3x^2 + 4q^2 - 6q + 2 rewritten in y = 1 - x^2; the
    # monomial form cancels to O(1) roundoff near x = 1, q = 0
    y = _omx2(x)
    return 4.0 * q * q + y * (-12.0 * q + y * ((3.0 + 6.0 * q) - y))


@njit(cache=True)
def _b_scalar(u, q, w, x):
    s = _gap(w, x)
    if s <= 0.0:
        return 0.0
    return math.sqrt(s * u) / _omx2(x)


@njit(cache=True)
def _eps_b_scalar(u, q, w, x):
    s = _gap(w, x)
    return -_omega(q, w, x) / (4.0 * math.sqrt(u) * _omx2(x) * s * s * math.sqrt(s))


@njit(cache=True)
def _phase_scalar(u, q, w, x):
    # arccos sqrt((1-q-x^2)/(1-q)) == atan2(x, sqrt(1-q-x^2)); for q > 0 the
    # second arccos is atan2(sqrt(q) x, sqrt(1-q-x^2)) because
    # (1-q)(1-x^2) = (1-q-x^2) + q x^2. Both stay well conditioned at the
    # turning point, where an arcsin of a rounded ratio loses half its digits.
    rg = _root_gap(w, x)
    if rg < 0.0:
        return np.nan
    first = math.atan2(x, rg)
    if q == 0.0 or x == 0.0:
        return math.sqrt(u) * first
    if q > 0.0:
        return math.sqrt(u) * (first - math.sqrt(q) * math.atan2(math.sqrt(q) * x, rg))
    sq = math.sqrt(-q)
    r = x / math.sqrt(w * _omx2(x))
    return math.sqrt(u) * (first + sq * math.asinh(sq * r))


@njit(cache=True)
def _phase_phi_scalar(u, q, w, x):
    rg = _root_gap(w, x)
    if rg < 0.0:
        return np.nan
    phi = math.atan2(x, rg)
    if q == 0.0 or x == 0.0:
        return math.sqrt(u) * phi
    t = math.tan(phi)
    if 1.0 + q * t * t <= 0.0:
        return np.nan
    if q > 0.0:
        # arccos(1 / sqrt(1 + q tan^2 phi)) == arctan(sqrt(q) tan phi)
        return math.sqrt(u) * (phi - math.sqrt(q) * math.atan(math.sqrt(q) * t))
    # q < 0 continues to -sqrt(-q) artanh(sqrt(-q) tan phi)
    sq = math.sqrt(-q)
    return math.sqrt(u) * (phi + sq * math.atanh(sq * t))


@njit(cache=True)
def _r_scalar(u, q, w, x):
    if x == 0.0:
        return 0.0
    if q < 0.0:
        return R_COEF_QNEG * x / math.sqrt(_omx2(x) * u)
    s = _gap(w, x)
    if s <= 0.0:
        return np.inf
    if q < 0.5:
        return 2.0 * _omx2(x) * x / (w * s * math.sqrt(s) * math.sqrt(u))
    return (1.0 + q) * x / (4.0 * s * math.sqrt(s) * math.sqrt(u))


@njit(cache=True)
def _eps_b_bound_scalar(u, q, w, x):
    if x == 0.0:
        return 0.0
    if q < 0.0:
        return 6.0 * x / (5.0 * math.sqrt(_omx2(x) * u))
    s = _gap(w, x)
    if s <= 0.0:
        return np.inf
    if q < 0.5:
        return _omx2(x) * x / (w * s * math.sqrt(s) * math.sqrt(u))
    return (1.0 + q) * x / (4.0 * math.sqrt(u) * s * math.sqrt(s))


@njit(cache=True)
def _eps_b_closed_scalar(u, q, w, x):
    if not q > 0.0:
        return math.nan
    if x == 0.0:
        return 0.0
    s = _gap(w, x)
    # 3 - 3q^2 - 3x^2 + 2q x^2 = (3 - 2q)(1 - x^2) + q(2 - 3q)
    t1 = ((3.0 - 2.0 * q) * _omx2(x) + q * (2.0 - 3.0 * q)) * x / (12.0 * w * s * math.sqrt(s) * math.sqrt(u))
    rg = math.sqrt(max(s, 0.0))
    t2 = math.atan2(x, rg) / (4.0 * math.sqrt(u))
    t3 = math.atan2(math.sqrt(q) * x, rg) / math.sqrt(q * u)
    return t1 + t2 - t3


# --------------------------------------------------------------------------
# numba array loops


@njit(cache=True)
def _map_loop(kind, u, q, w, xs):
    out = np.empty(xs.shape[0])
    for i in range(xs.shape[0]):
        x = xs[i]
        if kind == 0:
            out[i] = _phase_scalar(u, q, w, x)
        elif kind == 1:
            out[i] = _phase_phi_scalar(u, q, w, x)
        elif kind == 2:
            out[i] = _r_scalar(u, q, w, x)
        elif kind == 3:
            out[i] = _eps_b_bound_scalar(u, q, w, x)
        elif kind == 4:
            out[i] = _eps_b_closed_scalar(u, q, w, x)
        elif kind == 5:
            out[i] = _b_scalar(u, q, w, x)
        else:
            out[i] = _eps_b_scalar(u, q, w, x)
    return out


@njit(cache=True)
def _integrand_scalar(kind, u, q, w, t):
    if kind == 0:
        return _b_scalar(u, q, w, t)
    v = _eps_b_scalar(u, q, w, t)
    if kind == 2:
        return abs(v)
    return v


@njit(cache=True)
def _gk15_loop(kind, u, q, w, a, b, nodes, wk, wg):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    k = 0.0
    g = 0.0
    ka = 0.0
    for i in range(15):
        y = _integrand_scalar(kind, u, q, w, c + h * nodes[i])
        k += wk[i] * y
        g += wg[i] * y
        ka += wk[i] * abs(y)
    return h * k, abs(h * (k - g)), abs(h) * ka


@njit(cache=True)
def _integrate_loop(kind, u, q, w, a, b, tol, rtol, nodes, wk, wg, max_depth, cap):
    """Global adaptive GK15 over a flat panel pool; status 1 means depth/capacity exhausted."""
    pa = np.empty(cap)
    pb = np.empty(cap)
    pk = np.empty(cap)
    pe = np.empty(cap)
    pr = np.empty(cap)
    pd = np.empty(cap, dtype=np.int64)
    k0, e0, r0 = _gk15_loop(kind, u, q, w, a, b, nodes, wk, wg)
    pa[0] = a
    pb[0] = b
    pk[0] = k0
    pe[0] = e0
    pr[0] = r0
    pd[0] = 0
    n = 1
    total = k0
    err = e0
    floor = ROUNDOFF * r0
    while err > max(tol, rtol * abs(total), floor):
        j = 0
        for i in range(1, n):
            if pe[i] > pe[j]:
                j = i
        if pd[j] >= max_depth or n >= cap:
            return total, err, 1
        mid = 0.5 * (pa[j] + pb[j])
        k1, e1, r1 = _gk15_loop(kind, u, q, w, pa[j], mid, nodes, wk, wg)
        k2, e2, r2 = _gk15_loop(kind, u, q, w, mid, pb[j], nodes, wk, wg)
        depth = pd[j] + 1
        total += k1 + k2 - pk[j]
        err += e1 + e2 - pe[j]
        floor += ROUNDOFF * (r1 + r2 - pr[j])
        right = pb[j]
        pb[j] = mid
        pk[j] = k1
        pe[j] = e1
        pr[j] = r1
        pd[j] = depth
        pa[n] = mid
        pb[n] = right
        pk[n] = k2
        pe[n] = e2
        pr[n] = r2
        pd[n] = depth
        n += 1
        if n % 64 == 0:
            # resync the running sums
            total = 0.0
            err = 0.0
            floor = 0.0
            for i in range(n):
                total += pk[i]
                err += pe[i]
                floor += pr[i]
            floor *= ROUNDOFF
    total = 0.0
    for i in range(n):
        total += pk[i]
    return total, err, 0


# --------------------------------------------------------------------------
# numpy versions


def _gap_np(w, x):
    p = x * x
    c = _SPLIT * x
    xh = c - (c - x)
    xl = x - xh
    lo = ((xh * xh - p) + 2.0 * xh * xl) + xl * xl
    return (w - p) - lo


def _omx2_np(x):
    return (1.0 - x) * (1.0 + x)


def _root_gap_np(w, x):
    s = _gap_np(w, x)
    bad = -s > _CLAMP_ULPS * _EPS * w
    return np.where(bad, np.nan, np.sqrt(np.maximum(s, 0.0)))


def _omega_np(q, w, x):
    y = _omx2_np(x)
    return 4.0 * q * q + y * (-12.0 * q + y * ((3.0 + 6.0 * q) - y))


def _b_np(u, q, w, x):
    s = _gap_np(w, x)
    return np.sqrt(np.maximum(s, 0.0) * u) / _omx2_np(x)


def _eps_b_np(u, q, w, x):
    s = _gap_np(w, x)
    with np.errstate(invalid="ignore", divide="ignore"):
        return -_omega_np(q, w, x) / (4.0 * math.sqrt(u) * _omx2_np(x) * s * s * np.sqrt(s))


def _phase_np(u, q, w, x):
    rg = _root_gap_np(w, x)
    first = np.arctan2(x, rg)
    if q == 0.0:
        return math.sqrt(u) * first
    if q > 0.0:
        return math.sqrt(u) * (first - math.sqrt(q) * np.arctan2(math.sqrt(q) * x, rg))
    sq = math.sqrt(-q)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = x / np.sqrt(w * _omx2_np(x))
    return math.sqrt(u) * (first + sq * np.arcsinh(sq * r))


def _phase_phi_np(u, q, w, x):
    phi = np.arctan2(x, _root_gap_np(w, x))
    if q == 0.0:
        return math.sqrt(u) * phi
    t = np.tan(phi)
    ok = 1.0 + q * t * t > 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        if q > 0.0:
            val = phi - math.sqrt(q) * np.arctan(math.sqrt(q) * t)
        else:
            sq = math.sqrt(-q)
            val = phi + sq * np.arctanh(np.where(ok, sq * t, 0.0))
    return np.where(ok, math.sqrt(u) * val, np.nan)


def _r_np(u, q, w, x):
    if q < 0.0:
        return R_COEF_QNEG * x / np.sqrt(_omx2_np(x) * u)
    s = _gap_np(w, x)
    with np.errstate(invalid="ignore", divide="ignore"):
        if q < 0.5:
            val = 2.0 * _omx2_np(x) * x / (w * s * np.sqrt(s) * math.sqrt(u))
        else:
            val = (1.0 + q) * x / (4.0 * s * np.sqrt(s) * math.sqrt(u))
    return np.where(x == 0.0, 0.0, np.where(s > 0.0, val, np.inf))


def _eps_b_bound_np(u, q, w, x):
    if q < 0.0:
        return 6.0 * x / (5.0 * np.sqrt(_omx2_np(x) * u))
    s = _gap_np(w, x)
    with np.errstate(invalid="ignore", divide="ignore"):
        if q < 0.5:
            val = _omx2_np(x) * x / (w * s * np.sqrt(s) * math.sqrt(u))
        else:
            val = (1.0 + q) * x / (4.0 * math.sqrt(u) * s * np.sqrt(s))
    return np.where(x == 0.0, 0.0, np.where(s > 0.0, val, np.inf))


def _eps_b_closed_np(u, q, w, x):
    if not q > 0.0:
        return np.full(np.shape(x), np.nan)
    s = _gap_np(w, x)
    with np.errstate(invalid="ignore", divide="ignore"):
        t1 = ((3.0 - 2.0 * q) * _omx2_np(x) + q * (2.0 - 3.0 * q)) * x / (12.0 * w * s * np.sqrt(s) * math.sqrt(u))
        rg = np.sqrt(np.maximum(s, 0.0))
        t2 = np.arctan2(x, rg) / (4.0 * math.sqrt(u))
        t3 = np.arctan2(math.sqrt(q) * x, rg) / math.sqrt(q * u)
    return np.where(x == 0.0, 0.0, t1 + t2 - t3)


_NP_MAP = {
    0: _phase_np,
    1: _phase_phi_np,
    2: _r_np,
    3: _eps_b_bound_np,
    4: _eps_b_closed_np,
    5: _b_np,
    6: _eps_b_np,
}


def _resolve(backend):
    backend = backend or _accel.BACKEND
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not _accel.HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is disabled or missing")
    return backend


def _map(kind, u, q, w, x, backend):
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if _resolve(backend) == "numba":
        flat = np.ascontiguousarray(xs.ravel())
        out = _map_loop(kind, float(u), float(q), float(w), flat).reshape(xs.shape)
    else:
        out = np.asarray(_NP_MAP[kind](float(u), float(q), float(w), xs), dtype=float)
    if np.ndim(x) == 0:
        return float(out.reshape(-1)[0])
    return out


def phase_closed(u, q, w, x, backend=None):
    """Accumulated phase B(x) from the closed two-branch formula; NaN where a clamp fails."""
    return _map(0, u, q, w, x, backend)


def phase_phi(u, q, w, x, backend=None):
    """B(x) through x = sqrt(1-q) sin(phi); NaN where 1 + q tan^2(phi) <= 0."""
    return _map(1, u, q, w, x, backend)


def r_bound(u, q, w, x, backend=None):
    return _map(2, u, q, w, x, backend)


def eps_b_bound(u, q, w, x, backend=None):
    return _map(3, u, q, w, x, backend)


def eps_b_closed(u, q, w, x, backend=None):
    return _map(4, u, q, w, x, backend)


def b_values(u, q, w, x, backend=None):
    return _map(5, u, q, w, x, backend)


def eps_b_values(u, q, w, x, backend=None):
    return _map(6, u, q, w, x, backend)


def eps_values(u, q, w, x):
    """epsilon(x) = -(x^6 + 6q x^4 - 3x^2 + 4q^2 - 6q + 2) / (4u (1-q-x^2)^3)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = -_omega_np(q, w, x) / (4.0 * u * _gap_np(w, x) ** 3)
    return float(out) if out.ndim == 0 else out


def integrate_profile(kind: int, u: float, q: float, w: float, a: float, b: float, tol: float,
                      rtol: float = 0.0, backend=None) -> float:
    """Adaptive GK15 integral of b, eps*b or |eps*b| over ``[a, b]``.

    Raises
    ------
    ToleranceError
        When refinement hits depth 60 before meeting the tolerance.
    """
    if b == a:
        return 0.0
    if kind not in (INTEGRAND_B, INTEGRAND_EPS_B, INTEGRAND_ABS_EPS_B):
        raise DomainError(f"unknown integrand kind {kind}")
    if _resolve(backend) == "numba":
        val, err, status = _integrate_loop(int(kind), float(u), float(q), float(w), float(a), float(b), float(tol),
                                           float(rtol), GK_NODES, GK_WEIGHTS, G_WEIGHTS, MAX_DEPTH, _PANEL_CAP)
        if status:
            raise ToleranceError(f"integrate_profile: refinement limit reached (error estimate {err:.3e})")
        return float(val)
    if kind == INTEGRAND_B:
        f = lambda t: _b_np(u, q, w, t)  # noqa: E731
    elif kind == INTEGRAND_EPS_B:
        f = lambda t: _eps_b_np(u, q, w, t)  # noqa: E731
    else:
        f = lambda t: np.abs(_eps_b_np(u, q, w, t))  # noqa: E731
    return adaptive_integrate(f, a, b, tol, rtol=rtol, vectorized=True)
