"""Extended-precision ground truth for P_k^(alpha, alpha).

The polynomial is stored as exact rational monomial coefficients obtained
from the ODE

    (1 - x^2) p'' - 2(alpha + 1) x p' + k(k + 2 alpha + 1) p = 0,

seeded at the centre and stepped outward with

    c_{j+2} = (j - k)(j + k + 2 alpha + 1) / ((j + 2)(j + 1)) * c_j.

The only divisor is (j + 2)(j + 1), so the build never degenerates for
alpha <= -1, where the classical three-term recurrence can divide by zero.
``alpha`` is taken as the exact binary value of the given double.

Evaluation runs Horner in binary fixed point on Python/gmpy2 integers.  The
number of fractional bits is chosen per polynomial from the coefficient
mass, so the requested number of decimal digits survives the cancellation
of the monomial basis near |x| = 1 (roughly k log10(2) digits at large k).
"""
from __future__ import annotations

import functools
import math
import os
from dataclasses import dataclass, field

import gmpy2
import mpmath
from gmpy2 import mpq, mpz

from .errors import DomainError, PrecisionError, SingularityError
from .params import UltraParams

__all__ = [
    "DEFAULT_DIGITS",
    "MIN_DIGITS",
    "PrecisionContext",
    "CoeffVector",
    "NormData",
    "build_coeffs",
    "eval_p",
    "eval_p_prime",
    "eval_p_second",
    "eval_y",
    "eval_y_prime",
    "eval_g_exact",
    "eval_g_prime_exact",
    "l2_norm_sq",
    "recurrence_crosscheck",
]

MIN_DIGITS = 30
DEFAULT_DIGITS = int(os.environ.get("OSCPOLY_DIGITS", "50"))
_GUARD_DIGITS = 10
_GUARD_BITS = 32
_LOG2_10 = math.log2(10.0)


@dataclass(frozen=True)
class PrecisionContext:
    digits: int = DEFAULT_DIGITS

    def __post_init__(self):
        if self.digits < MIN_DIGITS:
            raise PrecisionError(f"digits must be >= {MIN_DIGITS}, got {self.digits}")


def _check_digits(digits: int) -> int:
    digits = int(digits)
    if digits < MIN_DIGITS:
        raise PrecisionError(f"digits must be >= {MIN_DIGITS}, got {digits}")
    return digits


def _log2_abs(r: mpq) -> int:
    """Integer approximation of log2|r| for a nonzero rational (off by at most 1)."""
    return int(gmpy2.numer(r)).bit_length() - int(gmpy2.denom(r)).bit_length()


def _to_fixed(r, bits: int) -> mpz:
    """round(r * 2**bits) for a rational r."""
    num = gmpy2.numer(r) << bits
    den = gmpy2.denom(r)
    return gmpy2.f_div(2 * num + den, 2 * den)


@dataclass(frozen=True, eq=False)
class CoeffVector:
    """Monomial coefficients c_j (j of the parity of k) of P_k^(alpha, alpha).

    ``coeffs[i]`` multiplies x**(parity + 2 i).  The fixed-point images used by
    the evaluators are built once here.
    """

    k: int
    alpha: float
    digits: int
    coeffs: tuple
    frac_bits: int = field(repr=False)
    mp: mpmath.ctx_mp.MPContext = field(repr=False)
    _fixed: tuple = field(repr=False)
    _fixed_d1: tuple = field(repr=False)
    _fixed_d2: tuple = field(repr=False)

    @property
    def parity(self) -> int:
        return self.k % 2

    @property
    def alpha_exact(self) -> mpq:
        return mpq(self.alpha)

    def coeff(self, j: int) -> mpq:
        """c_j; zero for the wrong parity or j > k."""
        if j < 0 or j > self.k or (j - self.parity) % 2:
            return mpq(0)
        return self.coeffs[(j - self.parity) // 2]

    def as_mpf(self) -> list:
        return [self.mp.mpf(gmpy2.numer(c)) / gmpy2.denom(c) for c in self.coeffs]


def _seed(k: int, a: mpq) -> mpq:
    """c_0 (even k) or c_1 (odd k) in product form."""
    m = k // 2
    prod = mpq(1)
    for j in range(1, m + 1):
        prod *= (k + a - j + 1) / mpq(j)
    seed = mpq(-1, 4) ** m * prod
    if k % 2:
        seed *= (k + 2 * a + 1) / mpq(2)
    return seed


def _exact_coeffs(k: int, a: mpq) -> list:
    j = k % 2
    c = [_seed(k, a)]
    while j < k:
        c.append((j - k) * (j + k + 2 * a + 1) / mpq((j + 2) * (j + 1)) * c[-1])
        j += 2
    return c


@functools.lru_cache(maxsize=256)
def _build(k: int, alpha: float, digits: int) -> CoeffVector:
    a = mpq(alpha)
    c = _exact_coeffs(k, a)
    par = k % 2
    powers = [par + 2 * i for i in range(len(c))]
    ref = _log2_abs(c[0])
    # bound on sum_j j^2 |c_j|, which dominates every truncation effect of Horner
    mass = max(_log2_abs(ci * max(1, pw) ** 2) for ci, pw in zip(c, powers)) + len(c).bit_length()
    bits = math.ceil((digits + _GUARD_DIGITS) * _LOG2_10) + max(0, mass - ref) + _GUARD_BITS
    fixed = tuple(_to_fixed(ci, bits) for ci in c)
    d1 = tuple(_to_fixed(ci * pw, bits) for ci, pw in zip(c, powers) if pw >= 1)
    d2 = tuple(_to_fixed(ci * pw * (pw - 1), bits) for ci, pw in zip(c, powers) if pw >= 2)
    mp = mpmath.MPContext()
    mp.dps = digits + _GUARD_DIGITS
    return CoeffVector(k, alpha, digits, tuple(c), bits, mp, fixed, d1, d2)


def build_coeffs(k: int, alpha: float, ctx: PrecisionContext | int | None = None) -> CoeffVector:
    """Exact monomial coefficients of P_k^(alpha, alpha).

    Parameters
    ----------
    k, alpha : degree and parameter; ``k >= 2``, ``alpha >= -(2k+1)/4``.
    ctx : PrecisionContext or int, optional
        Number of decimal digits the evaluators must deliver.

    Examples
    --------
    >>> cv = build_coeffs(2, 0.0)
    >>> [float(c) for c in cv.coeffs]
    [-0.5, 1.5]
    """
    if ctx is None:
        digits = DEFAULT_DIGITS
    elif isinstance(ctx, PrecisionContext):
        digits = ctx.digits
    else:
        digits = ctx
    digits = _check_digits(digits)
    k = int(k)
    alpha = float(alpha)
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    if alpha < -(2 * k + 1) / 4:
        raise DomainError(f"alpha={alpha} below -(2k+1)/4")
    return _build(k, alpha, digits)


def _exact_x(x) -> mpq:
    if isinstance(x, mpmath.ctx_mp_python._mpf):
        man, exp = x.man_exp
        return mpq(man) * mpq(2) ** exp
    if isinstance(x, (int, float)):
        return mpq(x)
    return mpq(x)


def _fixed_x(cv: CoeffVector, x) -> mpz:
    xq = _exact_x(x)
    if abs(xq) > 1:
        raise DomainError(f"|x| must be <= 1, got {float(xq)}")
    return _to_fixed(xq, cv.frac_bits)


def _horner(coeffs: tuple, X: mpz, X2: mpz, bits: int, odd: bool) -> mpz:
    acc = mpz(0)
    for c in reversed(coeffs):
        acc = ((acc * X2) >> bits) + c
    if odd:
        acc = (acc * X) >> bits
    return acc


def _eval(cv: CoeffVector, x, which: int):
    X = _fixed_x(cv, x)
    bits = cv.frac_bits
    X2 = (X * X) >> bits
    if which == 0:
        coeffs, odd = cv._fixed, cv.parity == 1
    elif which == 1:
        coeffs, odd = cv._fixed_d1, cv.parity == 0
    else:
        coeffs, odd = cv._fixed_d2, cv.parity == 1
    acc = _horner(coeffs, X, X2, bits, odd)
    return cv.mp.mpf((acc, -bits))


def eval_p(cv: CoeffVector, x):
    """P_k^(alpha, alpha)(x) to ``cv.digits`` digits (absolute, on the scale of c_0)."""
    return _eval(cv, x, 0)


def eval_p_prime(cv: CoeffVector, x):
    return _eval(cv, x, 1)


def eval_p_second(cv: CoeffVector, x):
    return _eval(cv, x, 2)


def _mp_uq(cv: CoeffVector):
    mp = cv.mp
    a = mp.mpf(cv.alpha)
    u = (cv.k + a) * (cv.k + a + 1)
    return a, u, (a * a - 1) / u


def _weight(cv: CoeffVector, xm, exponent):
    """(1 - x^2)**exponent with the |x| = 1 cases handled explicitly."""
    mp = cv.mp
    one_minus = 1 - xm * xm
    if one_minus == 0:
        if exponent < 0:
            raise SingularityError("weight (1-x^2)^((alpha+1)/2) is singular at |x| = 1 for alpha < -1")
        return mp.one if exponent == 0 else mp.zero
    return mp.power(one_minus, exponent)


def eval_y(p: UltraParams, cv: CoeffVector, x):
    """Normal-form solution y = (1 - x^2)^((alpha+1)/2) P(x)."""
    mp = cv.mp
    xm = mp.mpf(x)
    a = mp.mpf(cv.alpha)
    return _weight(cv, xm, (a + 1) / 2) * eval_p(cv, x)


def eval_y_prime(p: UltraParams, cv: CoeffVector, x):
    mp = cv.mp
    xm = mp.mpf(x)
    a = mp.mpf(cv.alpha)
    one_minus = 1 - xm * xm
    if one_minus == 0:
        raise SingularityError("y' is not defined at |x| = 1")
    w = mp.power(one_minus, (a + 1) / 2)
    return w * (eval_p_prime(cv, x) - (a + 1) * xm / one_minus * eval_p(cv, x))


def _b_and_logderiv(cv: CoeffVector, xm):
    """b(x) and b'(x)/b(x) in working precision."""
    mp = cv.mp
    _, u, q = _mp_uq(cv)
    s = 1 - q - xm * xm
    if s <= 0:
        raise DomainError(f"b(x) <= 0 at x={mp.nstr(xm, 17)} (turning point sqrt(1-q) = {mp.nstr(mp.sqrt(1 - q), 17)})")
    one_minus = 1 - xm * xm
    b = mp.sqrt(s * u) / one_minus
    return b, xm * (2 / one_minus - 1 / s)


def eval_g_exact(p: UltraParams, cv: CoeffVector, x):
    """g(x) = sqrt(b(x)) y(x), defined strictly inside the turning point."""
    mp = cv.mp
    xm = mp.mpf(x)
    b, _ = _b_and_logderiv(cv, xm)
    return mp.sqrt(b) * eval_y(p, cv, x)


def eval_g_prime_exact(p: UltraParams, cv: CoeffVector, x):
    mp = cv.mp
    xm = mp.mpf(x)
    b, dlogb = _b_and_logderiv(cv, xm)
    return mp.sqrt(b) * (dlogb / 2 * eval_y(p, cv, x) + eval_y_prime(p, cv, x))


@dataclass(frozen=True)
class NormData:
    """Squared weighted L2 norm of P_k^(alpha, alpha) and the orthonormalizing factor."""

    L: mpmath.mpf
    scale: mpmath.mpf
    log_L: mpmath.mpf


def l2_norm_sq(k: int, alpha: float, digits: int = DEFAULT_DIGITS) -> NormData:
    """L = 2^(2a+1) Gamma(k+a+1)^2 / ((2k+2a+1) Gamma(k+2a+1) k!).

    Only meaningful for ``alpha > -(k+1)/2``; every gamma argument is then
    positive.
    """
    digits = _check_digits(digits)
    if not alpha > -(k + 1) / 2:
        raise DomainError(f"L2 norm undefined for alpha={alpha} <= -(k+1)/2")
    mp = mpmath.MPContext()
    mp.dps = digits + _GUARD_DIGITS
    a = mp.mpf(alpha)
    log_L = (
        (2 * a + 1) * mp.log(2)
        + 2 * mp.loggamma(k + a + 1)
        - mp.log(2 * k + 2 * a + 1)
        - mp.loggamma(k + 2 * a + 1)
        - mp.loggamma(k + 1)
    )
    return NormData(L=mp.exp(log_L), scale=mp.exp(-log_L / 2), log_L=log_L)


def recurrence_crosscheck(k: int, alpha: float, x, digits: int = DEFAULT_DIGITS):
    """P_k^(alpha, alpha)(x) by the three-term recurrence (independent of the coefficient build).

    Restricted to ``alpha > -1`` where no recurrence coefficient vanishes.
    """
    digits = _check_digits(digits)
    if not alpha > -1:
        raise DomainError(f"three-term recurrence restricted to alpha > -1, got {alpha}")
    mp = mpmath.MPContext()
    mp.dps = digits + _GUARD_DIGITS
    a = mp.mpf(alpha)
    xm = mp.mpf(x)
    if abs(xm) > 1:
        raise DomainError(f"|x| must be <= 1, got {x}")
    p_prev, p = mp.one, (a + 1) * xm
    if k == 0:
        return p_prev
    for n in range(2, k + 1):
        s = 2 * n + 2 * a
        p_prev, p = p, ((s - 1) * s * (s - 2) * xm * p - 2 * (n + a - 1) ** 2 * s * p_prev) / (
            2 * n * (n + 2 * a) * (s - 2)
        )
    return p
