"""The oracle is checked against references that share none of its code:
closed-form Legendre/Gegenbauer values, mpmath's hypergeometric Jacobi
polynomial, the three-term recurrence, and the ODE itself."""
import math
import warnings

import mpmath
import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from oscpoly.errors import DomainError, PrecisionError, SingularityError
from oscpoly.oracle import (
    PrecisionContext,
    build_coeffs,
    eval_g_exact,
    eval_g_prime_exact,
    eval_p,
    eval_p_prime,
    eval_p_second,
    eval_y,
    eval_y_prime,
    l2_norm_sq,
    recurrence_crosscheck,
)
from oscpoly.params import derive_params
from oscpoly.quadrature import adaptive_integrate
from oscpoly.wkb import g_zero_exact


def params(k, a):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return derive_params(k, a)


def mp_jacobi(k, a, x, dps=80):
    with mpmath.workdps(dps):
        return mpmath.jacobi(k, a, a, x)


def test_legendre_coefficients():
    cv = build_coeffs(2, 0.0)
    assert cv.coeffs == (mpq(-1, 2), mpq(3, 2))
    assert eval_p(cv, 0.0) == -0.5
    assert eval_p(cv, 1.0) == 1


def test_k2_alpha3_coefficients():
    cv = build_coeffs(2, 3.0)
    assert cv.coeffs == (mpq(-5, 4), mpq(45, 4))


def test_recurrence_terminates():
    for k in (4, 5, 9):
        cv = build_coeffs(k, 0.7)
        assert len(cv.coeffs) == k // 2 + 1
        assert cv.coeff(k) != 0
        assert cv.coeff(k + 2) == 0


def test_even_seed_product_form():
    k, a = 6, mpq(3, 2)
    cv = build_coeffs(k, 1.5)
    prod = mpq(1)
    for j in range(1, 4):
        prod *= (k + a - j + 1) / j
    assert cv.coeff(0) == mpq(-1, 4) ** 3 * prod


def test_precision_floor():
    with pytest.raises(PrecisionError):
        build_coeffs(4, 0.0, 29)
    with pytest.raises(PrecisionError):
        PrecisionContext(10)


def test_domain():
    with pytest.raises(DomainError):
        build_coeffs(4, -3.0)
    with pytest.raises(DomainError):
        eval_p(build_coeffs(4, 0.0), 1.5)


@pytest.mark.parametrize("k, a, x", [(2, 0.0, 0.3), (5, 0.0, -0.7), (6, 0.5, 0.3), (12, 2.25, 0.91),
                                     (30, -0.75, 0.2), (41, 7.0, 0.99), (80, 3.5, 0.999)])
def test_matches_mpmath_jacobi(k, a, x):
    cv = build_coeffs(k, a, 50)
    ref = mp_jacobi(k, a, x)
    val = eval_p(cv, x)
    assert abs(val - ref) <= mpmath.mpf(10) ** -45 * max(1, abs(ref))


@pytest.mark.parametrize("k, a", [(8, -1.5), (10, -2.4), (20, -5.25), (40, -10.25)])
def test_alpha_below_minus_one_matches_mpmath(k, a):
    # where the three-term recurrence is not usable
    cv = build_coeffs(k, a, 50)
    for x in (0.0, 0.37, 0.8):
        ref = mp_jacobi(k, a, x)
        assert abs(eval_p(cv, x) - ref) <= mpmath.mpf(10) ** -45 * max(1, abs(ref))


def test_recurrence_crosscheck_examples():
    assert recurrence_crosscheck(2, 0.0, 0.0) == -0.5
    assert recurrence_crosscheck(3, 0.0, 1.0) == 1
    cv = build_coeffs(6, 0.5, 50)
    assert abs(recurrence_crosscheck(6, 0.5, 0.3, 50) - eval_p(cv, 0.3)) < 1e-40
    with pytest.raises(DomainError):
        recurrence_crosscheck(4, -1.0, 0.1)


@settings(max_examples=60, deadline=None)
@given(k=st.integers(2, 120), a=st.floats(-0.99, 40), x=st.floats(-1, 1))
def test_dual_oracle_property(k, a, x):
    digits = 50
    cv = build_coeffs(k, a, digits)
    v = eval_p(cv, x)
    w = recurrence_crosscheck(k, a, x, digits)
    assert abs(v - w) <= mpmath.mpf(10) ** (-(digits - 5)) * max(1, abs(v))


@settings(max_examples=60, deadline=None)
@given(k=st.integers(2, 100), t=st.floats(0, 1), x=st.floats(-0.999, 0.999))
def test_ode_residual_property(k, t, x):
    a = -(2 * k + 1) / 4 + t * 2 * k
    digits = 50
    cv = build_coeffs(k, a, digits)
    mp = cv.mp
    xm, am = mp.mpf(x), mp.mpf(a)
    p0, p1, p2 = eval_p(cv, x), eval_p_prime(cv, x), eval_p_second(cv, x)
    terms = [(1 - xm * xm) * p2, -2 * (am + 1) * xm * p1, k * (k + 2 * am + 1) * p0]
    scale = max(max(abs(t_) for t_ in terms), abs(mp.mpf(float(cv.coeff(0)))), 1)
    assert abs(sum(terms)) <= mp.mpf(10) ** (-(digits - 8)) * scale


@pytest.mark.parametrize("k, a", [(2, 0.0), (10, 0.5), (20, -1.5), (31, 3.0), (60, 12.0)])
def test_normal_form_residual(k, a):
    """y'' + b^2 y = 0 with y'' from the coefficient form."""
    p = params(k, a)
    cv = build_coeffs(k, a, 50)
    mp = cv.mp
    am = mp.mpf(a)
    u = (k + am) * (k + am + 1)
    q = (am * am - 1) / u
    for x in (0.1, 0.45, 0.7):
        xm = mp.mpf(x)
        w = 1 - xm * xm
        P, P1, P2 = eval_p(cv, x), eval_p_prime(cv, x), eval_p_second(cv, x)
        e = (am + 1) / 2
        # y = w^e P, w' = -2x
        y2 = mp.power(w, e) * (P2 - 4 * e * xm / w * P1 + (-2 * e / w + 4 * e * (e - 1) * xm * xm / (w * w)) * P)
        y = eval_y(p, cv, x)
        b2 = (1 - q - xm * xm) * u / (w * w)
        assert abs(y2 + b2 * y) <= mp.mpf(10) ** -40 * max(abs(y2), abs(b2 * y))


def test_y_examples():
    p = params(2, 0.0)
    cv = build_coeffs(2, 0.0)
    assert eval_y(p, cv, 0.0) == -0.5
    assert eval_y_prime(p, cv, 0.0) == 0
    with mpmath.workdps(60):
        expected = mpmath.sqrt(mpmath.mpf(3) / 4) * (mpmath.mpf(3) / 8 - mpmath.mpf(1) / 2)
        assert abs(eval_y(p, cv, 0.5) - expected) < 1e-45


def test_y_singular_endpoint():
    p = params(8, -1.5)
    cv = build_coeffs(8, -1.5)
    with pytest.raises(SingularityError):
        eval_y(p, cv, 1.0)
    assert eval_y(params(8, 0.5), build_coeffs(8, 0.5), 1.0) == 0


def test_g_examples():
    p = params(2, 0.0)
    cv = build_coeffs(2, 0.0)
    with mpmath.workdps(60):
        # g = sqrt(b) y with b(0) = sqrt(u (1 - q)) = sqrt(7)
        ref = -mpmath.root(7, 4) / 2
        assert abs(eval_g_exact(p, cv, 0.0) - ref) < 1e-45
    assert eval_g_prime_exact(p, cv, 0.0) == 0
    with pytest.raises(DomainError):
        eval_g_exact(params(4, 3.0), build_coeffs(4, 3.0), 0.95)


def test_g_prime_matches_finite_difference():
    p = params(12, 2.5)
    cv = build_coeffs(12, 2.5, 60)
    mp = cv.mp
    x, h = mp.mpf("0.4"), mp.mpf(10) ** -20
    fd = (eval_g_exact(p, cv, x + h) - eval_g_exact(p, cv, x - h)) / (2 * h)
    assert abs(fd - eval_g_prime_exact(p, cv, x)) < 1e-30


@pytest.mark.parametrize("k, a", [(2, 0.0), (4, -1.05), (10, -2.5), (20, -5.25), (40, 3.0), (200, -100.25),
                                  (160, 40.0)])
def test_seed_identity(k, a):
    """g(0) from the coefficient seed equals the gamma-function closed form."""
    p = params(k, a)
    cv = build_coeffs(k, a, 50)
    g0 = eval_g_exact(p, cv, 0.0)
    closed = g_zero_exact(p, 50)
    assert abs(g0 - closed) <= mpmath.mpf(10) ** -40 * abs(closed)


def test_l2_norm_gamma_form():
    with mpmath.workdps(60):
        for k, a in [(6, -0.85), (11, 2.5), (30, 0.0)]:
            am = mpmath.mpf(a)
            ref = (2 ** (2 * am + 1) * mpmath.gamma(k + am + 1) ** 2
                   / ((2 * k + 2 * am + 1) * mpmath.factorial(k) * mpmath.gamma(k + 2 * am + 1)))
            assert abs(l2_norm_sq(k, a).L - ref) < mpmath.mpf(10) ** -45 * ref


def test_l2_norm_examples():
    with mpmath.workdps(60):
        assert abs(l2_norm_sq(2, 0.0).L - mpmath.mpf(2) / 5) < 1e-40
        assert abs(l2_norm_sq(2, 1.0).L - mpmath.mpf(6) / 7) < 1e-40
    nd = l2_norm_sq(5, 0.25)
    assert abs(nd.scale ** 2 * nd.L - 1) < 1e-40
    with pytest.raises(DomainError):
        l2_norm_sq(3, -2.0)


@pytest.mark.parametrize("k, a", [(2, -0.5), (3, 0.0), (7, 0.5), (12, 1.0), (16, 3.0), (9, 5.0), (6, -0.85)])
def test_l2_norm_vs_quadrature(k, a):
    cv = build_coeffs(k, a, 30)
    L = float(l2_norm_sq(k, a).L)
    if a >= 0:
        # x = sin t makes the integrand smooth for GK15
        mp = cv.mp

        def f(t):
            return float(mp.power(mp.cos(t), 2 * a + 1) * eval_p(cv, math.sin(t)) ** 2)

        val = adaptive_integrate(f, -math.pi / 2, math.pi / 2, 1e-13, rtol=1e-12)
    else:
        # 1 - x = v^(1/(1+a)) absorbs the endpoint singularity; the integrand is even
        e = 1 / (1 + a)

        def f(v):
            x = 1 - v ** e
            return e * (2 - v ** e) ** a * float(eval_p(cv, x)) ** 2

        val = 2 * adaptive_integrate(f, 0.0, 1.0, 1e-14, rtol=1e-12)
    assert val == pytest.approx(L, rel=1e-8)


def test_high_degree_precision_escalates():
    cv = build_coeffs(400, 1.0, 40)
    ref = mp_jacobi(400, 1.0, 0.9999, 120)
    assert abs(eval_p(cv, 0.9999) - ref) <= mpmath.mpf(10) ** -35 * max(1, abs(ref))
