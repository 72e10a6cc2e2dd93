"""Certified WKB evaluation of ultraspherical polynomials P_k^(alpha, alpha).

The main entry points:

* :func:`derive_params` maps ``(k, alpha)`` to the working parameters.
* :func:`approx_g` gives the main term ``g(0) cos B(x)`` with its certified
  relative error radius.
* :func:`build_coeffs` and :func:`eval_g_exact` form the extended-precision
  oracle.
* :mod:`oscpoly.analysis` holds the scans, zero finding and the mass
  computation.
"""
from .errors import (
    ConvergenceError,
    DomainError,
    InputError,
    NormalizationWarning,
    OscPolyError,
    PrecisionError,
    RangeError,
    SingularityError,
    ToleranceError,
)
from .params import (
    Case,
    MuBranch,
    QBranch,
    Regime,
    TheoremInterval,
    UltraParams,
    classify_regime,
    derive_params,
    q_range_check,
    theorem_interval,
)
from .oracle import (
    CoeffVector,
    NormData,
    PrecisionContext,
    build_coeffs,
    eval_g_exact,
    eval_g_prime_exact,
    eval_p,
    eval_p_prime,
    eval_y,
    eval_y_prime,
    l2_norm_sq,
    recurrence_crosscheck,
)
from .wkb import (
    CertifiedValue,
    EnvelopeEval,
    PhaseEval,
    approx_g,
    approx_g_grid,
    g_zero,
    mu_bound,
    phase_B_closed,
    phase_B_phi,
    phase_B_quadrature,
    r_bound,
)
from ._accel import BACKEND

__version__ = "0.1.0"
