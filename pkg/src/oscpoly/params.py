"""Parameterization of ultraspherical polynomials P_k^(alpha, alpha).

Everything downstream works in the coordinates

    u = (k + alpha)(k + alpha + 1),    q = (alpha^2 - 1) / u,

which make the normal-form frequency b(x) = sqrt((1 - q - x^2) u) / (1 - x^2)
and all error envelopes short.  This module owns the domain checks and the
regime bookkeeping that decides which branch of each closed form applies.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, NormalizationWarning

__all__ = [
    "SQRT_7_6",
    "SQRT_10_3",
    "Q_FLOOR",
    "QBranch",
    "MuBranch",
    "Case",
    "UltraParams",
    "Regime",
    "TheoremInterval",
    "derive_params",
    "q_range_check",
    "q_lower_bound",
    "theorem_interval",
    "classify_regime",
    "alpha_pm",
]

SQRT_7_6 = math.sqrt(7.0 / 6.0)
SQRT_10_3 = math.sqrt(10.0) / 3.0
Q_FLOOR = 4.0 * math.sqrt(6.0) - 10.0

# |alpha| this close to sqrt(7/6) counts as the closed endpoint of case II
_BOUNDARY_ULPS = 4


class QBranch(str, enum.Enum):
    QNeg = "QNeg"
    QSmall = "QSmall"
    QLarge = "QLarge"


class MuBranch(str, enum.Enum):
    Outer = "Outer"
    Middle = "Middle"
    Inner = "Inner"


class Case(str, enum.Enum):
    I = "I"  # noqa: E741
    II = "II"


@dataclass(frozen=True)
class UltraParams:
    """Degree ``k`` and parameter ``alpha`` with the derived ``u`` and ``q``."""

    k: int
    alpha: float
    u: float
    q: float
    one_minus_q: float
    normalizable: bool = True

    @property
    def parity(self) -> str:
        return "even" if self.k % 2 == 0 else "odd"

    @property
    def turning_point(self) -> float:
        """sqrt(1 - q), where b(x) vanishes, rounded so that x^2 <= 1 - q holds exactly."""
        return _sqrt_down(self.one_minus_q)


@dataclass(frozen=True)
class Regime:
    q_branch: QBranch
    mu_branch: MuBranch
    alpha_minus: float
    alpha_plus: float
    on_boundary: bool = False  # |alpha| == sqrt(7/6) up to rounding


@dataclass(frozen=True)
class TheoremInterval:
    x_end: float
    case: Case


def derive_params(k: int, alpha: float) -> UltraParams:
    """Validate ``(k, alpha)`` and compute ``u``, ``q`` and ``1 - q``.

    All three are correctly rounded values of the exact rationals for the
    binary ``alpha``.

    Raises
    ------
    DomainError
        If ``k < 2`` or ``alpha < -(2k+1)/4``.

    Warns
    -----
    NormalizationWarning
        If ``alpha <= -(k+1)/2``; the parameters stay usable but the
        orthonormal scaling is undefined.
    """
    if isinstance(k, bool) or int(k) != k:
        raise DomainError(f"k must be an integer, got {k!r}")
    k = int(k)
    alpha = float(alpha)
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    if not math.isfinite(alpha):
        raise DomainError(f"alpha must be finite, got {alpha}")
    if alpha < -(2 * k + 1) / 4:
        raise DomainError(f"alpha={alpha} is below the floor -(2k+1)/4 = {-(2 * k + 1) / 4}")
    # exact rationals, rounded once: 1 - q cancels badly when alpha ~ -k/2
    a = Fraction(alpha)
    u_exact = (k + a) * (k + a + 1)
    q_exact = (a * a - 1) / u_exact
    u, q, one_minus_q = float(u_exact), float(q_exact), float(1 - q_exact)
    if not q_exact < 1:
        raise DomainError(f"q={q} must be < 1")
    normalizable = alpha > -(k + 1) / 2
    if not normalizable:
        warnings.warn(
            f"alpha={alpha} <= -(k+1)/2: orthonormal normalization undefined",
            NormalizationWarning,
            stacklevel=2,
        )
    return UltraParams(k=k, alpha=alpha, u=u, q=q, one_minus_q=one_minus_q, normalizable=normalizable)


def q_lower_bound(k: int) -> float:
    """The k-dependent lower bound on q, -2 / (k^2 + k - 1 + sqrt((k-1)k(k+1)(k+2)))."""
    return -2.0 / (k * k + k - 1 + math.sqrt((k - 1) * k * (k + 1) * (k + 2)))


def q_range_check(p: UltraParams) -> bool:
    """Self-test of 4 sqrt(6) - 10 <= q_lower_bound(k) <= q < 1."""
    mid = q_lower_bound(p.k)
    # the outer inequality is an equality at k = 2
    return Q_FLOOR <= mid + 1e-15 and mid <= p.q < 1.0


def _sqrt_down(v: float) -> float:
    r = math.sqrt(v)
    while Fraction(r) ** 2 > Fraction(v):
        r = math.nextafter(r, 0.0)
    return r


def _is_boundary(alpha: float) -> bool:
    return abs(abs(alpha) - SQRT_7_6) <= _BOUNDARY_ULPS * math.ulp(SQRT_7_6)


def _below_sqrt_7_6(alpha: float) -> bool:
    return abs(alpha) < SQRT_7_6 and not _is_boundary(alpha)


def theorem_interval(p: UltraParams) -> TheoremInterval:
    if _below_sqrt_7_6(p.alpha):
        return TheoremInterval(math.sqrt(1.0 - 1.0 / p.u), Case.I)
    return TheoremInterval(p.turning_point, Case.II)


def alpha_pm(k: int) -> tuple[float, float]:
    """Roots in alpha of q = 1/4, i.e. (2k+1 -/+ sqrt(16k^2+16k+49)) / 6."""
    s = math.sqrt(16 * k * k + 16 * k + 49)
    return (2 * k + 1 - s) / 6, (2 * k + 1 + s) / 6


def classify_regime(p: UltraParams) -> Regime:
    a_minus, a_plus = alpha_pm(p.k)
    if p.q < 0:
        qb = QBranch.QNeg
    elif p.q < 0.5:
        qb = QBranch.QSmall
    else:
        qb = QBranch.QLarge
    if p.q >= 0.25:
        mb = MuBranch.Outer
    elif _below_sqrt_7_6(p.alpha):
        mb = MuBranch.Inner
    else:
        mb = MuBranch.Middle
    return Regime(qb, mb, a_minus, a_plus, on_boundary=_is_boundary(p.alpha))
