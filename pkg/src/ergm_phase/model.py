"""The scalar function ell, its derivatives, and its global maximizers.

For the directed edge/p-star model the limiting free energy is the maximum
over (0, 1) of

    ell(x) = beta1 x + beta2 x^p - x log x - (1 - x) log(1 - x).

Everything in the package that talks about regimes (off the transition
curve, on it, at its critical endpoint) goes through
:func:`find_maximizers`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit, xlogy

from .errors import ConvergenceError, DomainError

DEFAULT_TOL = 1e-12
DEFAULT_CURVE_TOL = 1e-10
MAX_ITER = 200


@dataclass(frozen=True)
class ModelParams:
    beta1: float
    beta2: float
    p: int = 2

    def __post_init__(self):
        p = self.p
        if isinstance(p, float) and p.is_integer():
            p = int(p)
        if isinstance(p, bool) or not isinstance(p, (int, np.integer)):
            raise DomainError(f"p must be an integer >= 2, got {p!r}")
        object.__setattr__(self, "p", int(p))
        if self.p < 2:
            raise DomainError(f"p must be >= 2, got {self.p}")
        object.__setattr__(self, "beta1", float(self.beta1))
        object.__setattr__(self, "beta2", float(self.beta2))
        if not (math.isfinite(self.beta1) and math.isfinite(self.beta2)):
            raise DomainError("beta1 and beta2 must be finite")


class Regime(str, enum.Enum):
    OFF_CURVE = "off-curve"
    ON_CURVE = "on-curve"
    CRITICAL = "critical"


@dataclass(frozen=True)
class PhaseClassification:
    """Global maximizer structure of ell.

    ``maximizers`` holds one point for the off-curve and critical regimes
    and two ordered points on the transition curve.
    """

    regime: Regime
    maximizers: tuple[float, ...]
    ell_value: float

    @property
    def x_star(self) -> float:
        if self.regime is Regime.ON_CURVE:
            raise AttributeError("on-curve classification has two maximizers")
        return self.maximizers[0]

    @property
    def x1_star(self) -> float:
        return self.maximizers[0]

    @property
    def x2_star(self) -> float:
        return self.maximizers[-1]


def critical_point(p: int) -> tuple[float, float]:
    """Endpoint (beta1_c, beta2_c) of the phase transition curve."""
    if p < 2:
        raise DomainError(f"p must be >= 2, got {p}")
    return math.log(p - 1) - p / (p - 1), p ** (p - 1) / (p - 1) ** p


def ell(x, params: ModelParams):
    """ell on the closed interval [0, 1] (continuous extension at the ends)."""
    xa = np.asarray(x, dtype=float)
    if np.any((xa < 0) | (xa > 1)) or np.any(np.isnan(xa)):
        raise DomainError("ell is defined on [0, 1]")
    val = (params.beta1 * xa + params.beta2 * xa**params.p
           - xlogy(xa, xa) - xlogy(1 - xa, 1 - xa))
    return float(val) if np.ndim(val) == 0 else val


def _falling(p: int, k: int) -> int:
    out = 1
    for j in range(k):
        out *= p - j
    return out


def ell_deriv(x, params: ModelParams, order: int):
    """Closed-form derivative of ell of the given order (1 to 6) on (0, 1)."""
    if not 1 <= order <= 6:
        raise DomainError(f"derivative order must be in 1..6, got {order}")
    xa = np.asarray(x, dtype=float)
    if np.any((xa <= 0) | (xa >= 1)) or np.any(np.isnan(xa)):
        raise DomainError("derivatives of ell exist only on the open interval (0, 1)")
    p = params.p
    coef = _falling(p, order)
    star = params.beta2 * coef * xa ** (p - order) if coef else 0.0 * xa
    if order == 1:
        val = params.beta1 + star - (np.log(xa) - np.log1p(-xa))
    else:
        # entropy part: -(-1)^k (k-2)! / x^(k-1) - (k-2)! / (1-x)^(k-1)
        f = math.factorial(order - 2)
        sign = -1.0 if order % 2 == 0 else 1.0
        val = star + sign * f / xa ** (order - 1) - f / (1 - xa) ** (order - 1)
    return float(val) if np.ndim(val) == 0 else val


def _dell_logit(y: float, params: ModelParams) -> float:
    # ell'(x) written in y = log(x/(1-x)); exact in the log-odds term
    return params.beta1 + params.p * params.beta2 * expit(y) ** (params.p - 1) - y


def _solve(f, a, b, xtol, what):
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if fa * fb > 0:
        raise ConvergenceError(f"{what}: no sign change on [{a!r}, {b!r}]")
    try:
        return brentq(f, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=MAX_ITER)
    except RuntimeError as exc:
        raise ConvergenceError(f"{what}: {exc}") from exc


def inflection_points(params: ModelParams) -> tuple[float, float] | None:
    """Zeros u1 < (p-1)/p < u2 of ell'', or None when ell'' <= 0 throughout.

    ell''(x) = 0 is equivalent to p(p-1) beta2 x^(p-1) (1-x) = 1, whose
    left side rises on (0, (p-1)/p) and falls on ((p-1)/p, 1).
    """
    p = params.p
    _, b2c = critical_point(p)
    if params.beta2 <= b2c:
        return None
    c = (p - 1) / p
    k = p * (p - 1) * params.beta2

    def h(x):
        return k * x ** (p - 1) * (1 - x) - 1.0

    u1 = _solve(h, 0.0, c, 1e-15, "left inflection point")
    u2 = _solve(h, c, 1.0, 1e-15, "right inflection point")
    return u1, u2


def local_maximizers(params: ModelParams, tol: float = DEFAULT_TOL) -> list[float]:
    """All local maximizers of ell in (0, 1), in increasing order.

    Between consecutive zeros of ell'' the derivative ell' is monotone, so
    each sign change of ell' is bracketed and refined in log-odds space.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    pb2 = params.p * params.beta2
    # the root y of ell' satisfies beta1 + min(0, p beta2) <= y <= beta1 + max(0, p beta2)
    ylo = params.beta1 + min(0.0, pb2) - 1.0
    yhi = params.beta1 + max(0.0, pb2) + 1.0
    ytol = 4 * tol

    def f(y):
        return _dell_logit(y, params)

    def logit(u):
        return math.log(u) - math.log1p(-u)

    infl = inflection_points(params)
    if infl is None:
        return [float(expit(_solve(f, ylo, yhi, ytol, "maximizer")))]
    y1, y2 = logit(infl[0]), logit(infl[1])
    d1, d2 = f(y1), f(y2)
    out = []
    if d1 < 0:
        out.append(float(expit(_solve(f, min(ylo, y1), y1, ytol, "left maximizer"))))
    if d2 > 0:
        out.append(float(expit(_solve(f, y2, max(yhi, y2), ytol, "right maximizer"))))
    if not out:
        # d1 >= 0 >= d2 contradicts monotonicity of ell' on (u1, u2)
        raise ConvergenceError("inconsistent derivative signs at inflection points")
    return out


def find_maximizers(
    params: ModelParams,
    tol: float = DEFAULT_TOL,
    curve_tol: float = DEFAULT_CURVE_TOL,
) -> PhaseClassification:
    """Locate and classify the global maximizers of ell.

    A point within ``curve_tol`` (max-norm) of the critical point is reported
    as critical with maximizer exactly (p-1)/p.  Two local maxima whose
    heights agree to ``curve_tol * max(1, |ell|)`` are reported as lying on
    the transition curve; otherwise the higher one wins.
    """
    if curve_tol <= 0:
        raise DomainError("curve_tol must be positive")
    p = params.p
    b1c, b2c = critical_point(p)
    if max(abs(params.beta1 - b1c), abs(params.beta2 - b2c)) < curve_tol:
        xc = (p - 1) / p
        return PhaseClassification(Regime.CRITICAL, (xc,), ell(xc, params))
    xs = local_maximizers(params, tol)
    heights = [ell(x, params) for x in xs]
    if len(xs) == 2:
        h1, h2 = heights
        if abs(h1 - h2) < curve_tol * max(1.0, abs(h1)):
            return PhaseClassification(Regime.ON_CURVE, (xs[0], xs[1]), max(h1, h2))
        j = 0 if h1 > h2 else 1
        return PhaseClassification(Regime.OFF_CURVE, (xs[j],), heights[j])
    return PhaseClassification(Regime.OFF_CURVE, (xs[0],), heights[0])
