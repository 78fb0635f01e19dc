"""Laplace expansions of int_0^1 f(x) e^{n ell(x)} dx and limiting moments.

The observables are f(x) = x^m / sqrt(x(1-x)).  Around a maximizer c with
ell(c + u) = ell(c) + b2 u^2 + b3 u^3 + ..., the regular expansion is

    e^{n ell(c)} * 2 [n^{-1/2} d0 alpha1 + n^{-3/2} Lambda],
    Lambda = d2 alpha3 + d1 b3 alpha5 + d0 b4 alpha5 + d0 b3^2 alpha7 / 2,

with alpha_k = Gamma(k/2) |b2|^{-k/2} / 2.  The factor 2 turns the
half-line Gaussian moments carried by alpha_k into full-line ones.  At the
critical point b2 = b3 = 0 and the quartic analogue uses
gamma_k = Gamma(k/4) |b4|^{-k/4} / 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .curve import classify_point
from .errors import ConvergenceError, DomainError, SingularCoefficientError
from .model import (
    ModelParams,
    PhaseClassification,
    Regime,
    ell,
    ell_deriv,
    inflection_points,
)

SINGULAR = 1e-14
ALPHA_ORDERS = (1, 3, 5, 7)
GAMMA_ORDERS = (1, 3, 7, 11)
gamma = math.gamma


def _binom(a: float, j: int) -> float:
    out = 1.0
    for t in range(j):
        out *= (a - t) / (t + 1)
    return out


def taylor_coeffs_f(c: float, m: int, up_to: int = 2) -> tuple[float, ...]:
    """Taylor coefficients d_j of x^m / sqrt(x(1-x)) at c, j = 0..up_to.

    Uses f = x^(m-1/2) (1-x)^(-1/2) and multiplies the two binomial series.
    """
    if not 0 < c < 1:
        raise DomainError("expansion centre must lie in (0, 1)")
    a = m - 0.5
    left = [c**a * _binom(a, j) * c ** (-j) for j in range(up_to + 1)]
    # (1-x)^(-1/2) = (1-c)^(-1/2) (1 - u/(1-c))^(-1/2)
    right = [(1 - c) ** -0.5 * _binom(-0.5, j) * (-1) ** j * (1 - c) ** (-j)
             for j in range(up_to + 1)]
    return tuple(sum(left[i] * right[j - i] for i in range(j + 1)) for j in range(up_to + 1))


@dataclass(frozen=True)
class LaplaceCoefficients:
    c: float
    b: tuple[float, ...]  # b[k] = ell^(k)(c) / k!, k = 0..6
    alpha: dict[int, float] = field(default_factory=dict)
    gamma_: dict[int, float] = field(default_factory=dict)
    d: dict[int, tuple[float, float, float]] = field(default_factory=dict)


def laplace_coefficients(c: float, params: ModelParams, ms=None) -> LaplaceCoefficients:
    p = params.p
    b = [ell(c, params)] + [ell_deriv(c, params, k) / math.factorial(k) for k in range(1, 7)]
    alpha = {}
    if abs(b[2]) > SINGULAR:
        alpha = {k: 0.5 * gamma(k / 2) * abs(b[2]) ** (-k / 2) for k in ALPHA_ORDERS}
    gam = {}
    if abs(b[4]) > SINGULAR:
        gam = {k: 0.25 * gamma(k / 4) * abs(b[4]) ** (-k / 4) for k in GAMMA_ORDERS}
    if ms is None:
        ms = sorted({0, 1, 2, p, p + 1, 2 * p})
    d = {m: taylor_coeffs_f(c, m) for m in ms}
    return LaplaceCoefficients(c, tuple(b), alpha, gam, d)


@dataclass(frozen=True)
class LaplaceExpansion:
    """Truncated expansion value = mantissa * exp(log_scale)."""

    log_scale: float
    mantissa: float
    regime: Regime

    @property
    def log_value(self) -> float:
        return self.log_scale + math.log(self.mantissa)


def _regular_terms(co: LaplaceCoefficients, m: int, n: int, with_lambda: bool = True) -> float:
    if not co.alpha:
        raise SingularCoefficientError(f"|b2| below {SINGULAR} at c = {co.c}")
    d0, d1, d2 = co.d[m]
    a, b = co.alpha, co.b
    lead = n**-0.5 * d0 * a[1]
    if not with_lambda:
        return 2 * lead
    lam = d2 * a[3] + d1 * b[3] * a[5] + d0 * b[4] * a[5] + 0.5 * d0 * b[3] ** 2 * a[7]
    return 2 * (lead + n**-1.5 * lam)


def _critical_terms(co: LaplaceCoefficients, m: int, n: int) -> float:
    if not co.gamma_:
        raise SingularCoefficientError(f"|b4| below {SINGULAR} at c = {co.c}")
    d0, d1, d2 = co.d[m]
    g, b = co.gamma_, co.b
    theta = d2 * g[3] + d1 * b[5] * g[7] + d0 * b[6] * g[7] + 0.5 * d0 * b[5] ** 2 * g[11]
    return 2 * (n**-0.25 * d0 * g[1] + n**-0.75 * theta)


def laplace_expand(params: ModelParams, n: int, m: int,
                   cls: PhaseClassification | None = None) -> LaplaceExpansion:
    """Asymptotic value of int_0^1 x^m (x(1-x))^{-1/2} e^{n ell(x)} dx."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if cls is None:
        cls = classify_point(params)
    if cls.regime is Regime.OFF_CURVE:
        co = laplace_coefficients(cls.x_star, params, ms=[m])
        mant = _regular_terms(co, m, n)
    elif cls.regime is Regime.CRITICAL:
        co = laplace_coefficients(cls.x_star, params, ms=[m])
        mant = _critical_terms(co, m, n)
    else:
        mant = sum(_regular_terms(laplace_coefficients(c, params, ms=[m]), m, n, with_lambda=False)
                   for c in cls.maximizers)
    return LaplaceExpansion(n * cls.ell_value, mant, cls.regime)


def _peak_width(c: float, params: ModelParams, n: int) -> float:
    l2 = abs(ell_deriv(c, params, 2))
    if l2 > 1e-8:
        return (n * l2) ** -0.5
    return (n * abs(ell_deriv(c, params, 4)) / 24) ** -0.25


def quadrature_integral(params: ModelParams, n: int, m: int,
                        cls: PhaseClassification | None = None,
                        epsabs: float = 1e-12) -> float:
    """log of int_0^1 x^m (x(1-x))^{-1/2} e^{n ell(x)} dx by adaptive quadrature.

    Substituting x = sin^2(theta) removes both endpoint singularities; the
    integrand is shifted by n ell(x*) and panels are split at every maximizer,
    at the zeros of ell'', and at a ladder of peak widths around each maximizer.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    if cls is None:
        cls = classify_point(params)
    lstar = cls.ell_value
    xs = {0.0, 1.0, *cls.maximizers}
    infl = inflection_points(params)
    if infl:
        xs.update(infl)
    if n > 0:
        for c in cls.maximizers:
            w = _peak_width(c, params, n)
            for k in (1, 2, 4, 8, 16, 32):
                xs.update((c - k * w, c + k * w))
    pts = sorted(math.asin(math.sqrt(x)) for x in xs if 0.0 <= x <= 1.0)

    def integrand(theta):
        x = math.sin(theta) ** 2
        if x <= 0.0 or x >= 1.0:
            lx = 0.0
        else:
            lx = ell(x, params)
        return 2.0 * x**m * math.exp(n * (lx - lstar))

    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        if b - a <= 0:
            continue
        val, _, info, *rest = quad(integrand, a, b, epsabs=epsabs, epsrel=1e-11,
                                   limit=200, full_output=1)
        if rest:  # scipy appends a message when ier > 0
            raise ConvergenceError(f"quadrature did not converge on [{a}, {b}]: {rest[0]}")
        total += val
    return n * lstar + math.log(total)


@dataclass(frozen=True)
class RegimeLimits:
    regime: PhaseClassification
    psi_limit: float
    var_edge: float
    var_star: float
    cov: float
    scale_exponent: float
    edge_prob: float
    alpha_mix: float | None = None


def mixture_weight(x: float, params: ModelParams) -> float:
    """sqrt(x (1-x) |ell''(x)|)."""
    return math.sqrt(x * (1 - x) * abs(ell_deriv(x, params, 2)))


def critical_constant() -> float:
    """2 sqrt(6) Gamma(3/4) / Gamma(1/4)."""
    return 2 * math.sqrt(6) * gamma(0.75) / gamma(0.25)


def limiting_values(params: ModelParams, cls: PhaseClassification | None = None) -> RegimeLimits:
    """Large-n limits of the scaled variances, covariance and edge probability.

    The variances are limits of n^-s times the second derivatives of psi_n,
    where s is ``scale_exponent``.
    """
    if cls is None:
        cls = classify_point(params)
    p = params.p
    if cls.regime is Regime.OFF_CURVE:
        x = cls.x_star
        inv = 1.0 / abs(ell_deriv(x, params, 2))
        return RegimeLimits(cls, cls.ell_value, inv, p**2 * x ** (2 * p - 2) * inv,
                            p * x ** (p - 1) * inv, 0.0, x)
    if cls.regime is Regime.CRITICAL:
        k = critical_constant()
        return RegimeLimits(
            cls, cls.ell_value,
            k * (p - 1) / p**2.5,
            k * (p - 1) ** (2 * p - 1) / p ** (2 * p - 1.5),
            k * (p - 1) ** p / p ** (p + 0.5),
            0.5, cls.x_star,
        )
    x1, x2 = cls.maximizers
    w1, w2 = mixture_weight(x1, params), mixture_weight(x2, params)
    common = w1 * w2 / (w1 + w2) ** 2
    de = x1 - x2
    ds = x1**p - x2**p
    alpha = w2 / (w1 + w2)
    return RegimeLimits(cls, cls.ell_value, de * de * common, ds * ds * common, ds * de * common,
                        1.0, alpha * x1 + (1 - alpha) * x2, alpha)
