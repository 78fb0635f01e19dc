"""Regime classification and the phase transition curve beta2 = q(beta1)."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketError, ConvergenceError, DegenerateError, DomainError
from .model import (
    DEFAULT_CURVE_TOL,
    DEFAULT_TOL,
    ModelParams,
    PhaseClassification,
    critical_point,
    ell,
    ell_deriv,
    find_maximizers,
    local_maximizers,
)

log = logging.getLogger(__name__)

NEAR_CRITICAL = 1e-4
MAX_BISECT = 200
MAX_EXPAND = 60


def classify_point(params: ModelParams, curve_tol: float = DEFAULT_CURVE_TOL,
                   tol: float = DEFAULT_TOL) -> PhaseClassification:
    """Regime of ``params``: off-curve, on-curve or critical.

    Critical when within ``curve_tol`` of the critical point in max-norm;
    on-curve when two local maxima of ell agree in height to
    ``curve_tol * max(1, |ell|)``.
    """
    return find_maximizers(params, tol=tol, curve_tol=curve_tol)


@dataclass(frozen=True)
class CurvePoint:
    beta1: float
    beta2: float
    p: int
    x1_star: float
    x2_star: float
    q_prime: float
    residual: float

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.beta1, self.beta2, self.p)


def _height_gap(beta1: float, beta2: float, p: int, x_tol: float):
    """(side, x1, x2, gap) with gap = ell(x2*) - ell(x1*).

    side is -1 when only the left local maximum exists (beta2 below the
    two-maximizer window), +1 when only the right one exists, 0 otherwise.
    """
    params = ModelParams(beta1, beta2, p)
    xs = local_maximizers(params, x_tol)
    c = (p - 1) / p
    if len(xs) == 1:
        return (-1 if xs[0] < c else 1), xs[0], xs[0], math.nan
    x1, x2 = xs
    return 0, x1, x2, ell(x2, params) - ell(x1, params)


def _sign(side: int, gap: float) -> int:
    if side:
        return side
    return 1 if gap > 0 else (-1 if gap < 0 else 0)


def q_prime(point: CurvePoint) -> float:
    """Slope of the transition curve from the two maximizers."""
    x1, x2, p = point.x1_star, point.x2_star, point.p
    if abs(x1 - x2) < 1e-8:
        raise DegenerateError("maximizers too close to evaluate q'")
    return -(x1 - x2) / (x1**p - x2**p)


def _slope(x1: float, x2: float, p: int) -> float:
    return -(x1 - x2) / (x1**p - x2**p)


def solve_q(beta1: float, p: int, tol: float = DEFAULT_CURVE_TOL,
            x_tol: float = DEFAULT_TOL, guess: float | None = None) -> CurvePoint:
    """Solve for q(beta1) by bisection on the height gap of the two local maxima.

    The gap is increasing in beta2, and outside the two-maximizer window its
    sign is that of the side on which the lone maximizer sits.
    """
    b1c, b2c = critical_point(p)
    if beta1 >= b1c - NEAR_CRITICAL:
        raise BracketError(
            f"beta1 = {beta1} is not below the critical value {b1c:.6g} by at least {NEAR_CRITICAL}")

    def probe(b2):
        side, x1, x2, gap = _height_gap(beta1, b2, p, x_tol)
        return _sign(side, gap), (side, x1, x2, gap)

    if guess is not None and guess > b2c:
        w = 1e-3 * max(1.0, abs(guess))
        lo, hi = max(b2c, guess - w), guess + w
    else:
        w = 1.0
        lo, hi = b2c, b2c + w
    for _ in range(MAX_EXPAND):
        if lo == b2c or probe(lo)[0] < 0:
            break
        w *= 2
        lo = max(b2c, lo - w)
    for _ in range(MAX_EXPAND):
        if probe(hi)[0] >= 0:
            break
        lo = hi
        w *= 2
        hi = hi + w
    else:
        raise BracketError(f"no two-maximizer window found for beta1 = {beta1}")

    # Bisect to (near) machine precision rather than stopping at |gap| < tol:
    # close to the critical point ell'' is small and a loose beta2 moves both
    # maximizers, which would spoil q'.  ``tol`` is then an acceptance test.
    best = None
    for _ in range(MAX_BISECT):
        mid = 0.5 * (lo + hi)
        s, info = probe(mid)
        side, x1, x2, gap = info
        if side == 0 and (best is None or abs(gap) <= best[3]):
            best = (mid, x1, x2, abs(gap))
        if s > 0:
            hi = mid
        elif s < 0:
            lo = mid
        else:
            break
        if hi - lo <= 4 * np.finfo(float).eps * abs(mid):
            break
    if best is None or best[3] >= tol:
        raise ConvergenceError(f"q({beta1}) did not converge to tolerance {tol}")
    b2, x1, x2, res = best
    return CurvePoint(beta1, b2, p, x1, x2, _slope(x1, x2, p), res)


def curve_residuals(point: CurvePoint) -> tuple[float, float, float]:
    """|ell'(x1*)|, |ell'(x2*)| and the height mismatch at a curve point."""
    params = point.params
    return (
        abs(ell_deriv(point.x1_star, params, 1)),
        abs(ell_deriv(point.x2_star, params, 1)),
        abs(ell(point.x1_star, params) - ell(point.x2_star, params)),
    )


def limit_slope_at_critical(p: int) -> float:
    """lim q'(beta1) as beta1 rises to the critical value."""
    return -(p ** (p - 2)) / (p - 1) ** (p - 1)


def trace_curve(p: int, beta1_start: float, beta1_end: float, step: float,
                tol: float = DEFAULT_CURVE_TOL, x_tol: float = DEFAULT_TOL) -> list[CurvePoint]:
    """March beta1 downward from ``beta1_start`` to ``beta1_end``.

    Each solve is warm-started from a tangent predictor built from the
    previous point's slope.  Points are returned by decreasing beta1.
    """
    b1c, _ = critical_point(p)
    if step <= 0:
        raise DomainError("step must be positive")
    if beta1_end > beta1_start:
        raise DomainError("beta1_end must not exceed beta1_start")
    if beta1_start >= b1c - NEAR_CRITICAL:
        raise DomainError(f"beta1_start must be below {b1c - NEAR_CRITICAL:.6g}")
    count = int(math.floor((beta1_start - beta1_end) / step + 1e-9)) + 1
    points: list[CurvePoint] = []
    for k in range(count):
        b1 = beta1_start - k * step
        guess = None
        if points:
            prev = points[-1]
            guess = prev.beta2 + prev.q_prime * (b1 - prev.beta1)
        try:
            points.append(solve_q(b1, p, tol=tol, x_tol=x_tol, guess=guess))
        except ConvergenceError as exc:
            raise ConvergenceError(f"curve trace failed at beta1 = {b1}: {exc}") from exc
    return points


def feasible_start(p: int, beta1_start: float, step: float) -> float | None:
    """First grid value beta1_start - k*step lying safely below the critical point."""
    b1c, _ = critical_point(p)
    limit = b1c - NEAR_CRITICAL
    if beta1_start < limit:
        return beta1_start
    k = math.floor((beta1_start - limit) / step) + 1
    return beta1_start - k * step
