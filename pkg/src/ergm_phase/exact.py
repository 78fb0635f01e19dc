"""Exact finite-n free energy and its derivatives.

Rows of the adjacency matrix are independent, and the out-degree of each
node follows Binomial(n, 1/2) reweighted by exp(beta1 i + beta2 i^p / n^(p-1)).
So Z_n = 2^(n^2) E[exp(beta1 W + beta2 W^p / n^(p-1))]^n and every moment
of (e(X), s(X)) reduces to a sum over n + 1 terms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, ResourceError
from .model import ModelParams

LOG2 = math.log(2.0)
MAX_ENTRIES = 10**8
BRUTE_FORCE_MAX_N = 4


def _centered_log_binom(n: int) -> np.ndarray:
    """log C(n, i) - log C(n, n//2) for i = 0..n.

    Built outward from the centre by log1p ratio increments, so the values
    near the bulk of the mass carry only a few ulps of rounding and are
    mirror-symmetric bit for bit when n is even.
    """
    m = n // 2
    i = np.arange(n + 1, dtype=np.float64)
    out = np.zeros(n + 1)
    up = i[m:n]
    # log C(i+1) - log C(i) = log((n - i) / (i + 1))
    out[m + 1:] = np.cumsum(np.log1p((n - 2 * up - 1) / (up + 1)))
    down = i[1:m + 1][::-1]
    # log C(i-1) - log C(i) = log(i / (n - i + 1))
    out[:m][::-1] = np.cumsum(np.log1p((2 * down - n - 1) / (n - down + 1)))
    return out


def _centered_tilt(n: int, params: ModelParams) -> np.ndarray:
    """beta1 i + beta2 n (i/n)^p minus its value at i = n/2, factorized."""
    p = params.p
    i = np.arange(n + 1, dtype=np.float64)
    x = i / n
    d = (2 * i - n) / (2 * n)
    # x^p - (1/2)^p = (x - 1/2) * sum_k x^k (1/2)^(p-1-k)
    s = np.zeros_like(x)
    xk = np.ones_like(x)
    for k in range(p):
        s += xk * 0.5 ** (p - 1 - k)
        xk = xk * x
    return n * d * (params.beta1 + params.beta2 * s)


@dataclass(frozen=True)
class TiltedBinomial:
    """Exact out-degree law, stored in log space.

    ``rel_log_weights`` are the log weights minus the constant ``offset``;
    ``log_weights`` restores the absolute values
    log C(n, i) + beta1 i + beta2 i^p / n^(p-1).
    """

    params: ModelParams
    n: int
    rel_log_weights: np.ndarray
    offset: float

    @property
    def log_weights(self) -> np.ndarray:
        return self.offset + self.rel_log_weights

    @cached_property
    def _shift(self) -> tuple[float, float]:
        mx = float(np.max(self.rel_log_weights))
        total = float(np.sum(np.exp(self.rel_log_weights - mx)))
        return mx, total

    @property
    def log_norm(self) -> float:
        mx, total = self._shift
        return self.offset + mx + math.log(total)

    @cached_property
    def probs(self) -> np.ndarray:
        mx, total = self._shift
        pr = np.exp(self.rel_log_weights - mx) / total
        pr.flags.writeable = False
        return pr

    @cached_property
    def cdf(self) -> np.ndarray:
        c = np.cumsum(self.probs)
        c.flags.writeable = False
        return c

    def log_moment(self, k: float) -> float:
        """log E[W^k exp(tilt)] under Binomial(n, 1/2)."""
        i = np.arange(self.n + 1, dtype=np.float64)
        mx, total = self._shift
        w = np.exp(self.rel_log_weights - mx)
        if k == 0:
            s = total
        else:
            s = float(np.sum(w[1:] * np.exp(k * np.log(i[1:]))))
        return self.offset + mx + math.log(s) - self.n * LOG2


def tilted_binomial(params: ModelParams, n: int, max_entries: int = MAX_ENTRIES) -> TiltedBinomial:
    n = int(n)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if n + 1 > max_entries:
        raise ResourceError(f"n = {n} exceeds the cap of {max_entries} entries")
    m = n // 2
    anchor = math.lgamma(n + 1) - math.lgamma(m + 1) - math.lgamma(n - m + 1)
    offset = anchor + n * (params.beta1 * 0.5 + params.beta2 * 0.5**params.p)
    rel = _centered_log_binom(n) + _centered_tilt(n, params)
    rel.flags.writeable = False
    return TiltedBinomial(params, n, rel, offset)


def psi_n(params: ModelParams, n: int) -> float:
    """Free energy density n^-2 log Z_n."""
    tb = tilted_binomial(params, n)
    return LOG2 + (tb.log_norm - n * LOG2) / n


@dataclass(frozen=True)
class ExactDerivatives:
    psi: float
    d_beta1: float
    d_beta2: float
    d2_beta1: float
    d2_beta2: float
    d2_mixed: float
    edge_prob: float


def exact_derivatives(params: ModelParams, n: int, tb: TiltedBinomial | None = None) -> ExactDerivatives:
    """psi_n and its first and second derivatives in (beta1, beta2).

    With y = W/n: d/dbeta1 = E[y], d/dbeta2 = E[y^p], and the Hessian is
    n times the covariance matrix of (y, y^p).
    """
    if tb is None:
        tb = tilted_binomial(params, n)
    pr = tb.probs
    y = np.arange(n + 1, dtype=np.float64) / n
    yp = y**params.p
    mean_y = float(np.sum(pr * y))
    mean_yp = float(np.sum(pr * yp))
    cy = y - mean_y
    cyp = yp - mean_yp
    var_y = float(np.sum(pr * cy * cy))
    var_yp = float(np.sum(pr * cyp * cyp))
    cov = float(np.sum(pr * cy * cyp))
    return ExactDerivatives(
        psi=LOG2 + (tb.log_norm - n * LOG2) / n,
        d_beta1=mean_y,
        d_beta2=mean_yp,
        d2_beta1=n * var_y,
        d2_beta2=n * var_yp,
        d2_mixed=n * cov,
        edge_prob=mean_y,
    )


def edge_probability_exact(params: ModelParams, n: int) -> float:
    """P_n(X_12 = 1), which equals E[W]/n by exchangeability within a row."""
    if n < 2:
        raise DomainError("edge probability needs n >= 2")
    tb = tilted_binomial(params, n)
    return float(np.sum(tb.probs * np.arange(n + 1, dtype=np.float64))) / n


def _graph_stats(n: int, p: int):
    """(e, s) for every n x n 0/1 matrix, self-loops included."""
    rows = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64)
    deg = rows.sum(axis=1)
    # index every graph as a tuple of n row indices
    idx = np.indices((len(rows),) * n).reshape(n, -1)
    degs = deg[idx]
    e = degs.sum(axis=0) / n**2
    s = (degs.astype(np.float64) ** p).sum(axis=0) / n ** (p + 1)
    return rows, idx, e, s


def brute_force_psi(params: ModelParams, n: int) -> float:
    """psi_n by enumerating all 2^(n^2) adjacency matrices (n <= 4)."""
    if not 1 <= n <= BRUTE_FORCE_MAX_N:
        raise DomainError(f"brute force enumeration is limited to 1 <= n <= {BRUTE_FORCE_MAX_N}")
    _, _, e, s = _graph_stats(n, params.p)
    h = n**2 * (params.beta1 * e + params.beta2 * s)
    mx = h.max()
    return float((mx + math.log(np.sum(np.exp(h - mx)))) / n**2)


def brute_force_edge_probability(params: ModelParams, n: int) -> float:
    """P_n(X_12 = 1) by enumeration (n <= 4)."""
    if not 2 <= n <= BRUTE_FORCE_MAX_N:
        raise DomainError(f"brute force enumeration is limited to 2 <= n <= {BRUTE_FORCE_MAX_N}")
    rows, idx, e, s = _graph_stats(n, params.p)
    h = n**2 * (params.beta1 * e + params.beta2 * s)
    w = np.exp(h - h.max())
    x12 = rows[idx[0], 1]
    return float(np.sum(w * x12) / np.sum(w))


@dataclass(frozen=True)
class SumIntegralComparison:
    exact: float
    integral_approx: float
    ratio: float


def sum_vs_integral(params: ModelParams, n: int, k: int) -> SumIntegralComparison:
    """Compare E[W^k exp(tilt)] with its integral approximation.

    ``exact`` and ``integral_approx`` are natural logs; ``ratio`` is the
    plain quotient, which tends to 1 as n grows.
    """
    from .asymptotics import quadrature_integral

    p = params.p
    if n < 10:
        raise DomainError("sum_vs_integral needs n >= 10")
    if k not in {0, 1, 2, p, p + 1, 2 * p}:
        raise DomainError(f"k must be one of 0, 1, 2, p, p+1, 2p; got {k}")
    tb = tilted_binomial(params, n)
    exact = tb.log_moment(k)
    approx = (k * math.log(n) - n * LOG2 + 0.5 * math.log(n / (2 * math.pi))
              + quadrature_integral(params, n, k))
    return SumIntegralComparison(exact, approx, math.exp(exact - approx))
