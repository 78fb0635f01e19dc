"""Exact sampling of graphs and Monte Carlo estimates of the fluctuations.

Out-degrees of distinct nodes are independent draws from the tilted
binomial, and given its degree a row is a uniformly random subset of the n
columns (diagonal included).  Sampling is therefore exact: no Markov chain
is involved.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .asymptotics import RegimeLimits, limiting_values
from .exact import ExactDerivatives, TiltedBinomial, exact_derivatives, tilted_binomial
from .model import ModelParams
from .rng import DEGREE_STREAM, GRAPH_STREAM, replica_keys, stream_key, uniforms

DEFAULT_SEED = 0x5EED
CHUNK_ENTRIES = 2_000_000


@dataclass(frozen=True)
class GraphSample:
    n: int
    p: int
    degrees: np.ndarray
    e_density: float
    s_density: float
    adjacency: np.ndarray | None = None


def _densities(degrees: np.ndarray, n: int, p: int) -> tuple[float, float]:
    d = np.asarray(degrees, dtype=np.float64)
    return float(d.sum() / n**2), float(np.sum((d / n) ** p) / n)


def _search_table(tb: TiltedBinomial) -> np.ndarray:
    cdf = np.array(tb.cdf)
    cdf[-1] = np.inf
    return cdf


def _draw(table: np.ndarray, keys: np.ndarray, n: int) -> np.ndarray:
    u = uniforms(keys[:, None], np.arange(n)[None, :])
    return np.searchsorted(table, u, side="right").astype(np.int64)


def sample_degrees(tb: TiltedBinomial, replicas: int, seed: int = DEFAULT_SEED,
                   first_replica: int = 0) -> np.ndarray:
    """Out-degree vectors, one row per replica, by inverse-CDF search.

    The draw for node i of replica r depends only on (seed, n, r, i).
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    n = tb.n
    keys = replica_keys(seed, DEGREE_STREAM, n, np.arange(first_replica, first_replica + replicas))
    return _draw(_search_table(tb), keys, n)


def realize_graph(degrees, seed: int = DEFAULT_SEED, p: int = 2, graph_index: int = 0) -> GraphSample:
    """Adjacency matrix with the given out-degrees, each row uniform given its degree.

    Rows are built by a partial Fisher-Yates shuffle run over all rows at once.
    """
    deg = np.asarray(degrees, dtype=np.int64)
    n = deg.size
    if np.any(deg < 0) or np.any(deg > n):
        raise ValueError("degrees must lie in [0, n]")
    base = stream_key(seed, GRAPH_STREAM, n, graph_index)
    keys = replica_keys(int(base), GRAPH_STREAM, n, np.arange(n))
    u = uniforms(keys[:, None], np.arange(n)[None, :])
    perm = np.tile(np.arange(n), (n, 1))
    rows = np.arange(n)
    for k in range(int(deg.max(initial=0))):
        active = rows[deg > k]
        j = k + np.floor(u[active, k] * (n - k)).astype(np.int64)
        tmp = perm[active, k].copy()
        perm[active, k] = perm[active, j]
        perm[active, j] = tmp
    adj = np.zeros((n, n), dtype=bool)
    mask = np.arange(n)[None, :] < deg[:, None]
    adj[np.nonzero(mask)[0], perm[mask]] = True
    e, s = _densities(deg, n, p)
    return GraphSample(n, p, deg, e, s, adj)


def sample_graph(params: ModelParams, n: int, seed: int = DEFAULT_SEED, replica: int = 0,
                 materialize: bool = False) -> GraphSample:
    tb = tilted_binomial(params, n)
    deg = sample_degrees(tb, 1, seed, first_replica=replica)[0]
    if materialize:
        return realize_graph(deg, seed, params.p, graph_index=replica)
    e, s = _densities(deg, n, params.p)
    return GraphSample(n, params.p, deg, e, s)


@dataclass(frozen=True)
class McEstimates:
    """Monte Carlo moments; variances and covariance are multiplied by n^2."""

    n: int
    replicas: int
    mean_e: float
    mean_s: float
    var_e_scaled: float
    var_s_scaled: float
    cov_scaled: float
    edge_freq: float
    se_mean_e: float
    se_mean_s: float
    se_var_e: float
    se_var_s: float
    se_cov: float
    se_edge_freq: float


def _replica_stats(tb: TiltedBinomial, p: int, seed: int, start: int, count: int) -> np.ndarray:
    n = tb.n
    w = sample_degrees(tb, count, seed, first_replica=start)
    y = w / n
    return np.column_stack([y.sum(axis=1) / n, (y**p).sum(axis=1) / n, y[:, 0]])


def replica_statistics(params: ModelParams, n: int, replicas: int, seed: int = DEFAULT_SEED,
                       workers: int = 1) -> np.ndarray:
    """(e, s, W_1/n) for every replica, in replica order.

    Chunk boundaries do not depend on ``workers``, and each replica's
    draws depend only on its index, so the output is identical for any
    number of workers.
    """
    tb = tilted_binomial(params, n)
    chunk = max(1, CHUNK_ENTRIES // n)
    starts = list(range(0, replicas, chunk))

    def job(s):
        return _replica_stats(tb, params.p, seed, s, min(chunk, replicas - s))

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, starts))
    else:
        parts = [job(s) for s in starts]
    return np.concatenate(parts, axis=0)


def _var_and_se(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    r = a.size
    da, db = a - a.mean(), b - b.mean()
    prod = da * db
    return float(prod.sum() / (r - 1)), float(prod.std(ddof=1) / math.sqrt(r))


def mc_estimates(params: ModelParams, n: int, replicas: int, seed: int = DEFAULT_SEED,
                 workers: int = 1) -> McEstimates:
    """Sample means, n^2-scaled variances/covariance and the edge marginal.

    The edge marginal uses E[X_12 | W_1] = W_1/n rather than a sampled bit.
    """
    if replicas < 2:
        raise ValueError("replicas must be >= 2")
    st = replica_statistics(params, n, replicas, seed, workers)
    e, s, w1 = st[:, 0], st[:, 1], st[:, 2]
    root = math.sqrt(replicas)
    ve, se_ve = _var_and_se(e, e)
    vs, se_vs = _var_and_se(s, s)
    cv, se_cv = _var_and_se(e, s)
    n2 = float(n) ** 2
    return McEstimates(
        n=n, replicas=replicas,
        mean_e=float(e.mean()), mean_s=float(s.mean()),
        var_e_scaled=n2 * ve, var_s_scaled=n2 * vs, cov_scaled=n2 * cv,
        edge_freq=float(w1.mean()),
        se_mean_e=float(e.std(ddof=1) / root), se_mean_s=float(s.std(ddof=1) / root),
        se_var_e=n2 * se_ve, se_var_s=n2 * se_vs, se_cov=n2 * se_cv,
        se_edge_freq=float(w1.std(ddof=1) / root),
    )


@dataclass(frozen=True)
class ScalingRecord:
    n: int
    exact: ExactDerivatives
    mc: McEstimates | None
    limits: RegimeLimits

    @property
    def scale_exponent(self) -> float:
        return self.limits.scale_exponent

    def predicted(self, quantity: str = "edge") -> float:
        const = {"edge": self.limits.var_edge, "star": self.limits.var_star,
                 "cov": self.limits.cov}[quantity]
        return const * self.n**self.limits.scale_exponent

    def exact_value(self, quantity: str = "edge") -> float:
        return {"edge": self.exact.d2_beta1, "star": self.exact.d2_beta2,
                "cov": self.exact.d2_mixed}[quantity]

    def mc_value(self, quantity: str = "edge") -> tuple[float, float]:
        m = self.mc
        return {"edge": (m.var_e_scaled, m.se_var_e), "star": (m.var_s_scaled, m.se_var_s),
                "cov": (m.cov_scaled, m.se_cov)}[quantity]


DEFAULT_N_GRID = (100, 200, 400, 800, 1600, 3200)


def scaling_study(params: ModelParams, n_grid=DEFAULT_N_GRID, replicas: int = 10_000,
                  seed: int = DEFAULT_SEED, workers: int = 1) -> list[ScalingRecord]:
    """Exact, Monte Carlo and predicted fluctuations along an n grid.

    ``replicas=0`` skips the Monte Carlo part.
    """
    grid = [int(n) for n in n_grid]
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("n_grid must be non-empty and strictly ascending")
    limits = limiting_values(params)
    out = []
    for n in grid:
        ex = exact_derivatives(params, n)
        mc = mc_estimates(params, n, replicas, seed, workers) if replicas else None
        out.append(ScalingRecord(n, ex, mc, limits))
    return out


def loglog_slope(ns, values) -> float:
    """Least-squares slope of log(values) against log(ns)."""
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(values, float)), 1)[0])
