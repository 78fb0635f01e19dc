"""Counter-based uniform variates.

A uniform is a pure function of (seed, stream key..., counter), built from
the SplitMix64 finalizer.  Nothing is stateful, so draws do not depend on
evaluation order or on how work is split across threads.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1

DEGREE_STREAM = 1
GRAPH_STREAM = 2


def mix64(z):
    """SplitMix64 output function on uint64 arrays (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_key(seed: int, *keys: int) -> np.uint64:
    """Fold a seed and integer keys into one 64-bit stream key."""
    h = mix64(np.uint64(seed & _MASK))
    for k in keys:
        with np.errstate(over="ignore"):
            h = mix64(h ^ (np.uint64(k & _MASK) + _GOLDEN))
    return np.uint64(h)


def uniforms(key, counters) -> np.ndarray:
    """Doubles in [0, 1) for each counter under the given stream key(s).

    ``key`` broadcasts against ``counters``, so a column of per-replica keys
    and a row of node indices yields a replicas x nodes matrix.
    """
    key = np.asarray(key, dtype=np.uint64)
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = key + (c + np.uint64(1)) * _GOLDEN
    return (mix64(z) >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def replica_keys(seed: int, domain: int, n: int, replicas) -> np.ndarray:
    """Per-replica stream keys for the (seed, domain, n) family."""
    base = stream_key(seed, domain, n)
    r = np.asarray(replicas, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(base ^ (r * _M1 + _GOLDEN))
