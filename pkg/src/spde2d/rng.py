"""Stateless seed derivation and counter-based Gaussian streams.

Every random quantity is addressed by a 64-bit stream key built by mixing
(base seed, replication, role tag, mode indices).  Draw ``i`` of a stream is
``mix64(key + (i + 1) * GOLDEN)`` turned into a uniform on (0, 1) and then
into a standard normal by the inverse CDF.  Streams are therefore independent
of evaluation order and of how work is split across threads.
"""
from __future__ import annotations

import numpy as np
from scipy.special import ndtri

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

# role tags keep the streams of different pipeline stages apart
TAG_MODE = 0x6D6F6465  # "mode"
TAG_TAIL = 0x7461696C  # "tail"
TAG_OU = 0x6F75  # "ou"

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_G = np.uint64(GOLDEN)


def mix64(x):
    """SplitMix64 finaliser; works on Python ints and uint64 arrays."""
    if isinstance(x, (int, np.integer)):
        z = int(x) & MASK
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)
    z = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def derive(*parts) -> int:
    """Fold integers into one 64-bit key (order sensitive)."""
    h = 0x243F6A8885A308D3
    for p in parts:
        h = mix64((h ^ mix64((int(p) + GOLDEN) & MASK)) + GOLDEN)
    return h


def derive_many(base: int, *arrays) -> np.ndarray:
    """Vectorised :func:`derive` where ``arrays`` broadcast to a common shape."""
    arrays = [np.asarray(a).astype(np.uint64) for a in arrays]
    shape = np.broadcast_shapes(*(a.shape for a in arrays)) if arrays else ()
    h = np.full(shape, derive(base), dtype=np.uint64)
    with np.errstate(over="ignore"):
        for a in arrays:
            h = mix64((h ^ mix64(a + _G)) + _G)
    return h


def replication_seed(base_seed: int, rep_index: int) -> int:
    return derive(base_seed, rep_index)


def uniforms(keys, n: int) -> np.ndarray:
    """``n`` uniforms on the open unit interval per stream key; shape keys.shape + (n,)."""
    keys = np.asarray(keys, dtype=np.uint64)
    ctr = (np.arange(1, n + 1, dtype=np.uint64)) * _G
    with np.errstate(over="ignore"):
        bits = mix64(keys[..., None] + ctr)
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * (1.0 / 9007199254740992.0)


def normals(keys, n: int) -> np.ndarray:
    return ndtri(uniforms(keys, n))
