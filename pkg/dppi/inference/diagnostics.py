"""Convergence diagnostics for retained draws."""

from __future__ import annotations

import math
from typing import Dict, NamedTuple

import numpy as np
from scipy.stats import ks_2samp

from ..contracts.errors import ChainError

MIN_CHAIN_LENGTH = 100


def batch_means_mcse(draws) -> float:
    """Monte Carlo standard error of the chain mean by non-overlapping batch means.

    Uses floor(sqrt(n)) batches of equal size; trailing draws that do not
    fill a batch are dropped.

    Raises:
        ChainError: If fewer than 100 draws are given
    """
    x = np.asarray(draws, dtype=float).ravel()
    n = x.size
    if n < MIN_CHAIN_LENGTH:
        raise ChainError("CHAIN_TOO_SHORT", f"batch means need at least {MIN_CHAIN_LENGTH} draws, got {n}")
    batches = int(math.isqrt(n))
    size = n // batches
    means = x[: batches * size].reshape(batches, size).mean(axis=1)
    var = size * np.sum((means - means.mean()) ** 2) / (batches - 1)
    return float(math.sqrt(var / n))


class HalfChainKS(NamedTuple):
    statistic: float
    pvalue: float


def half_chain_ks(samples) -> Dict[str, HalfChainKS]:
    """Two-sample Kolmogorov-Smirnov statistic between the two halves of every column."""
    half = samples.n // 2
    if half < 1:
        raise ChainError("CHAIN_TOO_SHORT", "half-chain comparison needs at least two draws")
    out = {}
    for idx, name in enumerate(samples.names):
        col = samples.draws[:, idx]
        res = ks_2samp(col[:half], col[half : 2 * half])
        out[name] = HalfChainKS(float(res.statistic), float(res.pvalue))
    return out
