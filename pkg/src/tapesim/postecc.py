"""Post-ECC codeword failure rate from block error-weight statistics.

A codeword of n symbols is split into n/M blocks; ``estimate_weights``
measures the probability y_w of a block carrying exactly w symbol errors.
``bmm_cfr`` extrapolates the bounded-distance failure probability from those
weights: for j erroneous blocks (j up to the truncation parameter j_max) the
failure contribution is C(n/M, j) * y0^(n/M - j) times the mass of the j-fold
convolution of Y(D) beyond the correction power t.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np


@dataclass(frozen=True)
class WeightDistribution:
    """y[w] = P(an M-symbol block has exactly w symbol errors), w = 0..M."""

    block_symbols: int
    y: np.ndarray
    blocks_observed: int = 0

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.float64)
        if y.shape != (self.block_symbols + 1,):
            raise ValueError("y must have M+1 entries (w = 0..M)")
        if np.any(y < -1e-12) or np.any(y > 1 + 1e-12):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(y.sum() - 1.0) > 1e-9:
            raise ValueError("weight distribution must sum to 1")
        object.__setattr__(self, "y", y)

    @property
    def y0(self) -> float:
        return float(self.y[0])


@dataclass(frozen=True)
class BmmParams:
    block_symbols: int = 17   # M
    n: int = 255              # codeword length in symbols
    t: int = 5                # RS correction power in symbols
    j_max: int = 10           # truncation parameter, 2t by default
    m_b: int = 1960           # codeword payload in bits, for HBER = CFR/m_b

    def __post_init__(self):
        if self.n % self.block_symbols:
            raise ValueError("codeword length must be divisible by the block size")
        if self.j_max < 1:
            raise ValueError("j_max must be at least 1")


@dataclass(frozen=True)
class CfrEstimate:
    cfr: float
    hber: float
    params: BmmParams


def estimate_weights(symbol_error_flags, block_symbols: int) -> WeightDistribution:
    """Empirical block weight distribution from a per-symbol error-flag stream."""
    flags = np.asarray(symbol_error_flags, dtype=bool)
    if flags.size == 0 or flags.size % block_symbols:
        raise ValueError("flag stream length must be a positive multiple of M")
    weights = flags.reshape(-1, block_symbols).sum(axis=1)
    counts = np.bincount(weights, minlength=block_symbols + 1).astype(np.float64)
    blocks = weights.size
    return WeightDistribution(block_symbols, counts / blocks, blocks_observed=blocks)


def merge_weight_counts(counts_a, counts_b):
    return np.asarray(counts_a) + np.asarray(counts_b)


def bmm_cfr(y: WeightDistribution, params: BmmParams) -> CfrEstimate:
    """Block-multinomial CFR: truncated sum over the number of bad blocks."""
    if y.block_symbols != params.block_symbols:
        raise ValueError("weight distribution block size does not match params")
    nb = params.n // params.block_symbols
    # Y restricted to w >= 1 (an erroneous block has at least one bad symbol).
    ypos = y.y[1:].copy()
    y0 = y.y0
    r = np.concatenate([[0.0], ypos])  # R(D) = Y(D), degree-indexed
    cfr = 0.0
    for j in range(1, min(params.j_max, nb) + 1):
        tail = float(r[params.t + 1 :].sum())
        cfr += comb(nb, j) * y0 ** (nb - j) * tail
        if j < min(params.j_max, nb):
            r = np.convolve(r, np.concatenate([[0.0], ypos]))
            r = r[: params.n + 1]  # more than n symbol errors cannot occur
    cfr = float(min(max(cfr, 0.0), 1.0))
    return CfrEstimate(cfr=cfr, hber=cfr / params.m_b, params=params)


def mc_cfr_oracle(y: WeightDistribution, params: BmmParams, trials: int,
                  rng=None):
    """Monte Carlo check: draw n/M block weights i.i.d. from Y, fail on > t.

    Returns (empirical_cfr, sigma) with sigma the binomial standard error.
    """
    if trials < 10_000:
        raise ValueError("use at least 1e4 trials")
    if rng is None:
        rng = np.random.default_rng(0)
    nb = params.n // params.block_symbols
    draws = rng.choice(y.block_symbols + 1, size=(trials, nb), p=y.y)
    fails = int(np.count_nonzero(draws.sum(axis=1) >= params.t + 1))
    p = fails / trials
    sigma = np.sqrt(max(p * (1 - p), 1.0 / trials) / trials)
    return p, float(sigma)


def exhaustive_cfr(y: WeightDistribution, params: BmmParams) -> float:
    """Exact failure probability by enumerating all block-weight tuples.

    Feasible only for small n/M and M; used as the independent oracle for
    bmm_cfr (equivalent to j_max = n/M).
    """
    nb = params.n // params.block_symbols
    m = y.block_symbols
    total = 0.0

    def rec(i, prob, wsum):
        nonlocal total
        if prob == 0.0:
            return
        if i == nb:
            if wsum >= params.t + 1:
                total += prob
            return
        for w in range(m + 1):
            rec(i + 1, prob * y.y[w], wsum + w)

    rec(0, 1.0, 0)
    return total


def weights_csv(y: WeightDistribution, path) -> None:
    """Serialize a weight distribution as (w, y_w, count) rows."""
    counts = np.round(y.y * y.blocks_observed).astype(np.int64)
    with open(path, "w") as f:
        f.write("w,y_w,count\n")
        for w in range(y.block_symbols + 1):
            f.write(f"{w},{y.y[w]!r},{counts[w]}\n")
