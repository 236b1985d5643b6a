"""Block multinomial CFR estimation tests."""

import numpy as np
import pytest

from tapesim.postecc import (
    BmmParams,
    WeightDistribution,
    bmm_cfr,
    estimate_weights,
    exhaustive_cfr,
    mc_cfr_oracle,
    merge_weight_counts,
    weights_csv,
)


def _random_weights(rng, m, heavy=0.05):
    """Random distribution concentrated at w=0 like a real error channel."""
    y = rng.random(m + 1) * heavy
    y[0] = 0.0
    y[0] = max(0.0, 1.0 - y.sum())
    y /= y.sum()
    return WeightDistribution(m, y)


def test_weight_distribution_validation():
    with pytest.raises(ValueError):
        WeightDistribution(2, np.array([0.5, 0.5]))  # wrong length
    with pytest.raises(ValueError):
        WeightDistribution(2, np.array([0.9, 0.3, -0.2]))  # negative / not normalized


def test_estimate_weights_counting():
    flags = np.array([0, 0, 1, 0, 1, 1, 0, 0, 0], dtype=bool)  # blocks of 3
    y = estimate_weights(flags, 3)
    assert y.blocks_observed == 3
    assert np.allclose(y.y, [1 / 3, 1 / 3, 1 / 3, 0.0])
    with pytest.raises(ValueError):
        estimate_weights(flags[:8], 3)


def test_merge_weight_counts():
    a = np.array([5, 1, 0])
    b = np.array([3, 0, 2])
    assert np.array_equal(merge_weight_counts(a, b), [8, 1, 2])


def test_bmm_matches_exhaustive_small():
    rng = np.random.default_rng(41)
    params = BmmParams(block_symbols=2, n=8, t=1, j_max=4, m_b=64)
    for _ in range(50):
        y = _random_weights(rng, 2, heavy=0.08)
        got = bmm_cfr(y, params).cfr
        want = exhaustive_cfr(y, params)
        assert abs(got - want) < 1e-12


def test_bmm_matches_mc_oracle():
    rng = np.random.default_rng(42)
    params = BmmParams(block_symbols=2, n=8, t=1, j_max=4, m_b=64)
    y = _random_weights(rng, 2, heavy=0.06)
    est = bmm_cfr(y, params).cfr
    p, sigma = mc_cfr_oracle(y, params, trials=200_000, rng=rng)
    assert abs(est - p) < 3 * sigma + 1e-12


def test_bmm_monotone_in_error_mass():
    params = BmmParams()
    m = params.block_symbols
    lo = np.zeros(m + 1)
    lo[0], lo[1] = 0.999, 0.001
    hi = np.zeros(m + 1)
    hi[0], hi[1] = 0.99, 0.01
    cfr_lo = bmm_cfr(WeightDistribution(m, lo), params).cfr
    cfr_hi = bmm_cfr(WeightDistribution(m, hi), params).cfr
    assert 0 < cfr_lo < cfr_hi < 1
    # HBER convention: CFR normalized by the payload bit count.
    est = bmm_cfr(WeightDistribution(m, hi), params)
    assert np.isclose(est.hber, est.cfr / params.m_b)


def test_error_free_stream_gives_zero_cfr():
    m = 17
    y = np.zeros(m + 1)
    y[0] = 1.0
    est = bmm_cfr(WeightDistribution(m, y), BmmParams())
    assert est.cfr == 0.0


def test_weights_csv(tmp_path):
    y = estimate_weights(np.zeros(34, dtype=bool), 17)
    path = tmp_path / "weights.csv"
    weights_csv(y, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "w,y_w,count"
    assert len(lines) == 19  # header + w = 0..17
