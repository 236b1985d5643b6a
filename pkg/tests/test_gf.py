"""GF(256) arithmetic, RS(255,245) codec, and interleaver tests."""

import numpy as np
import pytest

from tapesim.gf import (
    FIELD_SIZE,
    Interleaver,
    RsCode,
    gf_add,
    gf_inv,
    gf_mul,
    gf_mul_slow,
    gf_pow,
    rs_decode_judge,
    rs_encode,
)


def test_tables_match_slow_multiply():
    rng = np.random.default_rng(1)
    for _ in range(2000):
        a, b = (int(x) for x in rng.integers(0, FIELD_SIZE, size=2))
        assert gf_mul(a, b) == gf_mul_slow(a, b)


def test_field_axioms_sampled():
    rng = np.random.default_rng(2)
    for _ in range(500):
        a, b, c = (int(x) for x in rng.integers(0, FIELD_SIZE, size=3))
        assert gf_mul(a, b) == gf_mul(b, a)
        assert gf_mul(a, gf_mul(b, c)) == gf_mul(gf_mul(a, b), c)
        assert gf_mul(a, gf_add(b, c)) == gf_add(gf_mul(a, b), gf_mul(a, c))
        assert gf_mul(a, 1) == a
        assert gf_mul(a, 0) == 0


def test_inverse():
    for a in range(1, FIELD_SIZE):
        assert gf_mul(a, gf_inv(a)) == 1
    with pytest.raises(ZeroDivisionError):
        gf_inv(0)


def test_pow_consistency():
    a = 2
    acc = 1
    for n in range(20):
        assert gf_pow(a, n) == acc
        acc = gf_mul(acc, a)


def _poly_eval(coeffs, x):
    """Horner evaluation of a polynomial with coeffs[0] the highest power."""
    acc = 0
    for c in coeffs:
        acc = gf_add(gf_mul(acc, x), int(c))
    return acc


def test_rs_encode_is_systematic_and_divisible():
    code = RsCode()
    rng = np.random.default_rng(3)
    data = rng.integers(0, 256, size=code.k)
    word = rs_encode(data, code)
    assert word.shape == (code.n,)
    assert np.array_equal(word[: code.k], data)
    # A valid codeword evaluates to zero at every generator root alpha^1..alpha^2t.
    for i in range(1, code.n - code.k + 1):
        assert _poly_eval(word, gf_pow(2, i)) == 0


def test_rs_decode_judge_genie():
    code = RsCode()
    rng = np.random.default_rng(4)
    data = rng.integers(0, 256, size=code.k)
    word = rs_encode(data, code)
    ok, nerr = rs_decode_judge(word, word, code)
    assert ok and nerr == 0
    # Up to t symbol errors: correctable.
    for e in range(1, code.t + 1):
        rx = word.copy()
        pos = rng.choice(code.n, size=e, replace=False)
        rx[pos] ^= rng.integers(1, 256, size=e)
        ok, nerr = rs_decode_judge(rx, word, code)
        assert ok and nerr == e
    # t+1 errors: failure.
    rx = word.copy()
    pos = rng.choice(code.n, size=code.t + 1, replace=False)
    rx[pos] ^= rng.integers(1, 256, size=code.t + 1)
    ok, nerr = rs_decode_judge(rx, word, code)
    assert not ok and nerr == code.t + 1


def test_interleaver_roundtrip_and_dispersion():
    rng = np.random.default_rng(5)
    iv = Interleaver(depth=4, word_len=255)
    words = rng.integers(0, 256, size=(8, 255))
    stream = iv.interleave(words)
    assert stream.size == words.size
    back = iv.deinterleave(stream)
    assert np.array_equal(back, words)
    # Adjacent stream symbols come from different codewords within a group.
    group = iv.interleave(words[:4])
    assert group[0] == words[0, 0]
    assert group[1] == words[1, 0]
    assert group[4] == words[0, 1]
