"""GF(256) arithmetic, systematic RS(255,245) encoding, genie decode judgment,
and byte interleaving.

The field is built over the primitive polynomial x^8+x^4+x^3+x^2+1 (0x11D).
Decoding is genie-aided bounded-distance judgment: a codeword with more than
``t`` symbol errors is declared a failure, anything else corrected.  This is
all the failure-rate statistics need; no algebraic decoder is included.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PRIMITIVE_POLY = 0x11D
FIELD_SIZE = 256


def _build_tables(poly: int = PRIMITIVE_POLY):
    exp = np.zeros(2 * FIELD_SIZE, dtype=np.int64)
    log = np.zeros(FIELD_SIZE, dtype=np.int64)
    x = 1
    for i in range(FIELD_SIZE - 1):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= poly
    for i in range(FIELD_SIZE - 1, 2 * FIELD_SIZE):
        exp[i] = exp[i - (FIELD_SIZE - 1)]
    return exp, log


GF_EXP, GF_LOG = _build_tables()


def gf_add(a: int, b: int) -> int:
    return a ^ b


def gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return int(GF_EXP[GF_LOG[a] + GF_LOG[b]])


def gf_mul_slow(a: int, b: int, poly: int = PRIMITIVE_POLY) -> int:
    """Shift-and-reduce product; independent oracle for the table-based path."""
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        a <<= 1
        if a & 0x100:
            a ^= poly
        b >>= 1
    return acc


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no multiplicative inverse in GF(256)")
    return int(GF_EXP[FIELD_SIZE - 1 - GF_LOG[a]])


def gf_pow(a: int, n: int) -> int:
    if a == 0:
        return 0 if n else 1
    return int(GF_EXP[(GF_LOG[a] * n) % (FIELD_SIZE - 1)])


def _poly_mul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] ^= gf_mul(a, b)
    return out


@dataclass(frozen=True)
class RsCode:
    """Systematic RS code over GF(256) with generator roots alpha^1..alpha^2t."""

    n: int = 255
    k: int = 245
    generator: tuple = field(default=None, repr=False)

    def __post_init__(self):
        if (self.n - self.k) % 2:
            raise ValueError("n - k must be even (2t parity symbols)")
        if self.generator is None:
            g = [1]
            for i in range(1, self.n - self.k + 1):
                g = _poly_mul(g, [1, gf_pow(2, i)])
            object.__setattr__(self, "generator", tuple(g))

    @property
    def t(self) -> int:
        return (self.n - self.k) // 2


def rs_encode(data, code: RsCode = RsCode()) -> np.ndarray:
    """Systematic encode: data symbols followed by 2t parity symbols."""
    data = np.asarray(data, dtype=np.int64)
    if data.shape != (code.k,):
        raise ValueError(f"expected {code.k} data symbols, got {data.shape}")
    # Polynomial long division of data * x^(2t) by the generator (LFSR form).
    gen = code.generator
    parity = [0] * (code.n - code.k)
    for sym in data:
        fb = int(sym) ^ parity[0]
        parity = parity[1:] + [0]
        if fb:
            for i in range(1, len(gen)):
                parity[i - 1] ^= gf_mul(fb, gen[i])
    return np.concatenate([data, np.asarray(parity, dtype=np.int64)])


def rs_decode_judge(received, reference, code: RsCode = RsCode()):
    """Genie bounded-distance judgment against the transmitted codeword.

    Returns (corrected: bool, symbol_error_count: int).
    """
    received = np.asarray(received)
    reference = np.asarray(reference)
    if received.shape != (code.n,) or reference.shape != (code.n,):
        raise ValueError("received and reference must both be n symbols")
    count = int(np.count_nonzero(received != reference))
    return count <= code.t, count


@dataclass(frozen=True)
class Interleaver:
    """Byte-wise round-robin interleaver across ``depth`` codewords."""

    depth: int = 4
    word_len: int = 255

    def interleave(self, words) -> np.ndarray:
        words = np.asarray(words, dtype=np.int64)
        if words.ndim != 2 or words.shape[1] != self.word_len:
            raise ValueError(f"expected (m, {self.word_len}) codeword array")
        if words.shape[0] % self.depth:
            raise ValueError("number of codewords must be a multiple of depth")
        out = []
        for g in range(0, words.shape[0], self.depth):
            out.append(words[g : g + self.depth].T.reshape(-1))
        return np.concatenate(out)

    def deinterleave(self, stream) -> np.ndarray:
        stream = np.asarray(stream, dtype=np.int64)
        block = self.depth * self.word_len
        if stream.size % block:
            raise ValueError("stream length must be a multiple of depth * word_len")
        words = []
        for g in range(0, stream.size, block):
            words.append(stream[g : g + block].reshape(self.word_len, self.depth).T)
        return np.concatenate(words, axis=0)
