"""Bit-stream framing: precoder, pluggable RLL codec, and per-window EDC parity.

Write path (per sector): payload bits -> EDC parity inserted per window
(payload_bits data + parity_bits check = period_p channel bits) -> precoder
-> RLL codec (identity by default).  The read path inverts each stage; EDC
verification runs on the inverse-precoded window.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class PrecoderSpec:
    """Recursive GF(2) map c[n] = u[n] xor sum(c[n-d] for d in feedback_lags).

    Default feedback_lags=(2,) is 1/(1 xor D^2).  The inverse is the matching
    feed-forward filter u[n] = c[n] xor sum(c[n-d]).
    """

    feedback_lags: tuple = (2,)
    initial_memory: tuple = (0, 0)

    @property
    def memory_len(self) -> int:
        return max(self.feedback_lags) if self.feedback_lags else 0


def precode(bits, spec: PrecoderSpec = PrecoderSpec(), memory=None) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    m = spec.memory_len
    mem = np.asarray(spec.initial_memory if memory is None else memory, dtype=np.uint8)
    if mem.size != m:
        raise ValueError(f"precoder memory must hold {m} bits")
    if len(spec.feedback_lags) == 1:
        # Single feedback lag d decouples into d independent accumulator
        # chains: c[n] = u[n] xor c[n-d] is a running parity per phase.
        d = spec.feedback_lags[0]
        out = np.empty(bits.size, dtype=np.uint8)
        for r in range(d):
            phase = bits[r::d].astype(np.int64)
            out[r::d] = ((np.cumsum(phase) + int(mem[m - d + r])) % 2).astype(np.uint8)
        return out
    buf = np.concatenate([mem, np.zeros(bits.size, dtype=np.uint8)])
    for n in range(bits.size):
        v = bits[n]
        for d in spec.feedback_lags:
            v ^= buf[m + n - d]
        buf[m + n] = v
    return buf[m:]


def inverse_precode(bits, spec: PrecoderSpec = PrecoderSpec(), memory=None) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    m = spec.memory_len
    mem = np.asarray(spec.initial_memory if memory is None else memory, dtype=np.uint8)
    if mem.size != m:
        raise ValueError(f"precoder memory must hold {m} bits")
    buf = np.concatenate([mem, bits])
    out = bits.copy()
    for d in spec.feedback_lags:
        out ^= buf[m - d : m - d + bits.size]
    return out


class IdentityRll:
    """Rate-1 stand-in for a real RLL codec.

    Declares a 66-bit codeword so a 198-bit window spans exactly three
    codewords; real constrained codecs can be dropped in behind the same
    encode/decode surface.
    """

    codeword_len = 66

    def encode(self, bits) -> np.ndarray:
        return np.asarray(bits, dtype=np.uint8)

    def decode(self, bits) -> np.ndarray:
        return np.asarray(bits, dtype=np.uint8)


@dataclass(frozen=True)
class WindowFormat:
    """Non-overlapping decision window: payload bits plus trailing EDC parity."""

    period_p: int = 198
    parity_bits: int = 3
    rll_codeword_len: int = 66

    def __post_init__(self):
        if self.parity_bits < 0 or self.parity_bits >= self.period_p:
            raise ValueError("parity_bits must be in [0, period_p)")
        if self.period_p % self.rll_codeword_len:
            raise ValueError("period_p must be a multiple of the RLL codeword length")

    @property
    def payload_bits(self) -> int:
        return self.period_p - self.parity_bits


@dataclass(frozen=True)
class EdcScheme:
    """Per-window error detection: genie comparison (PED), CRC, or disabled."""

    kind: str = "ped"  # "ped" | "crc" | "none"
    crc_poly: int = 0b011  # x^3 + x + 1, top bit implicit
    crc_width: int = 3

    def __post_init__(self):
        if self.kind not in ("ped", "crc", "none"):
            raise ValueError(f"unknown EDC kind {self.kind!r}")


def crc_remainder(bits, poly: int, width: int) -> np.ndarray:
    """MSB-first CRC remainder with all-zero register init, raw remainder out."""
    reg = 0
    top = 1 << (width - 1)
    mask = (1 << width) - 1
    for b in np.asarray(bits, dtype=np.uint8):
        fb = ((reg >> (width - 1)) & 1) ^ int(b)
        reg = ((reg << 1) & mask)
        if fb:
            reg ^= poly & mask
    return np.array([(reg >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


@lru_cache(maxsize=16)
def crc_parity_matrix(poly: int, width: int, payload_bits: int) -> np.ndarray:
    """(payload_bits, width) generator matrix: parity = payload @ G mod 2.

    Valid because the CRC register starts at zero, making the map linear;
    column rows are the remainders of single-1 payloads.
    """
    g = np.zeros((payload_bits, width), dtype=np.uint8)
    for i in range(payload_bits):
        e = np.zeros(payload_bits, dtype=np.uint8)
        e[i] = 1
        g[i] = crc_remainder(e, poly, width)
    return g


def _window_parities(payloads, fmt: WindowFormat, scheme: EdcScheme) -> np.ndarray:
    """(n_windows, parity_bits) parity block for (n_windows, payload_bits) payloads."""
    n_win = payloads.shape[0]
    if scheme.kind == "crc":
        if scheme.crc_width != fmt.parity_bits:
            raise ValueError("CRC width must equal the window parity budget")
        g = crc_parity_matrix(scheme.crc_poly, scheme.crc_width, fmt.payload_bits)
        return (payloads.astype(np.int64) @ g.astype(np.int64) % 2).astype(np.uint8)
    # PED / disabled: parity positions are rate spacers, content unused.
    return np.zeros((n_win, fmt.parity_bits), dtype=np.uint8)


def insert_edc_parity(stream, fmt: WindowFormat, scheme: EdcScheme) -> np.ndarray:
    """Append parity_bits of EDC to every payload_bits chunk of the stream."""
    stream = np.asarray(stream, dtype=np.uint8)
    if fmt.parity_bits == 0:
        return stream.copy()
    if stream.size % fmt.payload_bits:
        raise ValueError("stream length must be a multiple of payload_bits")
    payloads = stream.reshape(-1, fmt.payload_bits)
    parities = _window_parities(payloads, fmt, scheme)
    return np.concatenate([payloads, parities], axis=1).reshape(-1)


def strip_edc_parity(stream, fmt: WindowFormat) -> np.ndarray:
    stream = np.asarray(stream, dtype=np.uint8)
    if fmt.parity_bits == 0:
        return stream.copy()
    if stream.size % fmt.period_p:
        raise ValueError("stream length must be a multiple of period_p")
    wins = stream.reshape(-1, fmt.period_p)
    return wins[:, : fmt.payload_bits].reshape(-1)


def verify_edc(window_bits, fmt: WindowFormat, scheme: EdcScheme,
               genie_reference=None) -> bool:
    """Check one period_p-bit window against its EDC.

    PED compares the full window to the transmitted reference; CRC recomputes
    the parity over the payload portion and compares it to the embedded bits.
    """
    window_bits = np.asarray(window_bits, dtype=np.uint8)
    if window_bits.size != fmt.period_p:
        raise ValueError(f"window must be {fmt.period_p} bits")
    if scheme.kind == "ped":
        if genie_reference is None:
            raise ValueError("PED verification needs the transmitted window")
        return bool(np.array_equal(window_bits, np.asarray(genie_reference, dtype=np.uint8)))
    if scheme.kind == "crc":
        payload = window_bits[: fmt.payload_bits]
        parity = window_bits[fmt.payload_bits :]
        g = crc_parity_matrix(scheme.crc_poly, scheme.crc_width, fmt.payload_bits)
        expect = (payload.astype(np.int64) @ g.astype(np.int64)) % 2
        return bool(np.array_equal(parity.astype(np.int64), expect))
    return True


def bytes_to_bits(symbols) -> np.ndarray:
    """MSB-first byte-to-bit expansion."""
    symbols = np.asarray(symbols, dtype=np.uint8)
    return np.unpackbits(symbols.reshape(-1, 1), axis=1).reshape(-1)


def bits_to_bytes(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % 8:
        raise ValueError("bit count must be a multiple of 8")
    return np.packbits(bits.reshape(-1, 8), axis=1).reshape(-1)
