"""Lorentzian read-channel waveform synthesis.

Time is measured in bit periods (T = 1); the waveform is oversampled at
``oversampling`` samples per bit.  A written bit stream b in {0,1} maps to
symbols a = 2b - 1; transitions d_k = (a_k - a_{k-1})/2 in {-1,0,+1} each
contribute a Lorentzian step response.  Position jitter enters through the
first-order Taylor term -d_k * jitter_k * g'(t - k), and white electronics
noise is added at the LPF input.  SNR follows the 2/(N0+Nm) convention with
the isolated transition peak normalized to 1; beta = Nm/(N0+Nm) splits the
in-band noise budget between jitter and electronics noise.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import signal


@dataclass(frozen=True)
class ChannelConfig:
    density: float = 3.25          # Dc = PW50/T
    snr_db: float = 20.0           # 2/(N0+Nm) at the LPF input, in dB
    beta: float = 0.5              # transition-noise fraction Nm/(N0+Nm)
    oversampling: int = 8          # samples per bit period
    lpf_cutoff: float = 0.5        # 3 dB cutoff as a fraction of the bit rate
    pulse_span_bits: int = 32      # one-sided truncation of g(t), in bit periods
    rng_seed: int = 0

    def __post_init__(self):
        if self.density <= 0:
            raise ValueError("density must be positive")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.oversampling < 4:
            raise ValueError("oversampling must be at least 4")

    @property
    def noise_power(self) -> float:
        """Total in-band noise power target N0 + Nm = 2/SNR."""
        if np.isinf(self.snr_db):
            return 0.0
        return 2.0 / (10.0 ** (self.snr_db / 10.0))


@dataclass
class Waveform:
    samples: np.ndarray
    samples_per_bit: int
    t0: int  # sample index of the bit-0 transition instant


def lorentzian_step(t, density: float):
    """g(t) = 1/(1 + (2t/PW50)^2), PW50 = density (T=1), unit peak."""
    t = np.asarray(t, dtype=float)
    return 1.0 / (1.0 + (2.0 * t / density) ** 2)


def lorentzian_slope(t, density: float):
    """d/dt of the Lorentzian step response."""
    t = np.asarray(t, dtype=float)
    u = 2.0 * t / density
    return -(8.0 * t / density**2) / (1.0 + u * u) ** 2


@lru_cache(maxsize=32)
def _pulse_tables(density: float, oversampling: int, span_bits: int):
    n = span_bits * oversampling
    t = np.arange(-n, n + 1) / oversampling
    return lorentzian_step(t, density), lorentzian_slope(t, density)


def transitions(bits, prev_bit: int = 0) -> np.ndarray:
    """d_k = (a_k - a_{k-1})/2 for bits in {0,1} with symbol map a = 2b-1."""
    b = np.asarray(bits, dtype=np.int8)
    prev = np.concatenate([[prev_bit], b[:-1]]).astype(np.int8)
    return (b - prev).astype(np.float64)


def _superpose(weights, pulse, oversampling: int):
    """Sum of weights[k] * pulse(t - k) on the oversampled grid.

    Returns (samples, t0) where t0 indexes the k=0 instant.
    """
    nbits = weights.size
    span = (pulse.size - 1) // 2
    imp = np.zeros(nbits * oversampling, dtype=np.float64)
    imp[::oversampling] = weights
    full = signal.oaconvolve(imp, pulse)
    # full index = imp index + pulse index - span; t0 = span maps to k=0.
    return full, span


def synthesize_components(bits, cfg: ChannelConfig, rng: np.random.Generator,
                          prev_bit: int = 0):
    """Clean signal, jitter-noise and electronics-noise components, separately.

    All three share one sample grid; ``synthesize_readback`` is their sum.
    """
    d = transitions(bits, prev_bit)
    g, gp = _pulse_tables(cfg.density, cfg.oversampling, cfg.pulse_span_bits)
    clean, t0 = _superpose(d, g, cfg.oversampling)

    ptot = cfg.noise_power
    if ptot > 0 and cfg.beta > 0:
        sigma_j = jitter_sigma(cfg)
        jit = rng.normal(0.0, sigma_j, size=d.size) * d
        jitter_wave, _ = _superpose(jit, -gp, cfg.oversampling)
    else:
        jitter_wave = np.zeros_like(clean)

    if ptot > 0 and cfg.beta < 1:
        # White noise at the oversampled rate; in-band share is 1/oversampling.
        sigma_e = np.sqrt(cfg.oversampling * (1.0 - cfg.beta) * ptot)
        elec = rng.normal(0.0, sigma_e, size=clean.size)
    else:
        elec = np.zeros_like(clean)

    return clean, jitter_wave, elec, t0


def synthesize_readback(bits, cfg: ChannelConfig, rng=None, prev_bit: int = 0) -> Waveform:
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    clean, jit, elec, t0 = synthesize_components(bits, cfg, rng, prev_bit)
    return Waveform(clean + jit + elec, cfg.oversampling, t0)


def inband_power(x, oversampling: int) -> float:
    """Mean power of x restricted to |f| <= half the bit rate (brickwall)."""
    x = np.asarray(x, dtype=np.float64)
    spec = np.fft.rfft(x)
    k_cut = int(np.floor(x.size / (2 * oversampling)))
    p = np.abs(spec[: k_cut + 1]) ** 2
    p[1:] *= 2.0  # one-sided spectrum
    if x.size % 2 == 0 and k_cut == x.size // 2:
        p[-1] /= 2.0
    return float(p.sum()) / x.size**2


@lru_cache(maxsize=32)
def _unit_jitter_inband_power(density: float, oversampling: int, span_bits: int,
                              calib_bits: int = 1 << 17, calib_seed: int = 0x5EED) -> float:
    """In-band power of the jitter-noise component per unit jitter variance.

    Measured once per pulse shape on a random equiprobable bit pattern; the
    component is linear in the jitter samples, so power scales as sigma_j^2.
    """
    rng = np.random.default_rng(calib_seed)
    bits = rng.integers(0, 2, size=calib_bits)
    d = transitions(bits)
    _, gp = _pulse_tables(density, oversampling, span_bits)
    jit = rng.normal(0.0, 1.0, size=d.size) * d
    wave, _ = _superpose(jit, -gp, oversampling)
    return inband_power(wave, oversampling)


def jitter_sigma(cfg: ChannelConfig) -> float:
    """Per-transition jitter std dev hitting the beta fraction of 2/SNR in-band."""
    ptot = cfg.noise_power
    if ptot == 0.0 or cfg.beta == 0.0:
        return 0.0
    p1 = _unit_jitter_inband_power(cfg.density, cfg.oversampling, cfg.pulse_span_bits)
    return float(np.sqrt(cfg.beta * ptot / p1))


@lru_cache(maxsize=32)
def _butterworth(cutoff: float, oversampling: int):
    # cutoff is a fraction of the bit rate; sample rate is oversampling per T.
    wn = 2.0 * cutoff / oversampling
    sos = signal.butter(5, wn, output="sos")
    b, a = signal.butter(5, wn)
    _, gd = signal.group_delay((b, a), w=[1e-4])
    return sos, int(round(float(gd[0])))


def apply_lpf(x, cfg: ChannelConfig) -> np.ndarray:
    sos, _ = _butterworth(cfg.lpf_cutoff, cfg.oversampling)
    return signal.sosfilt(sos, np.asarray(x, dtype=np.float64))


def lowpass_and_sample(w: Waveform, cfg: ChannelConfig, nbits: int) -> np.ndarray:
    """5th-order Butterworth LPF, group-delay compensation, decimation to 1/T."""
    if w.samples_per_bit != cfg.oversampling:
        raise ValueError("waveform oversampling does not match config")
    sos, gd = _butterworth(cfg.lpf_cutoff, cfg.oversampling)
    y = signal.sosfilt(sos, w.samples)
    idx = w.t0 + gd + np.arange(nbits) * cfg.oversampling
    if idx[-1] >= y.size:
        raise ValueError("waveform too short for requested bit count")
    return y[idx]


def read_bits(bits, cfg: ChannelConfig, rng=None, prev_bit: int = 0) -> np.ndarray:
    """Full front end: synthesize, low-pass filter, sample at the bit rate."""
    bits = np.asarray(bits)
    w = synthesize_readback(bits, cfg, rng, prev_bit)
    return lowpass_and_sample(w, cfg, bits.size)


def dump_waveform(w: Waveform, path) -> None:
    """Little-endian float64 dump for debugging."""
    np.asarray(w.samples, dtype="<f8").tofile(path)


def with_snr(cfg: ChannelConfig, snr_db: float) -> ChannelConfig:
    return replace(cfg, snr_db=snr_db)
