"""MMSE FIR equalization to the PR4 target and linear-prediction noise whitening.

The equalizer is designed on a training sector with known bits: taps minimize
the mean squared error between the equalizer output and the ideal PR4 sequence
y[n] = a[n] - a[n-2] (a in {-1,+1}), scanning the decision delay.  The
whitener solves the order-L Yule-Walker equations on the residual noise; its
coefficients p are predictor coefficients, i.e. the whitened error is
e[n] - sum_i p[i] * e[n-i].
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_toeplitz


@dataclass(frozen=True)
class EqualizerTaps:
    taps: np.ndarray
    delay: int
    mse: float = float("nan")


@dataclass(frozen=True)
class WhitenerCoeffs:
    p: np.ndarray

    @property
    def order(self) -> int:
        return len(self.p)

    def is_stable(self) -> bool:
        """Roots of 1 - sum p_i z^-i strictly inside the unit circle."""
        if self.order == 0 or not np.any(self.p):
            return True
        poly = np.concatenate([[1.0], -np.asarray(self.p)])
        return bool(np.all(np.abs(np.roots(poly)) < 1.0 - 1e-12))


def pr4_ideal(bits, prev_bits=(0, 0)) -> np.ndarray:
    """Ideal PR4 output y[n] = a[n] - a[n-2] in {-2, 0, +2} for bits in {0,1}."""
    b = np.asarray(bits, dtype=np.int64)
    ext = np.concatenate([np.asarray(prev_bits, dtype=np.int64), b])
    return 2.0 * (ext[2:] - ext[:-2])


def design_mmse_pr4(samples, bits, taps_len: int = 21, prev_bits=(0, 0),
                    cond_limit: float = 1e10) -> EqualizerTaps:
    """Wiener design of a symbol-spaced FIR equalizer to the PR4 target.

    ``samples`` are the bit-rate channel samples aligned with ``bits``; the
    decision delay is chosen by scanning all offsets within the tap span.
    """
    samples = np.asarray(samples, dtype=np.float64)
    bits = np.asarray(bits)
    if samples.size != bits.size:
        raise ValueError("samples and bits must be the same length")
    if samples.size < 10 * taps_len:
        raise ValueError("training record too short for the requested tap count")

    target = pr4_ideal(bits, prev_bits)
    n = samples.size
    # X[i, j] = samples[i + taps_len - 1 - j]: row i spans taps_len samples.
    X = np.lib.stride_tricks.sliding_window_view(samples, taps_len)[:, ::-1]
    xtx = X.T @ X
    if np.linalg.cond(xtx) > cond_limit:
        warnings.warn("ill-conditioned equalizer design; applying diagonal loading")
        xtx = xtx + 1e-8 * np.trace(xtx) / taps_len * np.eye(taps_len)

    best = None
    y_pow = float(np.mean(target**2))
    for delay in range(taps_len):
        # Output row i estimates target[i + taps_len - 1 - delay].
        d = target[taps_len - 1 - delay : n - delay]
        xty = X.T @ d
        w = np.linalg.solve(xtx, xty)
        mse = float(np.mean((X @ w - d) ** 2))
        if best is None or mse < best.mse:
            best = EqualizerTaps(taps=w, delay=delay, mse=mse)
    if best.mse > 0.25 * y_pow:
        warnings.warn(f"equalizer residual MSE {best.mse:.3g} is large vs target power {y_pow:.3g}")
    return best


def equalize(samples, eq: EqualizerTaps) -> np.ndarray:
    """Apply the designed FIR so output[n] estimates the PR4 ideal at bit n.

    Edge positions without full tap support are zero-padded; callers are
    expected to discard guard bits at sector edges.
    """
    samples = np.asarray(samples, dtype=np.float64)
    full = np.convolve(samples, np.asarray(eq.taps))
    # full[i] = sum_j taps[j] * samples[i-j] estimates target[i - delay].
    out = np.zeros(samples.size, dtype=np.float64)
    src = full[eq.delay : eq.delay + samples.size]
    out[: src.size] = src
    return out


def design_whitener(noise_samples, order: int = 3, cond_limit: float = 1e10) -> WhitenerCoeffs:
    """Order-L linear predictor from the empirical autocorrelation (Yule-Walker)."""
    e = np.asarray(noise_samples, dtype=np.float64)
    if order == 0:
        return WhitenerCoeffs(p=np.zeros(0))
    if e.size < 100 * order:
        raise ValueError("noise record too short for a stable autocorrelation estimate")
    r = np.array([np.dot(e[: e.size - k], e[k:]) / e.size for k in range(order + 1)])
    r0 = r[0]
    if r0 <= 0:
        return WhitenerCoeffs(p=np.zeros(order))
    col = r[:order].copy()
    cond = np.abs(col).sum() / max(r0 - np.abs(col[1:]).sum(), 1e-300)
    if cond > cond_limit:
        warnings.warn("near-singular autocorrelation; applying diagonal loading")
        col[0] += 1e-8 * r0
    p = solve_toeplitz((col, col), r[1 : order + 1])
    w = WhitenerCoeffs(p=p)
    if not w.is_stable():
        warnings.warn("unstable prediction-error filter; shrinking coefficients")
        p = p * 0.99 / max(np.abs(np.roots(np.concatenate([[1.0], -p]))).max(), 1.0)
        w = WhitenerCoeffs(p=p)
    return w


def prediction_error(noise_samples, w: WhitenerCoeffs) -> np.ndarray:
    """Whitened residual e[n] - sum p_i e[n-i] (first ``order`` outputs use zeros)."""
    e = np.asarray(noise_samples, dtype=np.float64)
    out = e.copy()
    for i, pi in enumerate(np.asarray(w.p), start=1):
        out[i:] -= pi * e[:-i]
    return out


def save_design(path, eq: EqualizerTaps, w: WhitenerCoeffs) -> None:
    """Plain-text key=value serialization of a frozen design."""
    with open(path, "w") as f:
        f.write(f"delay={eq.delay}\n")
        f.write(f"mse={eq.mse!r}\n")
        f.write("taps=" + ",".join(repr(float(t)) for t in eq.taps) + "\n")
        f.write("p=" + ",".join(repr(float(c)) for c in w.p) + "\n")


def load_design(path):
    kv = {}
    with open(path) as f:
        for line in f:
            key, _, val = line.strip().partition("=")
            kv[key] = val
    taps = np.array([float(x) for x in kv["taps"].split(",") if x])
    p = np.array([float(x) for x in kv["p"].split(",") if x]) if kv.get("p") else np.zeros(0)
    return EqualizerTaps(taps=taps, delay=int(kv["delay"]), mse=float(kv["mse"])), WhitenerCoeffs(p=p)
