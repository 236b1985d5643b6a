"""Experiment orchestration: SNR sweeps, variant comparisons, BER/CFR reports.

A measurement point is (snr_db, variant).  Each point designs a frozen
equalizer and whitener on a dedicated training sector, then streams
independent measurement sectors through the write/read pipeline until the
bit budget or the stop rule (minimum error events) is met.  Sectors carry two
leading guard windows (decoded but not counted) so filter and equalizer
transients never touch the measured bits, plus a trailing raw guard.

Seeds derive deterministically from (master_seed, point index, sector index)
via numpy SeedSequence spawn keys, so reruns are byte-identical.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from . import framing
from .channel import ChannelConfig, read_bits
from .detector import DetectorConfig, ListDetector
from .equalizer import (EqualizerTaps, WhitenerCoeffs, design_mmse_pr4,
                        design_whitener, equalize, pr4_ideal)
from .framing import EdcScheme, PrecoderSpec, WindowFormat
from .gf import Interleaver, RsCode, rs_encode
from .postecc import BmmParams, CfrEstimate, WeightDistribution, bmm_cfr

SCHEMA_VERSION = 1

BER_HEADER = "snr_db,variant,bits_simulated,bit_errors,ber,window_fallback_rate,seed,flags"
CFR_HEADER = ("snr_db,variant,cfr,hber,symbol_errors,blocks_observed,"
              "pre_ecc_ser,seed,flags")


@dataclass(frozen=True)
class VariantSpec:
    """One detector configuration in a sweep."""

    name: str
    n_list: int = 1
    edc: str = "none"            # "ped" | "crc" | "none"
    whitener: str = "lp"         # "lp" (linear prediction) | "zero" (plain PR4)
    parity_bits: int | None = None  # None: 3 taken from window format if EDC present, else 0
    density: float | None = None    # per-variant Dc override (rate handicap)

    def resolved_parity(self, window: WindowFormat) -> int:
        if self.parity_bits is not None:
            return self.parity_bits
        return window.parity_bits if self.edc in ("ped", "crc") else 0


@dataclass(frozen=True)
class ExperimentConfig:
    snr_db: tuple = (14.0, 15.0, 16.0)
    variants: tuple = (VariantSpec(name="npml", n_list=1, edc="none"),)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    window: WindowFormat = field(default_factory=WindowFormat)
    edc_crc: EdcScheme = field(default_factory=lambda: EdcScheme(kind="crc"))
    whitener_order: int = 3
    taps_len: int = 21
    training_bits: int = 100_000
    bit_budget: int = 1_000_000
    min_error_events: int = 100
    windows_per_sector: int = 512
    master_seed: int = 2024
    # post-ECC settings
    rs: RsCode = field(default_factory=RsCode)
    interleave_depth: int = 4
    groups_per_sector: int = 12
    bmm: BmmParams = field(default_factory=BmmParams)
    min_symbol_events: int = 200


@dataclass
class BerPoint:
    snr_db: float
    variant: str
    bits_simulated: int
    bit_errors: int
    ber: float
    window_fallback_rate: float
    seed: int
    flags: str = ""
    ped_violations: int = 0


@dataclass
class CfrPoint:
    snr_db: float
    variant: str
    cfr: float
    hber: float
    symbol_errors: int
    blocks_observed: int
    pre_ecc_ser: float
    seed: int
    flags: str = ""
    weights: WeightDistribution | None = None


def derive_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Deterministic per-task generator from the master seed and a key path."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=tuple(key)))


# ---------------------------------------------------------------------------
# per-point pipeline


def _variant_setup(cfg: ExperimentConfig, var: VariantSpec, snr_db: float):
    chan = replace(cfg.channel, snr_db=snr_db)
    if var.density is not None:
        chan = replace(chan, density=var.density)
    parity = var.resolved_parity(cfg.window)
    window = replace(cfg.window, parity_bits=parity)
    if var.edc == "crc":
        edc = replace(cfg.edc_crc, crc_width=parity)
    elif var.edc == "ped":
        edc = EdcScheme(kind="ped")
    else:
        edc = EdcScheme(kind="none")
    return chan, window, edc


def design_point(cfg: ExperimentConfig, var: VariantSpec, chan: ChannelConfig,
                 point_key: int):
    """Frozen equalizer taps and whitener coefficients for one sweep point."""
    rng = derive_rng(cfg.master_seed, point_key, 0)
    bits = rng.integers(0, 2, size=cfg.training_bits).astype(np.uint8)
    z_raw = read_bits(bits, chan, rng)
    eq = design_mmse_pr4(z_raw, bits, cfg.taps_len)
    if var.whitener == "zero":
        return eq, WhitenerCoeffs(p=np.zeros(cfg.whitener_order))
    zeq = equalize(z_raw, eq)
    guard = 4 * cfg.taps_len
    noise = (zeq - pr4_ideal(bits))[guard : bits.size - guard]
    return eq, design_whitener(noise, cfg.whitener_order)


def _detect_sector(cfg, var, chan, window, edc, eq, wh, payload_bits, rng):
    """Write/read one sector; returns decoded vs transmitted user streams.

    payload_bits: user-domain bits for the data windows (multiple of
    window.payload_bits).  Two random guard windows are prepended and decoded
    but excluded from the returned streams.
    """
    period = window.period_p
    n_guard = 2
    guard_payload = rng.integers(0, 2, size=n_guard * window.payload_bits).astype(np.uint8)
    user = np.concatenate([guard_payload, payload_bits])
    # Precode first, then frame: parity covers the precoded channel bits so
    # every window verifies standalone at the detector.
    chan_payload = framing.precode(user, PrecoderSpec())
    chan_bits = framing.insert_edc_parity(chan_payload, window, edc)
    post_guard = rng.integers(0, 2, size=48).astype(np.uint8)
    all_bits = np.concatenate([chan_bits, post_guard])

    z_raw = read_bits(all_bits, chan, rng)
    zeq = equalize(z_raw, eq)[: chan_bits.size]

    det_cfg = DetectorConfig(n_list=var.n_list, whitener=wh, window=window,
                             edc=edc, kernel="auto")
    # Genie windows are always supplied: PED needs them for selection, other
    # modes use them only for violation accounting (never for decisions).
    genie = chan_bits.reshape(-1, period)
    det = ListDetector(det_cfg)
    decoded, diags = det.run(zeq, genie_windows=genie)

    dec_user = framing.inverse_precode(
        framing.strip_edc_parity(decoded, window), PrecoderSpec())
    n_skip = n_guard * window.payload_bits
    return dec_user[n_skip:], user[n_skip:], diags[n_guard:]


def run_ber_point(cfg: ExperimentConfig, var: VariantSpec, snr_db: float,
                  point_key: int) -> BerPoint:
    chan, window, edc = _variant_setup(cfg, var, snr_db)
    eq, wh = design_point(cfg, var, chan, point_key)
    sector_payload = cfg.windows_per_sector * window.payload_bits

    bits_done = 0
    errors = 0
    fallbacks = 0
    windows = 0
    violations = 0
    sector = 1
    while bits_done < cfg.bit_budget and errors < cfg.min_error_events:
        rng = derive_rng(cfg.master_seed, point_key, sector)
        payload = rng.integers(0, 2, size=sector_payload).astype(np.uint8)
        dec, ref, diags = _detect_sector(cfg, var, chan, window, edc, eq, wh,
                                         payload, rng)
        errors += int(np.count_nonzero(dec != ref))
        bits_done += ref.size
        fallbacks += sum(d.fallback_used for d in diags)
        violations += sum(d.ped_violation for d in diags)
        windows += len(diags)
        sector += 1

    flags = "" if errors >= cfg.min_error_events else "low-confidence"
    return BerPoint(
        snr_db=snr_db, variant=var.name, bits_simulated=bits_done,
        bit_errors=errors, ber=errors / bits_done if bits_done else 0.0,
        window_fallback_rate=fallbacks / windows if windows else 0.0,
        seed=cfg.master_seed, flags=flags, ped_violations=violations)


def run_ber_sweep(cfg: ExperimentConfig, variant_filter=None):
    points = []
    for pi, snr in enumerate(cfg.snr_db):
        for vi, var in enumerate(cfg.variants):
            if variant_filter and var.name not in variant_filter:
                continue
            points.append(run_ber_point(cfg, var, snr, _point_key(pi, vi)))
    return points


def _point_key(snr_index: int, variant_index: int) -> int:
    # Keyed on the SNR index only: every variant at a given SNR sees the
    # same payload and noise draws (common random numbers), which makes
    # per-point variant comparisons paired rather than independent.
    del variant_index
    return 1000 * (snr_index + 1)


def _rs_sector_payload(cfg: ExperimentConfig, window: WindowFormat, rng):
    """RS-encoded interleaved sector payload plus bookkeeping for scoring.

    Returns (payload_bits, codewords, filler_bits) where payload_bits is
    padded with random filler to a whole number of windows.
    """
    n_words = cfg.interleave_depth * cfg.groups_per_sector
    data = rng.integers(0, 256, size=(n_words, cfg.rs.k))
    words = np.stack([rs_encode(d, cfg.rs) for d in data])
    iv = Interleaver(depth=cfg.interleave_depth, word_len=cfg.rs.n)
    stream = iv.interleave(words)
    bits = framing.bytes_to_bits(stream.astype(np.uint8))
    pay = window.payload_bits
    fill = (-bits.size) % pay
    filler = rng.integers(0, 2, size=fill).astype(np.uint8)
    return np.concatenate([bits, filler]), words, fill


def run_cfr_point(cfg: ExperimentConfig, var: VariantSpec, snr_db: float,
                  point_key: int) -> CfrPoint:
    chan, window, edc = _variant_setup(cfg, var, snr_db)
    eq, wh = design_point(cfg, var, chan, point_key)
    iv = Interleaver(depth=cfg.interleave_depth, word_len=cfg.rs.n)

    m = cfg.bmm.block_symbols
    counts = np.zeros(m + 1, dtype=np.int64)
    sym_errors = 0
    syms_done = 0
    bits_done = 0
    sector = 1
    while bits_done < cfg.bit_budget and sym_errors < cfg.min_symbol_events:
        rng = derive_rng(cfg.master_seed, point_key, sector)
        payload, words, fill = _rs_sector_payload(cfg, window, rng)
        dec, ref, _ = _detect_sector(cfg, var, chan, window, edc, eq, wh,
                                     payload, rng)
        rs_bits = dec[: dec.size - fill] if fill else dec
        rec_words = iv.deinterleave(framing.bits_to_bytes(rs_bits))
        flags = (rec_words != words)  # decoder's post-deinterleave view
        blocks = flags.reshape(-1, m).sum(axis=1)
        counts += np.bincount(blocks, minlength=m + 1)
        sym_errors += int(flags.sum())
        syms_done += flags.size
        bits_done += ref.size
        sector += 1

    blocks_observed = int(counts.sum())
    y = WeightDistribution(m, counts / blocks_observed, blocks_observed=blocks_observed)
    est = bmm_cfr(y, cfg.bmm)
    flags_s = "" if sym_errors >= max(10, cfg.min_symbol_events) else "low-confidence"
    return CfrPoint(
        snr_db=snr_db, variant=var.name, cfr=est.cfr, hber=est.hber,
        symbol_errors=sym_errors, blocks_observed=blocks_observed,
        pre_ecc_ser=sym_errors / syms_done if syms_done else 0.0,
        seed=cfg.master_seed, flags=flags_s, weights=y)


def run_cfr_sweep(cfg: ExperimentConfig, variant_filter=None):
    points = []
    for pi, snr in enumerate(cfg.snr_db):
        for vi, var in enumerate(cfg.variants):
            if variant_filter and var.name not in variant_filter:
                continue
            points.append(run_cfr_point(cfg, var, snr, _point_key(pi, vi) + 500_000))
    return points


# ---------------------------------------------------------------------------
# reporting


def emit_report(points, outdir, kind: str = "csv", plot: bool = False):
    """Write sweep results as CSV (and optionally an SVG plot); returns paths."""
    if not points:
        raise ValueError("no points to report")
    os.makedirs(outdir, exist_ok=True)
    is_ber = isinstance(points[0], BerPoint)
    name = "ber" if is_ber else "cfr"
    csv_path = os.path.join(outdir, f"{name}_sweep.csv")
    with open(csv_path, "w") as f:
        f.write((BER_HEADER if is_ber else CFR_HEADER) + "\n")
        for p in points:
            if is_ber:
                f.write(f"{p.snr_db!r},{p.variant},{p.bits_simulated},{p.bit_errors},"
                        f"{p.ber!r},{p.window_fallback_rate!r},{p.seed},{p.flags}\n")
            else:
                f.write(f"{p.snr_db!r},{p.variant},{p.cfr!r},{p.hber!r},"
                        f"{p.symbol_errors},{p.blocks_observed},{p.pre_ecc_ser!r},"
                        f"{p.seed},{p.flags}\n")
    paths = [csv_path]
    if plot or kind == "plot":
        paths.append(_emit_plot(points, outdir, name, is_ber))
    return paths


def _emit_plot(points, outdir, name, is_ber):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4.5))
    by_var = {}
    for p in points:
        by_var.setdefault(p.variant, []).append(p)
    for var, pts in by_var.items():
        pts = sorted(pts, key=lambda p: p.snr_db)
        xs = [p.snr_db for p in pts]
        ys = [p.ber if is_ber else p.cfr for p in pts]
        ax.semilogy(xs, ys, marker="o", label=var)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("BER" if is_ber else "CFR")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    path = os.path.join(outdir, f"{name}_sweep.svg")
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def snr_at_level(points, level: float):
    """SNR where the curve crosses ``level``, by log-linear interpolation.

    ``points`` are one variant's (snr, rate) pairs; rates must span the level.
    """
    pts = sorted(points, key=lambda p: p[0])
    for (s0, r0), (s1, r1) in zip(pts, pts[1:]):
        if r0 <= 0 or r1 <= 0:
            continue
        lo, hi = sorted((r0, r1))
        if lo <= level <= hi:
            f = (np.log10(level) - np.log10(r0)) / (np.log10(r1) - np.log10(r0))
            return s0 + f * (s1 - s0)
    raise ValueError(f"sweep does not bracket level {level}")


def gain_db(base_points, test_points, level: float) -> float:
    """SNR advantage of the test variant over the base at a target rate."""
    return snr_at_level(base_points, level) - snr_at_level(test_points, level)


# ---------------------------------------------------------------------------
# config file round trip


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "master_seed": cfg.master_seed,
        "snr_db": list(cfg.snr_db),
        "channel": {
            "density": cfg.channel.density,
            "beta": cfg.channel.beta,
            "oversampling": cfg.channel.oversampling,
            "lpf_cutoff": cfg.channel.lpf_cutoff,
            "pulse_span_bits": cfg.channel.pulse_span_bits,
        },
        "window": {"period_p": cfg.window.period_p, "parity_bits": cfg.window.parity_bits},
        "crc": {"poly": cfg.edc_crc.crc_poly, "width": cfg.edc_crc.crc_width},
        "detector": {"whitener_order": cfg.whitener_order},
        "equalizer": {"taps_len": cfg.taps_len, "training_bits": cfg.training_bits},
        "budget": {
            "bit_budget": cfg.bit_budget,
            "min_error_events": cfg.min_error_events,
            "min_symbol_events": cfg.min_symbol_events,
            "windows_per_sector": cfg.windows_per_sector,
        },
        "ecc": {
            "n": cfg.rs.n, "k": cfg.rs.k,
            "interleave_depth": cfg.interleave_depth,
            "groups_per_sector": cfg.groups_per_sector,
            "block_symbols": cfg.bmm.block_symbols,
            "j_max": cfg.bmm.j_max, "m_b": cfg.bmm.m_b,
        },
        "variants": [
            {k: v for k, v in {
                "name": v_.name, "n_list": v_.n_list, "edc": v_.edc,
                "whitener": v_.whitener, "parity_bits": v_.parity_bits,
                "density": v_.density,
            }.items() if v is not None}
            for v_ in cfg.variants
        ],
    }


def config_from_dict(d: dict) -> ExperimentConfig:
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {d.get('schema_version')!r}")
    ch = d.get("channel", {})
    win = d.get("window", {})
    crc = d.get("crc", {})
    det = d.get("detector", {})
    eq = d.get("equalizer", {})
    bud = d.get("budget", {})
    ecc = d.get("ecc", {})
    rs = RsCode(n=ecc.get("n", 255), k=ecc.get("k", 245))
    return ExperimentConfig(
        snr_db=tuple(float(s) for s in d.get("snr_db", ())),
        variants=tuple(
            VariantSpec(
                name=v["name"], n_list=v.get("n_list", 1), edc=v.get("edc", "none"),
                whitener=v.get("whitener", "lp"), parity_bits=v.get("parity_bits"),
                density=v.get("density"))
            for v in d.get("variants", ())),
        channel=ChannelConfig(
            density=ch.get("density", 3.25), beta=ch.get("beta", 0.5),
            oversampling=ch.get("oversampling", 8),
            lpf_cutoff=ch.get("lpf_cutoff", 0.5),
            pulse_span_bits=ch.get("pulse_span_bits", 32)),
        window=WindowFormat(period_p=win.get("period_p", 198),
                            parity_bits=win.get("parity_bits", 3)),
        edc_crc=EdcScheme(kind="crc", crc_poly=crc.get("poly", 0b011),
                          crc_width=crc.get("width", 3)),
        whitener_order=det.get("whitener_order", 3),
        taps_len=eq.get("taps_len", 21),
        training_bits=eq.get("training_bits", 100_000),
        bit_budget=bud.get("bit_budget", 1_000_000),
        min_error_events=bud.get("min_error_events", 100),
        min_symbol_events=bud.get("min_symbol_events", 200),
        windows_per_sector=bud.get("windows_per_sector", 512),
        master_seed=d.get("master_seed", 2024),
        rs=rs,
        interleave_depth=ecc.get("interleave_depth", 4),
        groups_per_sector=ecc.get("groups_per_sector", 12),
        bmm=BmmParams(block_symbols=ecc.get("block_symbols", 17), n=rs.n,
                      t=rs.t, j_max=ecc.get("j_max", 10), m_b=ecc.get("m_b", 1960)),
    )


def load_config(path) -> ExperimentConfig:
    with open(path) as f:
        return config_from_dict(yaml.safe_load(f))


def save_config(cfg: ExperimentConfig, path) -> None:
    with open(path, "w") as f:
        yaml.safe_dump(config_to_dict(cfg), f, sort_keys=False)
