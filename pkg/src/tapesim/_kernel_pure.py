"""Pure-Python window decoder; reference semantics for the compiled kernel.

``run_window`` advances the rank-list trellis search over one decision window
and returns every surviving candidate, globally sorted by terminal metric.
The compiled extension (tapesim._kernel) implements the same contract; the two
are required to agree bit-for-bit.
"""

from __future__ import annotations

import numpy as np

from .trellis import BRANCH_OUT, INCOMING, INF, state_bit

KERNEL_NAME = "pure"


def run_window(z, p, phi0, err0, n_list):
    """Decode one window of len(z) steps starting from (phi0, err0).

    z: (P,) equalized samples.
    p: (L,) predictor coefficients.
    phi0: (4, N) initial accumulated metrics (inf = dead slot, ascending).
    err0: (4, N, L) initial prediction-error feedback per slot; err0[s, l, i]
          holds z[-1-i] - yhat[-1-i] along that survivor.
    n_list: list depth N.

    Returns (bits, metrics, states, ranks, errs):
      bits    (C, P) uint8 candidate windows, C <= 4N, ascending metric order
      metrics (C,)   terminal accumulated metrics
      states  (C,)   terminal trellis states
      ranks   (C,)   terminal in-state rank (0-based)
      errs    (C, L) terminal feedback histories (for seeding the next window)
    """
    z = np.asarray(z, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    n = int(n_list)
    steps = z.size
    order = p.size

    phi = np.array(phi0, dtype=np.float64)
    err = np.array(err0, dtype=np.float64).reshape(4, n, max(order, 1))[:, :, :order].copy()
    beta_hist = np.full((steps, 4, n), -1, dtype=np.int16)
    rank_hist = np.full((steps, 4, n), -1, dtype=np.int16)

    for t in range(steps):
        zt = z[t]
        new_phi = np.full((4, n), INF)
        new_err = np.zeros((4, n, order))
        for k in range(4):
            yk = None
            cands = []
            for j, _bit in INCOMING[k]:
                y = BRANCH_OUT[j, k]
                for l in range(n):
                    if phi[j, l] == INF:
                        continue
                    e = zt - y
                    for i in range(order):
                        e -= p[i] * err[j, l, i]
                    cands.append((phi[j, l] + e * e, j, l, zt - y))
            cands.sort(key=lambda c: (c[0], c[1], c[2]))
            for slot, (m, j, l, eraw) in enumerate(cands[:n]):
                new_phi[k, slot] = m
                beta_hist[t, k, slot] = j
                rank_hist[t, k, slot] = l
                if order:
                    new_err[k, slot, 0] = eraw
                    new_err[k, slot, 1:] = err[j, l, : order - 1]
        phi = new_phi
        err = new_err

    # Traceback every live terminal slot through the (beta, rank) chains.
    out = []
    for k in range(4):
        for l in range(n):
            if phi[k, l] == INF:
                continue
            bits = np.empty(steps, dtype=np.uint8)
            s, r = k, l
            for t in range(steps - 1, -1, -1):
                bits[t] = state_bit(s)
                s, r = int(beta_hist[t, s, r]), int(rank_hist[t, s, r])
                if s < 0:
                    raise AssertionError("broken traceback chain")
            out.append((float(phi[k, l]), k, l, bits, err[k, l].copy()))
    out.sort(key=lambda c: (c[0], c[1], c[2]))

    c = len(out)
    bits = np.zeros((c, steps), dtype=np.uint8)
    metrics = np.zeros(c)
    states = np.zeros(c, dtype=np.int64)
    ranks = np.zeros(c, dtype=np.int64)
    errs = np.zeros((c, order))
    for i, (m, k, l, b, e) in enumerate(out):
        metrics[i] = m
        states[i] = k
        ranks[i] = l
        bits[i] = b
        errs[i] = e
    return bits, metrics, states, ranks, errs
