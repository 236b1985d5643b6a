"""Four-state PR4 trellis tables and the rank-list add-compare-select step.

State encoding: s = 2*b[n-1] + b[n-2] over the last two written bits.  An
input bit b drives s -> 2*b + (s >> 1) with ideal PR4 output
y = 2*(b - (s & 1)).  Every state has exactly two incoming and two outgoing
transitions.
"""

from __future__ import annotations

import numpy as np

NUM_STATES = 4

# NEXT_STATE[s, b], IDEAL_OUT[s, b] for input bit b.
NEXT_STATE = np.array([[2 * b + (s >> 1) for b in (0, 1)] for s in range(4)], dtype=np.int64)
IDEAL_OUT = np.array([[2.0 * (b - (s & 1)) for b in (0, 1)] for s in range(4)], dtype=np.float64)

# INCOMING[k] = ((prev_state, input_bit), (prev_state, input_bit)), sorted by prev_state.
INCOMING = tuple(
    tuple(sorted((int(s), int(b)) for s in range(4) for b in (0, 1) if NEXT_STATE[s, b] == k))
    for k in range(4)
)

# BRANCH_OUT[j, k] = ideal PR4 output on the j -> k transition (nan if absent).
BRANCH_OUT = np.full((4, 4), np.nan)
for _s in range(4):
    for _b in (0, 1):
        BRANCH_OUT[_s, NEXT_STATE[_s, _b]] = IDEAL_OUT[_s, _b]

INF = np.inf


def state_bit(state: int) -> int:
    """Input bit that produced ``state`` (its newest bit)."""
    return state >> 1


def branch_cost(z_now: float, ideal: float, err_hist, p) -> float:
    """Squared whitened prediction error for one transition.

    ``err_hist[i]`` holds z[n-1-i] - yhat[n-1-i] along the survivor; ``p`` are
    the predictor coefficients.  With p = 0 this is the plain PR4 Euclidean
    metric (z - y)^2.
    """
    e = z_now - ideal
    for i in range(len(p)):
        e -= p[i] * err_hist[i]
    return e * e


def list_step_core(phi_prev, costs, n_list: int):
    """One rank-list add-compare-select step over the 4-state trellis.

    phi_prev: (4, N) accumulated metrics, ascending per state, inf = dead slot.
    costs: (4, N, 4) branch cost from (state j, rank l) to next state k
           (entries for non-transitions are ignored).
    Returns (phi, beta, rank): each (4, N); beta/rank are predecessor state and
    predecessor rank (0-based), -1 for dead slots.  Ties break toward the lower
    predecessor state, then the lower predecessor rank.
    """
    phi_prev = np.asarray(phi_prev, dtype=np.float64)
    n = n_list
    phi = np.full((4, n), INF)
    beta = np.full((4, n), -1, dtype=np.int64)
    rank = np.full((4, n), -1, dtype=np.int64)
    for k in range(4):
        cands = []
        for j, _bit in INCOMING[k]:
            for l in range(n):
                if phi_prev[j, l] == INF:
                    continue
                cands.append((phi_prev[j, l] + costs[j, l, k], j, l))
        cands.sort()
        for slot, (m, j, l) in enumerate(cands[:n]):
            phi[k, slot] = m
            beta[k, slot] = j
            rank[k, slot] = l
    return phi, beta, rank
