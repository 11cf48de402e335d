"""Frame-by-frame event simulation of the beamsplitter generator.

Draw order per frame (fixed, so runs are reproducible):

1. photon count, Poisson by inversion (1 uniform);
2. per photon: path choice (1 uniform), then jitter (2 uniforms, only when
   the jitter sigma is positive);
3. per detector, when its dark rate is positive: dark count (1 uniform) and
   one uniform per dark time;
4. candidates in time order: one uniform for the firing decision; on a
   firing with a nonzero afterpulse probability, one uniform for the
   afterpulse decision and one more for its exponential delay.

Frame-local times are measured from the nominal frame start.  Frame ``k``
owns the interval ``[o0 - w/2, T + o0 - w/2)``, which starts at the opening
of its '0' window.
"""

import numpy as np
from numba import njit

from ..bitcore.rng import exponential, next_uniform, normal_box_muller, poisson_inversion

PHOTON, DARK, AFTERPULSE = 0, 1, 2
LABEL_ZERO, LABEL_ONE, LABEL_NOISE, LABEL_OUTSIDE = 0, 1, 2, 3

# counters array layout
C_ZEROS, C_ONES, C_NOISE, C_AMBIGUOUS, C_REJECTED, C_ADJACENT = range(6)
N_COUNTERS = 6

# float parameter array layout
(P_PERIOD, P_MU, P_SPLIT, P_DELAY, P_WIDTH, P_OFF0, P_OFFN, P_JITTER,
 P_ETA0, P_TAU, P_DARK_MU, P_AP, P_AP_TAU) = range(13)

MAX_CANDIDATES = 512
MAX_PENDING = 64
NO_AVALANCHE = -1e300


@njit(inline="always", cache=True)
def efficiency(dt, eta0, tau):
    if dt <= 0.0:
        return 0.0
    if dt >= tau:
        return eta0
    return eta0 * dt / tau


@njit(cache=True)
def _insert(times, dets, causes, n, t, d, c, lo):
    # keep times[lo:n] sorted; candidates before lo are already processed
    j = n
    while j > lo and times[j - 1] > t:
        times[j] = times[j - 1]
        dets[j] = dets[j - 1]
        causes[j] = causes[j - 1]
        j -= 1
    times[j] = t
    dets[j] = d
    causes[j] = c
    return n + 1


@njit(cache=True)
def run_frames(s, prm, n_det, reject, n_frames, first_frame,
               t_last, pending, n_pending, prev_bit,
               out_bits, out_adj, counters,
               ev_frame, ev_time, ev_label, ev_cause, ev_det, ev_count):
    period = prm[P_PERIOD]
    mu = prm[P_MU]
    split = prm[P_SPLIT]
    delay = prm[P_DELAY]
    half = 0.5 * prm[P_WIDTH]
    off0 = prm[P_OFF0]
    offn = prm[P_OFFN]
    jitter = prm[P_JITTER]
    eta0 = prm[P_ETA0]
    tau = prm[P_TAU]
    dark_mu = prm[P_DARK_MU]
    p_ap = prm[P_AP]
    ap_tau = prm[P_AP_TAU]
    span_lo = off0 - half
    span_hi = span_lo + period
    w0_lo, w0_hi = off0 - half, off0 + half
    w1_lo, w1_hi = off0 + delay - half, off0 + delay + half
    wn_lo, wn_hi = offn - half, offn + half
    ev_cap = ev_frame.shape[0]

    times = np.empty(MAX_CANDIDATES, dtype=np.float64)
    dets = np.empty(MAX_CANDIDATES, dtype=np.int64)
    causes = np.empty(MAX_CANDIDATES, dtype=np.int64)
    n_out = 0
    n_yield = 0

    for f in range(n_frames):
        n = 0
        n_ph = poisson_inversion(s, mu)
        for _ in range(n_ph):
            path = 1 if next_uniform(s) < split else 0
            t = off0 + path * delay
            if jitter > 0.0:
                t += jitter * normal_box_muller(s)
            d = path if n_det == 2 else 0
            if n < MAX_CANDIDATES - MAX_PENDING:
                n = _insert(times, dets, causes, n, t, d, PHOTON, 0)
        if dark_mu > 0.0:
            for d in range(n_det):
                n_dark = poisson_inversion(s, dark_mu)
                for _ in range(n_dark):
                    t = span_lo + period * next_uniform(s)
                    if n < MAX_CANDIDATES - MAX_PENDING:
                        n = _insert(times, dets, causes, n, t, d, DARK, 0)
        for d in range(n_det):
            keep = 0
            for j in range(n_pending[d]):
                t = pending[d, j]
                if t < span_hi and n < MAX_CANDIDATES - 1:
                    n = _insert(times, dets, causes, n, t, d, AFTERPULSE, 0)
                else:
                    pending[d, keep] = t
                    keep += 1
            n_pending[d] = keep

        fired0 = False
        fired1 = False
        i = 0
        while i < n:
            t = times[i]
            d = dets[i]
            eff = efficiency(t - t_last[d], eta0, tau)
            if next_uniform(s) < eff:
                t_last[d] = t
                if w0_lo <= t < w0_hi and d == 0:
                    label = LABEL_ZERO
                    fired0 = True
                elif w1_lo <= t < w1_hi and d == n_det - 1:
                    label = LABEL_ONE
                    fired1 = True
                elif wn_lo <= t < wn_hi:
                    label = LABEL_NOISE
                    counters[C_NOISE] += 1
                else:
                    label = LABEL_OUTSIDE
                if ev_count[0] < ev_cap:
                    k = ev_count[0]
                    ev_frame[k] = first_frame + f
                    ev_time[k] = (first_frame + f) * period + t
                    ev_label[k] = label
                    ev_cause[k] = causes[i]
                    ev_det[k] = d
                    ev_count[0] = k + 1
                if p_ap > 0.0 and next_uniform(s) < p_ap:
                    t_ap = t + exponential(s, ap_tau)
                    if t_ap < span_hi and n < MAX_CANDIDATES:
                        n = _insert(times, dets, causes, n, t_ap, d, AFTERPULSE, i + 1)
                    elif n_pending[d] < MAX_PENDING:
                        pending[d, n_pending[d]] = t_ap
                        n_pending[d] += 1
            i += 1

        if fired0 and fired1:
            counters[C_AMBIGUOUS] += 1
            prev_bit[0] = 0
        elif fired0 or fired1:
            bit = 1 if fired1 else 0
            if bit:
                counters[C_ONES] += 1
            else:
                counters[C_ZEROS] += 1
            adjacent = prev_bit[0]
            out_adj[n_yield] = adjacent
            n_yield += 1
            if adjacent:
                counters[C_ADJACENT] += 1
            if reject and adjacent:
                counters[C_REJECTED] += 1
            else:
                out_bits[n_out] = bit
                n_out += 1
            prev_bit[0] = 1
        else:
            prev_bit[0] = 0

        for d in range(n_det):
            t_last[d] -= period
            for j in range(n_pending[d]):
                pending[d, j] -= period
    return n_out, n_yield
