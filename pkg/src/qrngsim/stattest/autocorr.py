"""Circular autocorrelation of a bit stream and the lag scan built on it.

    gamma(n) = (1/N) * sum_i X_i XOR X_{(i+n) mod N}

Lags are evaluated on 64-bit words of a circularly extended copy of the
stream, so one lag costs N/64 XOR + popcount operations.
"""

import math
import os
from dataclasses import dataclass, field

import numba
import numpy as np
from numba import njit, prange

from ..errors import ParameterDomainError

if not os.environ.get("NUMBA_THREADING_LAYER"):
    numba.config.THREADING_LAYER = "workqueue"

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)


@njit(inline="always", cache=True)
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return (x * _H01) >> np.uint64(56)


@njit(parallel=True, cache=True)
def _xor_counts(words, n_bits, lags, out):
    n_full = n_bits // 64
    tail = n_bits % 64
    tail_mask = (np.uint64(1) << np.uint64(tail)) - np.uint64(1) if tail else np.uint64(0)
    for li in prange(lags.shape[0]):
        lag = lags[li]
        q = lag // 64
        r = np.uint64(lag % 64)
        total = np.uint64(0)
        n_words = n_full + (1 if tail else 0)
        for j in range(n_words):
            if r == 0:
                y = words[j + q]
            else:
                y = (words[j + q] >> r) | (words[j + q + 1] << (np.uint64(64) - r))
            x = words[j] ^ y
            if j == n_full:
                x &= tail_mask
            total += _popcount(x)
        out[li] = total


def _extended_words(bits, max_lag):
    # bits followed by its own head, so word reads at offset lag never wrap
    n = bits.size
    reps = -(-(max_lag + 128) // n) + 1
    ext = np.tile(bits, reps)[: n + max_lag + 128]
    packed = np.packbits(ext, bitorder="little")
    packed = np.concatenate([packed, np.zeros((-packed.size) % 8, dtype=np.uint8)])
    return packed.view("<u8").astype(np.uint64)


def _set_threads():
    cap = os.environ.get("QRNG_THREADS")
    if cap:
        numba.set_num_threads(max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS)))


def xor_counts(stream, lags):
    """Number of positions with X_i != X_{i+n mod N}, for each lag in ``lags``."""
    n = stream.length
    lags = np.asarray(lags, dtype=np.int64)
    if n < 2:
        raise ParameterDomainError("autocorrelation needs at least 2 bits")
    if lags.size and (lags.min() < 1 or lags.max() >= n):
        raise ParameterDomainError(f"lags must satisfy 1 <= n < {n}")
    out = np.zeros(lags.size, dtype=np.uint64)
    if lags.size:
        _set_threads()
        words = _extended_words(stream.to_array(), int(lags.max()))
        _xor_counts(words, n, lags, out)
    return out.astype(np.int64)


def autocorrelation(stream, n):
    return int(xor_counts(stream, [n])[0]) / stream.length


@dataclass
class LagScan:
    gamma: np.ndarray
    scan_mean: float
    scan_sigma: float
    analytic_sigma: float
    outliers: list = field(default_factory=list)
    flag_sigma: float = 5.0
    n_bits: int = 0

    @property
    def n_max(self):
        return int(self.gamma.size)

    def deviation(self, lag):
        """Signed distance of gamma(lag) from the scan mean, in units of scan sigma."""
        if self.scan_sigma == 0.0:
            return 0.0
        return (float(self.gamma[lag - 1]) - self.scan_mean) / self.scan_sigma

    def to_dict(self):
        return {
            "n_max": self.n_max,
            "mean": self.scan_mean,
            "sigma": self.scan_sigma,
            "analytic_sigma": self.analytic_sigma,
            "flag_sigma": self.flag_sigma,
            "lag1_deviation": float(self.gamma[0]) - self.scan_mean,
            "lag1_sigma": self.deviation(1),
            "outliers": [[lag, dev] for lag, dev in self.outliers],
        }


def lag_scan(stream, n_max=2000, flag_sigma=5.0, max_iter=3):
    """Gamma for lags 1..n_max with iterated outlier rejection.

    Mean and sigma are re-estimated without the flagged lags until the flagged
    set stops changing (at most ``max_iter`` rounds).  ``analytic_sigma`` is
    the i.i.d. null sigma at the stream's own one-fraction.
    """
    if flag_sigma <= 0:
        raise ParameterDomainError("flag_sigma must be > 0")
    if n_max < 1 or n_max >= stream.length:
        raise ParameterDomainError(f"n_max must satisfy 1 <= n_max < {stream.length}")
    n = stream.length
    gamma = xor_counts(stream, np.arange(1, n_max + 1)) / n

    keep = np.ones(n_max, dtype=bool)
    mean, sigma = float(gamma.mean()), float(gamma.std())
    for _ in range(max_iter):
        if sigma > 0.0:
            flagged = np.abs(gamma - mean) >= flag_sigma * sigma
        else:
            flagged = np.zeros(n_max, dtype=bool)
        new_keep = ~flagged
        if np.array_equal(new_keep, keep) and _ > 0:
            break
        keep = new_keep
        if keep.sum() == 0:
            break
        mean, sigma = float(gamma[keep].mean()), float(gamma[keep].std())

    if sigma > 0.0:
        dev = (gamma - mean) / sigma
        idx = np.flatnonzero(np.abs(dev) >= flag_sigma)
    else:
        idx = np.array([], dtype=np.int64)
    outliers = [(int(i) + 1, float(dev[i])) for i in idx]

    p = stream.count_ones() / n
    v = 2 * p * (1 - p)
    analytic = math.sqrt(v * (1 - v) / n)
    return LagScan(gamma, mean, sigma, analytic, outliers, flag_sigma, n)
