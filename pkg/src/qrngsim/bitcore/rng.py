"""splitmix64-seeded xoshiro256** generator.

The state lives in a ``uint64[4]`` numpy array so that the numba kernels in
the simulator and the bulk bit generators can advance it in place.  Every
draw helper below is also usable from other ``@njit`` code.
"""

import numpy as np
from numba import njit

from ..errors import ParameterDomainError

_MASK64 = (1 << 64) - 1
_INV_2_53 = 1.0 / 9007199254740992.0


def splitmix64(x):
    """Advance a splitmix64 state; return ``(new_state, output)`` as Python ints."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x, z ^ (z >> 31)


def seed_state(seed):
    x = int(seed)
    if not 0 <= x <= _MASK64:
        raise ParameterDomainError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
    words = []
    for _ in range(4):
        x, out = splitmix64(x)
        words.append(out)
    return np.array(words, dtype=np.uint64)


@njit(inline="always", cache=True)
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True)
def next_u64(s):
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@njit(cache=True)
def next_uniform(s):
    return np.float64(next_u64(s) >> np.uint64(11)) * _INV_2_53


@njit(cache=True)
def poisson_inversion(s, mu):
    # one uniform per sample, sequential search from k = 0
    u = next_uniform(s)
    p = np.exp(-mu)
    cdf = p
    k = 0
    while u >= cdf:
        k += 1
        p *= mu / k
        if p == 0.0:
            break
        cdf += p
    return k


@njit(cache=True)
def normal_box_muller(s):
    # two uniforms per sample; the sine partner is discarded
    u1 = next_uniform(s)
    u2 = next_uniform(s)
    return np.sqrt(-2.0 * np.log(1.0 - u1)) * np.cos(2.0 * np.pi * u2)


@njit(cache=True)
def exponential(s, scale):
    return -scale * np.log(1.0 - next_uniform(s))


@njit(cache=True)
def _fill_u64(s, out):
    for i in range(out.shape[0]):
        out[i] = next_u64(s)


@njit(cache=True)
def _fill_uniform(s, out):
    for i in range(out.shape[0]):
        out[i] = next_uniform(s)


@njit(cache=True)
def _fill_bernoulli(s, p, out):
    for i in range(out.shape[0]):
        out[i] = 1 if next_uniform(s) < p else 0


@njit(cache=True)
def _fill_poisson(s, mu, out):
    for i in range(out.shape[0]):
        out[i] = poisson_inversion(s, mu)


class RngEngine:
    """Deterministic xoshiro256** engine seeded through splitmix64.

    Single-owner: do not share one engine between threads.  Use distinct
    seeds for parallel work.
    """

    def __init__(self, seed=0):
        self.seed = int(seed)
        self.state = seed_state(self.seed)

    def __repr__(self):
        return f"RngEngine(seed={self.seed})"

    def next_u64(self):
        return int(next_u64(self.state))

    def uniform(self):
        """One double in [0, 1) built from the top 53 bits of a draw."""
        return float(next_uniform(self.state))

    def u64_array(self, n):
        out = np.empty(int(n), dtype=np.uint64)
        _fill_u64(self.state, out)
        return out

    def uniform_array(self, n):
        out = np.empty(int(n), dtype=np.float64)
        _fill_uniform(self.state, out)
        return out

    def fair_bits(self, n):
        """``n`` unbiased bits as a uint8 array, 64 per draw, LSB first."""
        n = int(n)
        words = self.u64_array((n + 63) // 64)
        raw = words.astype("<u8").view(np.uint8)
        return np.unpackbits(raw, bitorder="little")[:n]

    def bernoulli_bits(self, n, p):
        """``n`` i.i.d. bits with P(1) = p, one uniform per bit."""
        if not 0.0 <= p <= 1.0:
            raise ParameterDomainError(f"p must lie in [0, 1], got {p}")
        out = np.empty(int(n), dtype=np.uint8)
        _fill_bernoulli(self.state, float(p), out)
        return out

    def poisson_array(self, mu, n):
        _check_poisson_mean(mu)
        out = np.empty(int(n), dtype=np.int64)
        _fill_poisson(self.state, float(mu), out)
        return out


def rng_new(seed):
    return RngEngine(seed)


POISSON_MU_MAX = 30.0


def _check_poisson_mean(mu):
    if not 0.0 <= mu <= POISSON_MU_MAX:
        raise ParameterDomainError(
            f"Poisson mean must lie in [0, {POISSON_MU_MAX:g}], got {mu}")


def sample_poisson(rng, mu):
    """Draw from Poisson(mu) by inversion, consuming exactly one uniform."""
    _check_poisson_mean(mu)
    return int(poisson_inversion(rng.state, float(mu)))
