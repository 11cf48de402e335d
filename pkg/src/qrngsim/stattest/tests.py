"""Frequency, serial, runs, entropy and Maurer universal tests.

Every test returns a :class:`TestResult`.  Streams that are too short raise
:class:`InsufficientDataError`; the runs test reports ``not_applicable``
when its frequency prerequisite fails.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc
from scipy.stats import chi2

from ..errors import InsufficientDataError, ParameterDomainError

PASS, FAIL, NOT_APPLICABLE = "pass", "fail", "not_applicable"


@dataclass
class TestResult:
    __test__ = False

    name: str
    params: dict
    statistic: float | None
    p_value: float | None
    verdict: str
    bits_consumed: int
    extra: dict = field(default_factory=dict)
    reason: str | None = None

    def to_dict(self):
        d = {
            "name": self.name, "params": self.params, "statistic": self.statistic,
            "p_value": self.p_value, "verdict": self.verdict,
            "bits_consumed": self.bits_consumed,
        }
        if self.extra:
            d.update(self.extra)
        if self.reason:
            d["reason"] = self.reason
        return d


def _verdict(p, alpha):
    return PASS if p >= alpha else FAIL


def _bits(stream):
    return stream.to_array().astype(np.int64)


def frequency_test(stream, alpha=0.01):
    n = stream.length
    if n < 100:
        raise InsufficientDataError(f"frequency test needs >= 100 bits, got {n}")
    s = 2 * stream.count_ones() - n
    stat = abs(s) / math.sqrt(n)
    p = float(erfc(stat / math.sqrt(2)))
    return TestResult("frequency", {}, stat, p, _verdict(p, alpha), n)


def _block_codes(x, m, circular=True):
    # integer value of every overlapping m-bit block, first bit most significant
    n = x.size
    ext = np.concatenate([x, x[: m - 1]]) if circular else x
    count = n if circular else n - m + 1
    codes = np.zeros(count, dtype=np.int64)
    for j in range(m):
        codes = (codes << 1) | ext[j:j + count]
    return codes


def _psi2(x, m):
    if m <= 0:
        return 0.0
    n = x.size
    counts = np.bincount(_block_codes(x, m), minlength=1 << m).astype(np.float64)
    return float((1 << m) / n * np.dot(counts, counts) - n)


def serial_test(stream, m=2, alpha=0.01):
    """Generalized serial test on overlapping, circularly extended m-bit blocks.

    ``p_value`` is the smaller of the two p-values, so the verdict fails when
    either one is below ``alpha``; both are kept in ``extra['p_values']``.
    """
    if not 2 <= m <= 16:
        raise ParameterDomainError(f"serial block length must lie in [2, 16], got {m}")
    n = stream.length
    if n < 100 * (1 << m):
        raise InsufficientDataError(f"serial test with m={m} needs >= {100 << m} bits, got {n}")
    x = _bits(stream)
    p0, p1, p2 = _psi2(x, m), _psi2(x, m - 1), _psi2(x, m - 2)
    d1 = p0 - p1
    d2 = p0 - 2 * p1 + p2
    pv1 = float(chi2.sf(d1, 1 << (m - 1)))
    pv2 = float(chi2.sf(d2, 1 << (m - 2)))
    p = min(pv1, pv2)
    return TestResult("serial", {"m": m}, d1, p, _verdict(p, alpha), n,
                      {"p_values": [pv1, pv2], "delta2": d2})


def runs_test(stream, alpha=0.01):
    n = stream.length
    if n < 100:
        raise InsufficientDataError(f"runs test needs >= 100 bits, got {n}")
    x = _bits(stream)
    pi = stream.count_ones() / n
    if abs(pi - 0.5) >= 2 / math.sqrt(n):
        return TestResult("runs", {}, None, None, NOT_APPLICABLE, n,
                          reason="frequency prerequisite failed")
    v = 1 + int(np.count_nonzero(x[1:] != x[:-1]))
    q = pi * (1 - pi)
    stat = abs(v - 2 * n * q) / (2 * math.sqrt(2 * n) * q)
    p = float(erfc(stat))
    return TestResult("runs", {}, float(v), p, _verdict(p, alpha), n)


def block_entropy(x, m):
    """Shannon entropy per bit of non-overlapping m-bit blocks."""
    k = x.size // m
    if k == 0:
        return 0.0
    weights = 1 << np.arange(m - 1, -1, -1)
    codes = x[: k * m].reshape(k, m) @ weights
    freq = np.bincount(codes, minlength=1 << m) / k
    freq = freq[freq > 0]
    return float(-(freq * np.log2(freq)).sum() / m)


def _phi(x, m):
    if m == 0:
        return 0.0
    counts = np.bincount(_block_codes(x, m), minlength=1 << m)
    freq = counts[counts > 0] / x.size
    return float((freq * np.log(freq)).sum())


def entropy_test(stream, m=8, alpha=0.01):
    """Block entropy per bit plus approximate entropy ApEn(m); the verdict comes from ApEn."""
    if not 1 <= m <= 16:
        raise ParameterDomainError(f"entropy block length must lie in [1, 16], got {m}")
    n = stream.length
    if n < 100 * (1 << m):
        raise InsufficientDataError(f"entropy test with m={m} needs >= {100 << m} bits, got {n}")
    x = _bits(stream)
    apen = _phi(x, m) - _phi(x, m + 1)
    stat = 2 * n * (math.log(2) - apen)
    p = float(chi2.sf(stat, 1 << m))
    return TestResult("entropy", {"m": m}, apen, p, _verdict(p, alpha), n,
                      {"block_entropy_per_bit": block_entropy(x, m), "chi2": stat})


# (expected value, variance) of the per-word statistic for L = 1..16
MAURER_TABLE = {
    1: (0.7326495, 0.690), 2: (1.5374383, 1.338), 3: (2.4016068, 1.901),
    4: (3.3112247, 2.358), 5: (4.2534266, 2.705), 6: (5.2177052, 2.954),
    7: (6.1962507, 3.125), 8: (7.1836656, 3.238), 9: (8.1764248, 3.311),
    10: (9.1723243, 3.356), 11: (10.170032, 3.384), 12: (11.168765, 3.401),
    13: (12.168070, 3.410), 14: (13.167693, 3.416), 15: (14.167488, 3.419),
    16: (15.167379, 3.421),
}


def maurer_default_L(n_bits):
    """Largest standard word size whose data requirement ``n_bits`` satisfies, else None."""
    for L in range(16, 5, -1):
        if n_bits // L - 10 * (1 << L) >= 1000 * (1 << L):
            return L
    return None


def maurer_statistic(x, L, Q):
    """Mean log2 distance to the previous occurrence over the K test words."""
    n_words = x.size // L
    weights = 1 << np.arange(L - 1, -1, -1)
    words = x[: n_words * L].reshape(n_words, L) @ weights
    order = np.argsort(words, kind="stable")
    sw = words[order]
    same = sw[1:] == sw[:-1]
    prev = np.zeros(n_words, dtype=np.int64)
    prev[order[1:][same]] = order[:-1][same] + 1
    pos = np.arange(Q + 1, n_words + 1)
    dist = pos - prev[Q:]
    return float(np.log2(dist).sum() / (n_words - Q)), n_words - Q


def maurer_universal(stream, L=None, Q=None, alpha=0.01, oracle_mode=False):
    n = stream.length
    if L is None:
        L = maurer_default_L(n)
        if L is None:
            raise InsufficientDataError(f"Maurer test needs >= {6 * 1010 * 64} bits, got {n}")
    allowed = (1, 2) if oracle_mode else tuple(range(6, 17))
    if L not in allowed:
        raise ParameterDomainError(f"Maurer word size {L} not allowed (allowed: {allowed})")
    Q = 10 * (1 << L) if Q is None else Q
    K = n // L - Q
    if K < (1 if oracle_mode else 1000 * (1 << L)):
        raise InsufficientDataError(
            f"Maurer test with L={L}, Q={Q} needs K >= {1000 << L} test words, got {K}")
    f, K = maurer_statistic(_bits(stream), L, Q)
    expected, variance = MAURER_TABLE[L]
    c = 0.7 - 0.8 / L + (4 + 32 / L) * K ** (-3 / L) / 15
    sigma = c * math.sqrt(variance / K)
    p = float(erfc(abs(f - expected) / (math.sqrt(2) * sigma)))
    return TestResult("maurer", {"L": L, "Q": Q, "K": K}, f, p, _verdict(p, alpha), (Q + K) * L,
                      {"expected": expected, "sigma": sigma})
