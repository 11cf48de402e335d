"""Unbiasing extractors for exchangeable biased bits: von Neumann and Peres.

Peres output order at every recursion level is: the von Neumann bits of the
level, then the full expansion of the XOR sequence ``u``, then the full
expansion of the equal-pair sequence ``v``.  A trailing odd bit is dropped
at each level.
"""

import itertools
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from .bitcore import BitStream, binary_entropy
from .errors import CapacityError, ParameterDomainError

METHODS = ("von_neumann", "peres")
CHUNK_BITS = 1 << 16
ORACLE_MAX_N = 20


@dataclass(frozen=True)
class ExtractionReport:
    method: str
    input_length: int
    output_length: int
    yield_per_input_bit: float
    input_one_fraction: float | None
    entropy_bound: float
    efficiency_vs_entropy: float | None
    max_depth: int | None = None
    chunk_bits: int | None = None

    def to_dict(self):
        return asdict(self)


def _report(method, bits_in, n_out, max_depth=None, chunk_bits=None):
    n = bits_in.size
    frac = int(np.count_nonzero(bits_in)) / n if n else None
    bound = binary_entropy(frac) if n else 0.0
    y = n_out / n if n else 0.0
    eff = y / bound if bound > 0 else None
    return ExtractionReport(method, n, n_out, y, frac, bound, eff, max_depth, chunk_bits)


def _von_neumann_array(x):
    pairs = x[: x.size // 2 * 2].reshape(-1, 2)
    return pairs[pairs[:, 0] != pairs[:, 1], 0]


@njit(cache=True)
def _peres_kernel(x, max_depth, out):
    n = x.shape[0]
    arena = x.copy()
    tmp_u = np.empty(n // 2 + 1, dtype=np.uint8)
    tmp_v = np.empty(n // 2 + 1, dtype=np.uint8)
    st_start = np.empty(256, dtype=np.int64)
    st_len = np.empty(256, dtype=np.int64)
    st_depth = np.empty(256, dtype=np.int64)
    st_start[0], st_len[0], st_depth[0] = 0, n, 1
    top = 1
    n_out = 0
    while top > 0:
        top -= 1
        s, length, depth = st_start[top], st_len[top], st_depth[top]
        if length < 2:
            continue
        m = length // 2
        lv = 0
        for i in range(m):
            a = arena[s + 2 * i]
            b = arena[s + 2 * i + 1]
            if a != b:
                out[n_out] = a
                n_out += 1
            else:
                tmp_v[lv] = a
                lv += 1
            tmp_u[i] = a ^ b
        if max_depth > 0 and depth >= max_depth:
            continue
        # children overwrite the parent's slot: v first, then u on top of it
        for i in range(lv):
            arena[s + i] = tmp_v[i]
        for i in range(m):
            arena[s + lv + i] = tmp_u[i]
        st_start[top], st_len[top], st_depth[top] = s, lv, depth + 1
        st_start[top + 1], st_len[top + 1], st_depth[top + 1] = s + lv, m, depth + 1
        top += 2
    return n_out


def _peres_array(x, max_depth=None):
    if max_depth is not None and max_depth < 1:
        raise ParameterDomainError("max_depth must be >= 1 or None for unbounded")
    out = np.empty(x.size, dtype=np.uint8)
    n_out = _peres_kernel(np.ascontiguousarray(x, dtype=np.uint8), max_depth or 0, out)
    return out[:n_out].copy()


def _chunked(fn, x, chunk_bits):
    parts = [fn(x[i:i + chunk_bits]) for i in range(0, x.size, chunk_bits)]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.uint8)


def von_neumann(stream, chunk_bits=None):
    """Pairwise debiasing: 01 -> 0, 10 -> 1, equal pairs dropped."""
    x = stream.to_array()
    if chunk_bits:
        out = _chunked(_von_neumann_array, x, chunk_bits)
    else:
        out = _von_neumann_array(x)
    result = BitStream.from_bits(out, origin="extracted")
    return result, _report("von_neumann", x, out.size, 1, chunk_bits)


def peres(stream, max_depth=None, chunk_bits=None):
    """Iterated von Neumann procedure; ``max_depth=None`` recurses until inputs run out.

    With ``chunk_bits`` the stream is cut into independent blocks first, which
    bounds memory but loses the yield that pairs across block boundaries
    would have produced.
    """
    x = stream.to_array()
    if chunk_bits:
        out = _chunked(lambda c: _peres_array(c, max_depth), x, chunk_bits)
    else:
        out = _peres_array(x, max_depth)
    result = BitStream.from_bits(out, origin="extracted")
    return result, _report("peres", x, out.size, max_depth, chunk_bits)


def extract(stream, method, max_depth=None, chunk_bits=None):
    if method in ("von_neumann", "vn"):
        return von_neumann(stream, chunk_bits)
    if method == "peres":
        return peres(stream, max_depth, chunk_bits)
    raise ParameterDomainError(f"unknown extraction method {method!r}")


# Reference implementations on tuples; the oracle below depends only on these.

def von_neumann_reference(bits):
    return tuple(a for a, b in zip(bits[0::2], bits[1::2]) if a != b)


def peres_reference(bits):
    if len(bits) < 2:
        return ()
    pairs = list(zip(bits[0::2], bits[1::2]))
    u = tuple(a ^ b for a, b in pairs)
    v = tuple(a for a, b in pairs if a == b)
    return von_neumann_reference(bits) + peres_reference(u) + peres_reference(v)


@lru_cache(maxsize=None)
def _peres_length(bits):
    if len(bits) < 2:
        return 0
    pairs = list(zip(bits[0::2], bits[1::2]))
    vn = sum(a != b for a, b in pairs)
    u = tuple(a ^ b for a, b in pairs)
    v = tuple(a for a, b in pairs if a == b)
    return vn + _peres_length(u) + _peres_length(v)


def exact_yield_oracle(method, n, p):
    """Expected output length over all 2**n inputs of i.i.d. Bernoulli(p) bits."""
    if n > ORACLE_MAX_N:
        raise CapacityError(f"enumeration is limited to n <= {ORACLE_MAX_N}")
    if n < 0 or not 0.0 <= p <= 1.0:
        raise ParameterDomainError("need n >= 0 and p in [0, 1]")
    if method in ("von_neumann", "vn"):
        length = lambda b: len(von_neumann_reference(b))
    elif method == "peres":
        length = _peres_length
    else:
        raise ParameterDomainError(f"unknown extraction method {method!r}")
    total = 0.0
    for bits in itertools.product((0, 1), repeat=n):
        ones = sum(bits)
        total += p ** ones * (1 - p) ** (n - ones) * length(bits)
    return total
