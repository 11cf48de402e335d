"""Packed bit sequences.

Bit ``i`` of a stream is bit ``i % 8`` of byte ``i // 8``, least-significant
bit first.  Padding bits in the final byte are always zero.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyInputError, ParameterDomainError

ORIGINS = ("simulated", "file", "extracted")


def pack(bits):
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little")


def unpack(data, length):
    return np.unpackbits(np.asarray(data, dtype=np.uint8), count=length, bitorder="little")


@dataclass(frozen=True)
class StreamMeta:
    origin: str = "simulated"
    one_fraction: float | None = None


@dataclass(frozen=True, eq=False)
class BitStream:
    """Immutable, length-counted packed bit sequence."""

    data: np.ndarray
    length: int
    meta: StreamMeta = field(default_factory=StreamMeta)

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.uint8)
        if data.shape != ((self.length + 7) // 8,):
            raise ValueError(
                f"packed buffer holds {data.size} bytes, expected {(self.length + 7) // 8} "
                f"for {self.length} bits")
        tail = self.length % 8
        if tail and data[-1] >> tail:
            data = data.copy()
            data[-1] &= (1 << tail) - 1
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_bits(cls, bits, origin="simulated", with_fraction=True):
        bits = np.asarray(bits, dtype=np.uint8).ravel()
        if bits.size and bits.max() > 1:
            raise ValueError("bit values must be 0 or 1")
        frac = None
        if with_fraction and bits.size:
            frac = int(np.count_nonzero(bits)) / bits.size
        return cls(pack(bits), int(bits.size), StreamMeta(origin, frac))

    @classmethod
    def from_string(cls, text, origin="file"):
        """Build from ASCII ``'0'``/``'1'`` characters; whitespace is ignored."""
        chars = "".join(text.split())
        bits = np.frombuffer(chars.encode("ascii"), dtype=np.uint8) - ord("0")
        return cls.from_bits(bits, origin=origin)

    def to_array(self):
        return unpack(self.data, self.length)

    def to_string(self):
        return (self.to_array() + ord("0")).tobytes().decode("ascii")

    def count_ones(self):
        return int(np.unpackbits(self.data).sum(dtype=np.int64))

    def __len__(self):
        return self.length

    def __getitem__(self, i):
        if not -self.length <= i < self.length:
            raise IndexError(i)
        i %= self.length
        return int(self.data[i >> 3] >> (i & 7) & 1)

    def __eq__(self, other):
        if not isinstance(other, BitStream):
            return NotImplemented
        return self.length == other.length and np.array_equal(self.data, other.data)

    def __repr__(self):
        return f"BitStream(length={self.length}, origin={self.meta.origin!r})"


def binary_entropy(p):
    """Shannon entropy of a Bernoulli(p) symbol, in bits, with 0 log 0 = 0."""
    if not 0.0 <= p <= 1.0:
        raise ParameterDomainError(f"probability must lie in [0, 1], got {p}")
    h = 0.0
    for q in (p, 1.0 - p):
        if q > 0.0:
            h -= q * math.log2(q)
    return h


def bit_fraction(stream):
    if stream.length < 1:
        raise EmptyInputError("bit_fraction of an empty stream")
    return stream.count_ones() / stream.length
