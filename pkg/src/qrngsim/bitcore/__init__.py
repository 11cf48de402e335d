"""Packed bit streams, the seeded generator, and shared numeric helpers."""

from .io import BitFileError, meta_path, read_bits, write_bits
from .rng import RngEngine, rng_new, sample_poisson
from .stream import BitStream, StreamMeta, binary_entropy, bit_fraction, pack, unpack

__all__ = [
    "BitFileError", "BitStream", "RngEngine", "StreamMeta", "binary_entropy",
    "bit_fraction", "meta_path", "pack", "read_bits", "rng_new", "sample_poisson",
    "unpack", "write_bits",
]
