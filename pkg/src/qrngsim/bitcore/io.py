"""On-disk formats: packed ``.bits`` files with a JSON sidecar, and ASCII."""

import json
from pathlib import Path

import numpy as np

from .stream import BitStream, StreamMeta


class BitFileError(ValueError):
    """The bit file or its sidecar is missing, unreadable, or inconsistent."""


def meta_path(path):
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def write_bits(stream, path, fmt="packed"):
    path = Path(path)
    if fmt == "packed":
        path.write_bytes(stream.data.tobytes())
    elif fmt == "ascii":
        path.write_text(stream.to_string() + "\n", encoding="ascii")
    else:
        raise ValueError(f"unknown bit format {fmt!r}")
    meta = {
        "length_bits": stream.length,
        "origin": stream.meta.origin,
        "one_fraction": stream.meta.one_fraction,
        "format": fmt,
    }
    meta_path(path).write_text(json.dumps(meta, indent=2) + "\n")


def read_bits(path, fmt=None):
    """Load a bit file.

    Without a sidecar, a packed file is taken to hold ``8 * bytes`` bits.  The
    format is taken from ``fmt``, then the sidecar, then defaults to packed.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise BitFileError(f"cannot read {path}: {exc.strerror}") from exc

    meta = {}
    mpath = meta_path(path)
    if mpath.exists():
        try:
            meta = json.loads(mpath.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise BitFileError(f"corrupt metadata {mpath}: {exc}") from exc
        if not isinstance(meta, dict):
            raise BitFileError(f"corrupt metadata {mpath}: expected a JSON object")
    fmt = fmt or meta.get("format", "packed")

    if fmt == "ascii":
        try:
            stream = BitStream.from_string(raw.decode("ascii"), origin="file")
        except (UnicodeDecodeError, ValueError) as exc:
            raise BitFileError(f"{path} is not an ASCII 0/1 file") from exc
        data, length = stream.data, stream.length
    elif fmt == "packed":
        data = np.frombuffer(raw, dtype=np.uint8)
        length = data.size * 8
    else:
        raise BitFileError(f"unknown bit format {fmt!r}")

    declared = meta.get("length_bits", length)
    if not isinstance(declared, int) or isinstance(declared, bool) or declared < 0:
        raise BitFileError(f"{mpath}: length_bits must be a nonnegative integer")
    if fmt == "packed" and (declared + 7) // 8 != data.size:
        raise BitFileError(
            f"length mismatch: metadata says {declared} bits, {path} holds {data.size} bytes")
    if fmt == "ascii" and declared != length:
        raise BitFileError(f"length mismatch: metadata says {declared} bits, file has {length}")

    stream = BitStream(data, declared, StreamMeta(origin="file"))
    ones = stream.count_ones()
    frac = ones / declared if declared else None
    return BitStream(stream.data, declared, StreamMeta(meta.get("origin", "file"), frac))
