"""On-disk caching of sieve outputs.

File format: a 16-byte little-endian header ``magic(4s) kind(u8) version(u8)
x(u64) crc(u16)`` followed by the table as little-endian u64 words.  The crc
is crc32 of the payload truncated to 16 bits; any mismatch (or a version or
bound mismatch) makes the loader report a miss so callers rebuild.
"""

from __future__ import annotations

import struct
import sys
import zlib
from pathlib import Path
from typing import Optional

import numpy as np

MAGIC = b"RKST"
VERSION = 1
KIND_PRIMES = 1
KIND_SPF = 2

_HEADER = struct.Struct("<4sBBQH")
assert _HEADER.size == 16


def _path(cache_dir: Path, kind: int, x: int) -> Path:
    name = {KIND_PRIMES: "primes", KIND_SPF: "spf"}[kind]
    return Path(cache_dir) / f"{name}-{x}.tbl"


def store(cache_dir, kind: int, x: int, table: np.ndarray) -> Optional[Path]:
    """Write a table; returns the path, or None if the directory is unusable."""
    try:
        cache_dir = Path(cache_dir)
        cache_dir.mkdir(parents=True, exist_ok=True)
        payload = np.ascontiguousarray(table, dtype="<u8").tobytes()
        crc = zlib.crc32(payload) & 0xFFFF
        path = _path(cache_dir, kind, x)
        tmp = path.with_suffix(".tmp")
        with open(tmp, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, kind, VERSION, x, crc))
            fh.write(payload)
        tmp.replace(path)
        return path
    except OSError as exc:
        print(f"warning: cache store failed ({exc}); continuing without cache",
              file=sys.stderr)
        return None


def load(cache_dir, kind: int, x: int) -> Optional[np.ndarray]:
    """Read a table back; None on miss, mismatch, or corruption."""
    path = _path(Path(cache_dir), kind, x)
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError:
        return None
    if len(raw) < _HEADER.size:
        return None
    magic, got_kind, version, got_x, crc = _HEADER.unpack_from(raw)
    if magic != MAGIC or got_kind != kind or version != VERSION or got_x != x:
        return None
    payload = raw[_HEADER.size :]
    if zlib.crc32(payload) & 0xFFFF != crc or len(payload) % 8:
        return None
    return np.frombuffer(payload, dtype="<u8").astype(np.int64)
