"""Seeded hash family shared by every construction in the package.

All functions are pure: the output depends only on the key bytes, the
hash index, the range, the seed and a domain tag.  Each consumer uses its
own tag so that one seed can drive a whole build without the stages
becoming correlated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidArgument

MASK64 = (1 << 64) - 1

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def _tag(name: bytes) -> int:
    return int.from_bytes(name.ljust(8, b"\0")[:8], "big")


# domain tags
LITERAL_TAG = _tag(b"LITERAL")
MATCHING_TAG = _tag(b"MATCHING")
FILTER_TAG = _tag(b"XORSLOT")
FILTER_SPLIT_TAG = _tag(b"XORSPLIT")
SHARD_TAG = _tag(b"SHARD")


def fingerprint(key: bytes) -> int:
    """64-bit FNV-1a of ``key``."""
    h = FNV_OFFSET
    for b in key:
        h = ((h ^ b) * FNV_PRIME) & MASK64
    return h


def mix64(z: int) -> int:
    z &= MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & MASK64
    z ^= z >> 31
    return z


def mulhi64(a: int, b: int) -> int:
    return ((a & MASK64) * (b & MASK64)) >> 64


def mixed(fp: int, i: int, seed: int, tweak: int) -> int:
    """The full 64-bit mixed word behind :func:`hash_index`."""
    return mix64((seed & MASK64) ^ mix64((i ^ tweak) & MASK64) ^ fp)


def hash_index_fp(fp: int, i: int, range_: int, seed: int, tweak: int) -> int:
    """Like :func:`hash_index` but takes a precomputed fingerprint."""
    return 1 + mulhi64(mixed(fp, i, seed, tweak), range_)


def hash_index(key: bytes, i: int, range_: int, seed: int, tweak: int) -> int:
    """Return the ``i``-th member of the family applied to ``key``, in [1, range_]."""
    if range_ < 1:
        raise InvalidArgument(f"hash range must be >= 1, got {range_}")
    if i < 1:
        raise InvalidArgument(f"hash index must be >= 1, got {i}")
    return hash_index_fp(fingerprint(key), i, range_, seed, tweak)


def bits_for(n: int) -> int:
    """k = ceil(log2 n), the index width of an n-key SAT construction."""
    if n < 2:
        return 0
    return (n - 1).bit_length()


@dataclass(frozen=True)
class LiteralTable:
    """Per-key rows of signed variable ids; row p is read MSB first."""

    n: int
    k: int
    m: int
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.rows) != self.n:
            raise InvalidArgument("row count does not match n")
        for row in self.rows:
            if len(row) != self.k:
                raise InvalidArgument("row length does not match k")
            vs = [abs(l) for l in row]
            if 0 in vs or max(vs, default=0) > self.m:
                raise InvalidArgument(f"literal out of range in row {row}")
            if len(set(vs)) != len(vs):
                raise InvalidArgument(f"row {row} repeats a variable")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], m: int) -> "LiteralTable":
        rows = tuple(tuple(r) for r in rows)
        return cls(n=len(rows), k=len(rows[0]) if rows else 0, m=m, rows=rows)

    def variables_used(self) -> set[int]:
        return {abs(l) for row in self.rows for l in row}


# Attempt counters live above the bits any hash index can occupy.
_ATTEMPT_SHIFT = 32


def literal_row(fp: int, k: int, m: int, seed: int) -> tuple[int, ...]:
    """Signed literals L_1..L_k for one key, with distinct variables."""
    row: list[int] = []
    used: set[int] = set()
    for i in range(1, k + 1):
        attempt = 0
        while True:
            z = mixed(fp, i, seed, LITERAL_TAG ^ (attempt << _ATTEMPT_SHIFT))
            var = 1 + mulhi64((z << 1) & MASK64, m)
            if var not in used:
                break
            attempt += 1
        used.add(var)
        row.append(-var if z >> 63 else var)
    return tuple(row)


def derive_literal_table(keys: Sequence[bytes], m: int, seed: int) -> LiteralTable:
    n = len(keys)
    if n < 2:
        raise InvalidArgument("a literal table needs at least two keys")
    k = bits_for(n)
    if m < k:
        raise InvalidArgument(f"m={m} is smaller than k={k}")
    rows = tuple(literal_row(fingerprint(key), k, m, seed) for key in keys)
    return LiteralTable(n=n, k=k, m=m, rows=rows)


def pack_keys(keys: Sequence[bytes]) -> tuple[np.ndarray, np.ndarray]:
    """Concatenate keys into one uint8 buffer plus n+1 offsets."""
    offsets = np.zeros(len(keys) + 1, dtype=np.int64)
    if keys:
        offsets[1:] = np.cumsum([len(k) for k in keys])
    buf = np.frombuffer(b"".join(keys), dtype=np.uint8)
    if buf.size == 0:
        buf = np.zeros(1, dtype=np.uint8)
    return buf, offsets
