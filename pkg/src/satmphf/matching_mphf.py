"""Minimal perfect hashing by storing a minimum-weight matching in an XORSAT filter.

Each key is matched to one of its k candidate indices H_1(y)..H_k(y).  If
the matching picked H_i(y), the filter stores (i, y) -> 1 and
(j, y) -> 0 for every j < i, so a query probes i = 1, 2, ... until it reads
a 1.  The filter holds exactly as many bits (before overprovisioning) as
the matching weighs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import BuildFailed, CorruptStructure, InvalidArgument, NoPerfectMatching
from .hashing import (FILTER_SPLIT_TAG, FILTER_TAG, MASK64, MATCHING_TAG, SHARD_TAG,
                      hash_index, mix64, pack_keys)
from .matching import Matching, build_graph, min_weight_perfect_matching, optimal_k
from .xorsat import DEFAULT_K, DEFAULT_OVERPROVISION, XorsatFilter, block_seed, build_filter

DEFAULT_BLOCK_SIZE = 1 << 13


def tuple_bytes(i: int, key: bytes) -> bytes:
    return bytes((i,)) + key


def matching_to_tuples(m: Matching, keys: Sequence[bytes]) -> list[tuple[bytes, int]]:
    out = []
    for key, i in zip(keys, m.weights):
        for j in range(1, i):
            out.append((tuple_bytes(j, key), 0))
        out.append((tuple_bytes(i, key), 1))
    return out


@dataclass(frozen=True)
class MatchingMphf:
    seed: int
    n: int
    k: int
    filter: XorsatFilter

    @property
    def tuple_count(self) -> int:
        return self.filter.item_count

    def hash_value(self, key: bytes, i: int) -> int:
        return hash_index(key, i, self.n, self.seed, MATCHING_TAG)

    def probe_trace(self, key: bytes) -> list[int]:
        """Filter answers for (1, key), (2, key), ... up to the first 1."""
        trace = []
        for i in range(1, self.k + 1):
            bit = self.filter.query(tuple_bytes(i, key))
            trace.append(bit)
            if bit:
                return trace
        raise CorruptStructure(f"no probe of {key!r} returned 1 within {self.k} tries")

    def query(self, key: bytes) -> int:
        if self.n == 1:
            return 1
        return self.hash_value(key, len(self.probe_trace(key)))


def query_matching_mphf(h: MatchingMphf, key: bytes) -> int:
    """Index in [1, n] of a member key.  Foreign keys get an arbitrary index or CorruptStructure."""
    return h.query(key)


def _check_bijection(indices: Sequence[int], n: int) -> bool:
    seen = bytearray(n + 1)
    for v in indices:
        if not 1 <= v <= n or seen[v]:
            return False
        seen[v] = 1
    return True


def build_matching_mphf(keys: Sequence[bytes], seed: int = 0, max_reseeds: int = 16,
                        k_f: int = DEFAULT_K, overprovision: float = DEFAULT_OVERPROVISION) -> MatchingMphf:
    n = len(keys)
    if n < 1:
        raise InvalidArgument("need at least one key")
    if len(set(keys)) != n:
        raise InvalidArgument("keys must be distinct")
    seed &= MASK64
    if n == 1:
        return MatchingMphf(seed, 1, optimal_k(1), build_filter([], k_f, seed))
    k = optimal_k(n)
    for attempt in range(max_reseeds + 1):
        s = (seed + attempt) & MASK64
        try:
            m = min_weight_perfect_matching(build_graph(keys, k, s))
        except NoPerfectMatching:
            continue
        f = build_filter(matching_to_tuples(m, keys), k_f, s, overprovision, max_reseeds)
        h = MatchingMphf(s, n, k, f)
        if not _check_bijection(query_batch(h, keys), n):
            raise BuildFailed("built structure is not a bijection")
        return h
    raise BuildFailed(f"no perfect matching after {max_reseeds} reseeds")


def verify_bijection(h, keys: Sequence[bytes]) -> bool:
    """Scalar-path check that the keys map onto exactly [1, n]."""
    if len(keys) != h.n:
        return False
    try:
        return _check_bijection([h.query(key) for key in keys], h.n)
    except CorruptStructure:
        return False


def _filter_arrays(f: XorsatFilter):
    nb = len(f.blocks)
    slots = np.array([b.slots for b in f.blocks] or [0], dtype=np.int64)
    seeds = np.array([block_seed(f.seed, i, b.attempt) for i, b in enumerate(f.blocks)] or [0],
                     dtype=np.uint64)
    start = np.zeros(len(slots), dtype=np.int64)
    start[1:] = np.cumsum(slots)[:-1]
    bits = np.concatenate([b.bits for b in f.blocks]) if nb else np.zeros(1, np.uint8)
    return nb, slots, seeds, start, bits


def query_batch(h: MatchingMphf, keys: Sequence[bytes]) -> np.ndarray:
    """Compiled probe-until-1 over many keys; -1 marks a key whose probes never fired."""
    if h.n == 1:
        return np.ones(len(keys), dtype=np.int64)
    buf, offsets = pack_keys(keys)
    nb, slots, seeds, start, bits = _filter_arrays(h.filter)
    return _kernels.matching_query_batch(
        buf, offsets, h.n, h.k, np.uint64(h.seed), np.uint64(MATCHING_TAG),
        max(nb, 1), np.uint64(h.filter.seed), np.uint64(FILTER_SPLIT_TAG), seeds, slots,
        start, bits, h.filter.k_f, np.uint64(FILTER_TAG))


@dataclass(frozen=True)
class ShardedMphf:
    seed: int
    blocks: tuple[MatchingMphf, ...]
    offsets: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.offsets[-1]

    def block_of(self, key: bytes) -> int:
        return hash_index(key, 1, len(self.blocks), self.seed, SHARD_TAG) - 1

    def query(self, key: bytes) -> int:
        b = self.block_of(key)
        return self.offsets[b] + self.blocks[b].query(key)


def shard_seed(seed: int, block: int) -> int:
    return (seed ^ mix64(block + 1)) & MASK64


def build_sharded(keys: Sequence[bytes], target_block_size: int = DEFAULT_BLOCK_SIZE, seed: int = 0,
                  max_reseeds: int = 16, k_f: int = DEFAULT_K,
                  overprovision: float = DEFAULT_OVERPROVISION) -> ShardedMphf:
    if target_block_size < 64:
        raise InvalidArgument("target_block_size must be at least 64")
    n = len(keys)
    if n < 1:
        raise InvalidArgument("need at least one key")
    seed &= MASK64
    nb = math.ceil(n / target_block_size)
    buckets: list[list[bytes]] = [[] for _ in range(nb)]
    if nb == 1:
        buckets[0] = list(keys)
    else:
        for key in keys:
            buckets[hash_index(key, 1, nb, seed, SHARD_TAG) - 1].append(key)
    blocks = []
    offsets = [0]
    for b, bucket in enumerate(buckets):
        if not bucket:
            raise BuildFailed(f"shard {b} received no keys; use a larger block size")
        blocks.append(build_matching_mphf(bucket, shard_seed(seed, b), max_reseeds, k_f, overprovision))
        offsets.append(offsets[-1] + len(bucket))
    return ShardedMphf(seed, tuple(blocks), tuple(offsets))


def sharded_query_batch(h: ShardedMphf, keys: Sequence[bytes]) -> np.ndarray:
    if len(h.blocks) == 1:
        return query_batch(h.blocks[0], keys) + h.offsets[0]
    which = np.array([h.block_of(k) for k in keys], dtype=np.int64)
    out = np.empty(len(keys), dtype=np.int64)
    for b, blk in enumerate(h.blocks):
        idx = np.flatnonzero(which == b)
        if idx.size:
            out[idx] = query_batch(blk, [keys[i] for i in idx]) + h.offsets[b]
    return out


def bits_per_key(h, include_headers: bool = True) -> float:
    """Serialized bits per key; without headers only filter slots are counted."""
    if include_headers:
        from .container import payload_bits
        return payload_bits(h) / h.n
    if isinstance(h, ShardedMphf):
        return sum(b.filter.s for b in h.blocks) / h.n
    return h.filter.s / h.n
