"""Weighted bipartite graph of keys vs. indices and its minimum-weight perfect matching."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import InvalidArgument, NoPerfectMatching
from .hashing import MATCHING_TAG, MASK64, pack_keys


def optimal_k(n: int) -> int:
    """Number of hash functions: max(3, ceil(ln n + ln ln n))."""
    if n < 1:
        raise InvalidArgument("n must be positive")
    if n <= 2:
        return 3
    return max(3, math.ceil(math.log(n) + math.log(math.log(n))))


@dataclass(frozen=True)
class WeightedBipartiteGraph:
    """Left = keys, right = indices; edges stored row-wise, 0-based columns.

    Absent edges cost ``sentinel`` = n*k + 1, which exceeds the weight of
    any perfect matching made of real edges.
    """

    n: int
    k: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray

    @property
    def sentinel(self) -> int:
        return self.n * self.k + 1

    @classmethod
    def from_hash_table(cls, table) -> "WeightedBipartiteGraph":
        """``table[y][i-1]`` = H_i(y) in 1..n; repeated targets keep the smallest i."""
        table = np.asarray(table, dtype=np.int64)
        n, k = table.shape
        indptr = np.zeros(n + 1, dtype=np.int64)
        indices, weights = [], []
        for y in range(n):
            seen = set()
            for i in range(k):
                r = int(table[y, i])
                if not 1 <= r <= n:
                    raise InvalidArgument(f"hash value {r} outside [1, {n}]")
                if r not in seen:
                    seen.add(r)
                    indices.append(r - 1)
                    weights.append(i + 1)
            indptr[y + 1] = len(indices)
        return cls(n, k, indptr, np.array(indices, dtype=np.int64), np.array(weights, dtype=np.int64))

    @classmethod
    def from_cost(cls, cost) -> "WeightedBipartiteGraph":
        """Every entry of a dense positive-integer matrix becomes an edge."""
        cost = np.asarray(cost, dtype=np.int64)
        n = cost.shape[0]
        if cost.shape != (n, n) or (n and cost.min() < 1):
            raise InvalidArgument("cost must be a square matrix of positive integers")
        k = int(cost.max()) if n else 1
        indptr = np.arange(0, n * n + 1, n, dtype=np.int64)
        indices = np.tile(np.arange(n, dtype=np.int64), n)
        return cls(n, k, indptr, indices, cost.reshape(-1).copy())

    @property
    def cost(self) -> np.ndarray:
        dense = np.full((self.n, self.n), self.sentinel, dtype=np.int64)
        for y in range(self.n):
            s, e = self.indptr[y], self.indptr[y + 1]
            dense[y, self.indices[s:e]] = self.weights[s:e]
        return dense

    def row_edges(self, y: int) -> dict[int, int]:
        """1-based index -> weight for left node ``y`` (0-based)."""
        s, e = self.indptr[y], self.indptr[y + 1]
        return {int(c) + 1: int(w) for c, w in zip(self.indices[s:e], self.weights[s:e])}


@dataclass(frozen=True)
class Matching:
    columns: tuple[int, ...]  # 1-based right node per key
    weights: tuple[int, ...]  # hash index used per key

    @property
    def total_weight(self) -> int:
        return sum(self.weights)


def hash_table(keys: Sequence[bytes], k: int, seed: int, range_: int | None = None) -> np.ndarray:
    """H_1..H_k over ``keys`` with range n (or ``range_``), as an (n, k) array."""
    n = len(keys)
    buf, offsets = pack_keys(keys)
    fps = _kernels.fingerprints(buf, offsets)
    return _kernels.hash_table(fps, k, range_ or n, np.uint64(seed & MASK64), np.uint64(MATCHING_TAG))


def build_graph(keys: Sequence[bytes], k: int, seed: int) -> WeightedBipartiteGraph:
    return WeightedBipartiteGraph.from_hash_table(hash_table(keys, k, seed))


def min_weight_perfect_matching(g: WeightedBipartiteGraph) -> Matching:
    """Exact minimum-weight perfect matching; raises NoPerfectMatching if it needs a non-edge."""
    if g.n == 0:
        return Matching((), ())
    cols = _kernels.hungarian(g.n, g.indptr, g.indices, g.weights, g.sentinel)
    columns, weights = [], []
    for y in range(g.n):
        c = int(cols[y])
        s, e = g.indptr[y], g.indptr[y + 1]
        hit = np.flatnonzero(g.indices[s:e] == c)
        if hit.size == 0:
            raise NoPerfectMatching(f"key {y} cannot be matched by any of its {g.k} hashes")
        columns.append(c + 1)
        weights.append(int(g.weights[s + hit[0]]))
    return Matching(tuple(columns), tuple(weights))
