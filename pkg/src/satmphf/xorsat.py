"""XORSAT filter used as a 1-bit retrieval structure.

Each element is hashed to ``k_f`` slots; the stored bit is the parity of
those slots.  Building the filter means solving one XOR constraint per
element over GF(2).  Large item sets are split by hash into independent
sub-filters so that the dense elimination stays cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import BuildFailed, InvalidArgument, SingularSystem
from .hashing import FILTER_SPLIT_TAG, FILTER_TAG, MASK64, fingerprint, hash_index_fp, mix64, pack_keys

DEFAULT_K = 5
DEFAULT_OVERPROVISION = 1.02
BLOCK_CAPACITY = 4608


@dataclass(frozen=True)
class XorConstraint:
    positions: tuple[int, ...]  # 1-based slots
    rhs: int

    def holds(self, bits: Sequence[int]) -> bool:
        parity = 0
        for p in self.positions:
            parity ^= int(bits[p - 1])
        return parity == self.rhs


def _pack(position_rows: np.ndarray, nwords: int) -> np.ndarray:
    """Packed GF(2) rows from 0-based positions; repeated positions cancel."""
    nrows = position_rows.shape[0]
    packed = np.zeros((nrows, max(nwords, 1)), dtype=np.uint64)
    row_ids = np.arange(nrows)
    for j in range(position_rows.shape[1]):
        col = position_rows[:, j]
        np.bitwise_xor.at(packed, (row_ids, col >> 6),
                          np.left_shift(np.uint64(1), (col & 63).astype(np.uint64)))
    return packed


def _solve_positions(position_rows: np.ndarray, rhs: np.ndarray, s: int) -> np.ndarray | None:
    ok, x = _kernels.gf2_solve(_pack(position_rows, (s + 63) // 64), rhs.copy(), s)
    if not ok:
        return None
    parity = np.bitwise_xor.reduce(x[position_rows], axis=1)
    if not np.array_equal(parity, rhs):
        raise AssertionError("GF(2) elimination returned a non-solution")
    return x


def solve_gf2(constraints: Sequence[XorConstraint], s: int) -> list[int]:
    """Any solution of the system over s variables, free variables 0."""
    packed = np.zeros((len(constraints), max((s + 63) // 64, 1)), dtype=np.uint64)
    rhs = np.zeros(len(constraints), dtype=np.uint8)
    for r, c in enumerate(constraints):
        for p in c.positions:
            if not 1 <= p <= s:
                raise InvalidArgument(f"position {p} outside [1, {s}]")
            packed[r, (p - 1) >> 6] ^= np.uint64(1) << np.uint64((p - 1) & 63)
        rhs[r] = c.rhs & 1
    ok, x = _kernels.gf2_solve(packed, rhs, s)
    if not ok:
        raise SingularSystem("the XOR constraints are inconsistent")
    out = [int(b) for b in x]
    if not all(c.holds(out) for c in constraints):
        raise AssertionError("GF(2) elimination returned a non-solution")
    return out


@dataclass(frozen=True)
class FilterBlock:
    attempt: int
    slots: int
    bits: np.ndarray  # uint8 0/1, length ``slots``


def block_seed(seed: int, block: int, attempt: int) -> int:
    return ((seed ^ mix64(block)) + attempt) & MASK64


@dataclass(frozen=True)
class XorsatFilter:
    seed: int
    k_f: int
    item_count: int
    blocks: tuple[FilterBlock, ...]

    @property
    def s(self) -> int:
        return sum(b.slots for b in self.blocks)

    def locate(self, element: bytes) -> tuple[int, list[int]]:
        """Sub-filter and 0-based slots read for ``element``."""
        if not self.blocks:
            return 0, []
        fp = fingerprint(element)
        nb = len(self.blocks)
        b = hash_index_fp(fp, 1, nb, self.seed, FILTER_SPLIT_TAG) - 1 if nb > 1 else 0
        blk = self.blocks[b]
        if blk.slots == 0:
            return b, []
        bs = block_seed(self.seed, b, blk.attempt)
        return b, [hash_index_fp(fp, j, blk.slots, bs, FILTER_TAG) - 1 for j in range(1, self.k_f + 1)]

    def query(self, element: bytes) -> int:
        b, positions = self.locate(element)
        parity = 0
        if positions:
            bits = self.blocks[b].bits
            for p in positions:
                parity ^= int(bits[p])
        return parity


def query_filter(f: XorsatFilter, element: bytes) -> int:
    return f.query(element)


def build_filter(items: Sequence[tuple[bytes, int]], k_f: int = DEFAULT_K, seed: int = 0,
                 overprovision: float = DEFAULT_OVERPROVISION, max_reseeds: int = 8,
                 block_capacity: int = BLOCK_CAPACITY) -> XorsatFilter:
    if k_f < 1:
        raise InvalidArgument("k_f must be >= 1")
    if overprovision < 1.0:
        raise InvalidArgument("overprovision below 1 cannot store every item")
    elements = [e for e, _ in items]
    if len(set(elements)) != len(elements):
        raise InvalidArgument("filter elements must be distinct")
    count = len(items)
    seed &= MASK64
    if count == 0:
        return XorsatFilter(seed, k_f, 0, ())

    nb = math.ceil(count / block_capacity)
    buf, offsets = pack_keys(elements)
    fps = _kernels.fingerprints(buf, offsets)
    rhs = np.array([bit & 1 for _, bit in items], dtype=np.uint8)
    if nb > 1:
        which = _kernels.hash_table(fps, 1, nb, np.uint64(seed), np.uint64(FILTER_SPLIT_TAG))[:, 0] - 1
    else:
        which = np.zeros(count, dtype=np.int64)

    blocks = []
    for b in range(nb):
        members = np.flatnonzero(which == b)
        slots = math.ceil(round(overprovision * len(members), 9))
        if slots == 0:
            blocks.append(FilterBlock(0, 0, np.zeros(0, dtype=np.uint8)))
            continue
        for attempt in range(max_reseeds + 1):
            bs = block_seed(seed, b, attempt)
            pos = _kernels.hash_table(fps[members], k_f, slots, np.uint64(bs), np.uint64(FILTER_TAG)) - 1
            x = _solve_positions(pos, rhs[members], slots)
            if x is not None:
                blocks.append(FilterBlock(attempt, slots, x))
                break
        else:
            raise BuildFailed(f"sub-filter {b} stayed singular after {max_reseeds} reseeds")
    return XorsatFilter(seed, k_f, count, tuple(blocks))
