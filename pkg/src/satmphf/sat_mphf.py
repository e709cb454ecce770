"""Near-optimal MPHF stored as a satisfying assignment of an all-different formula."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .encoding import canonical_index, decode_raw, encode_compact, encode_cubic
from .errors import BuildFailed, InvalidArgument, SolveTimeout, UnsatExhausted
from .hashing import MASK64, LiteralTable, bits_for, derive_literal_table, fingerprint, literal_row
from .solver import SolverConfig, Status, solve

ENCODINGS = {"cubic": encode_cubic, "compact": encode_compact}


def alpha(n: int) -> float:
    """Information-theoretic bits per key for an MPHF on n keys: log2(n^n / n!) / n."""
    if n < 1:
        raise InvalidArgument("n must be positive")
    return (n * math.log(n) - math.lgamma(n + 1)) / (n * math.log(2))


def decode_row(row: Sequence[int], bits: Sequence[int], n: int, k: int) -> int:
    raw = decode_raw(row, lambda v: bool(bits[v - 1]))
    return canonical_index(raw, n, k)


@dataclass(frozen=True)
class SatMphf:
    seed: int
    n: int
    m: int
    k: int
    encoding: str
    bits: tuple[int, ...]

    def row(self, key: bytes) -> tuple[int, ...]:
        return literal_row(fingerprint(key), self.k, self.m, self.seed)

    def query(self, key: bytes) -> int:
        return decode_row(self.row(key), self.bits, self.n, self.k)

    @property
    def bits_per_key(self) -> float:
        return self.m / self.n


def query_sat_mphf(h: SatMphf, key: bytes) -> int:
    """Index in [1, n]; keys outside the build set get an arbitrary index."""
    return h.query(key)


def verify_bijection(h, keys: Sequence[bytes]) -> bool:
    if len(keys) != h.n:
        return False
    got = sorted(h.query(key) for key in keys)
    return got == list(range(1, h.n + 1))


def solve_table(table: LiteralTable, encoding: str = "cubic",
                solver: SolverConfig | None = None) -> tuple[int, ...] | None:
    """Storage bits x_1..x_m making the table's rows distinct, or None when UNSAT."""
    try:
        encode = ENCODINGS[encoding]
    except KeyError:
        raise InvalidArgument(f"unknown encoding {encoding!r}") from None
    res = solve(encode(table), solver)
    if res.status is Status.TIMEOUT:
        raise SolveTimeout(f"solver gave up on n={table.n}, m={table.m}")
    if res.status is Status.UNSAT:
        return None
    return tuple(int(b) for b in res.assignment[:table.m])


def build_sat_mphf(keys: Sequence[bytes], m: int, seed: int = 0, encoding: str = "cubic",
                   solver: SolverConfig | None = None, max_reseeds: int = 16) -> SatMphf:
    n = len(keys)
    if n < 2:
        raise InvalidArgument("need at least two keys")
    if len(set(keys)) != n:
        raise InvalidArgument("keys must be distinct")
    k = bits_for(n)
    if m < k:
        raise InvalidArgument(f"m={m} is smaller than k={k}")
    seed &= MASK64
    for attempt in range(max_reseeds + 1):
        s = (seed + attempt) & MASK64
        bits = solve_table(derive_literal_table(keys, m, s), encoding, solver)
        if bits is None:
            continue
        h = SatMphf(s, n, m, k, encoding, bits)
        if not verify_bijection(h, keys):
            raise BuildFailed("solver model does not decode to a bijection")
        return h
    raise UnsatExhausted(f"UNSAT for {max_reseeds + 1} seeds at m={m}; try more bits")


def variable_coverage(keys: Sequence[bytes], m: int, seed: int) -> float:
    """Fraction of x_1..x_m that appear in the derived literal table."""
    return len(derive_literal_table(keys, m, seed).variables_used()) / m

