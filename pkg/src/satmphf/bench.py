"""Desk-scale measurement harnesses with CSV output."""

from __future__ import annotations

import csv
import io
import statistics
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgument, NoPerfectMatching
from .hashing import MASK64, derive_literal_table
from .matching import build_graph, min_weight_perfect_matching, optimal_k
from .matching_mphf import MatchingMphf, ShardedMphf, query_batch, sharded_query_batch
from .sat_mphf import ENCODINGS
from .solver import SolverConfig, Status, solve

KEY_BYTES = 16
PHASE_HEADER = ("n", "m", "bpk", "trials", "sat", "unsat", "timeout", "mean_seconds")
WEIGHT_HEADER = ("n", "trials", "mean_weight_per_key")
SCALING_HEADER = ("n", "trials", "median_seconds")
QUERY_HEADER = ("n", "queries", "ns_per_query")


def random_keys(rng: np.random.Generator, n: int, size: int = KEY_BYTES) -> list[bytes]:
    """n distinct random keys of ``size`` bytes."""
    keys: set[bytes] = set()
    while len(keys) < n:
        keys.update(bytes(r) for r in rng.integers(0, 256, (n - len(keys), size), dtype=np.uint8))
    return sorted(keys)


def _seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 1 << 63)) & MASK64


@dataclass(frozen=True)
class PhaseRow:
    n: int
    m: int
    trials: int
    sat: int
    timeout: int
    mean_seconds: float

    @property
    def unsat(self) -> int:
        return self.trials - self.sat - self.timeout

    @property
    def bits_per_key(self) -> float:
        return self.m / self.n

    @property
    def sat_fraction(self) -> float:
        return self.sat / self.trials

    def csv_row(self) -> tuple:
        return (self.n, self.m, f"{self.bits_per_key:.4f}", self.trials, self.sat, self.unsat,
                self.timeout, f"{self.mean_seconds:.6f}")


def phase_experiment(n_list: Iterable[int], bpk_grid: Iterable[float], trials: int,
                     solver: SolverConfig | None = None, time_limit: float | None = None,
                     encoding: str = "cubic", seed0: int = 0) -> list[PhaseRow]:
    if trials < 1:
        raise InvalidArgument("trials must be >= 1")
    solver = solver or SolverConfig()
    if time_limit is not None:
        solver = SolverConfig(solver.engine, solver.command, time_limit, solver.seed)
    encode = ENCODINGS[encoding]
    rows = []
    bpk_grid = list(bpk_grid)
    for n in n_list:
        ms = sorted({max(1, (n - 1).bit_length(), round(b * n)) for b in bpk_grid})
        for m in ms:
            rng = np.random.default_rng([seed0, n, m])
            sat = timeout = 0
            spent = 0.0
            for _ in range(trials):
                table = derive_literal_table(random_keys(rng, n), m, _seed(rng))
                res = solve(encode(table), solver)
                spent += res.seconds
                sat += res.status is Status.SAT
                timeout += res.status is Status.TIMEOUT
            rows.append(PhaseRow(n, m, trials, sat, timeout, spent / trials))
    return rows


def weight_experiment(n_list: Iterable[int], trials: int, seed0: int = 0) -> dict[int, float]:
    """Mean minimum matching weight divided by n.  Graphs without a perfect matching are redrawn."""
    out = {}
    for n in n_list:
        rng = np.random.default_rng([seed0, n])
        k = optimal_k(n)
        weights = []
        while len(weights) < trials:
            try:
                m = min_weight_perfect_matching(build_graph(random_keys(rng, n), k, _seed(rng)))
            except NoPerfectMatching:
                continue
            weights.append(m.total_weight / n)
        out[n] = statistics.fmean(weights)
    return out


def hungarian_scaling(n_list: Iterable[int], trials: int, seed0: int = 0) -> dict[int, float]:
    """Median wall time of the matching step alone, per n."""
    if trials < 1:
        raise InvalidArgument("trials must be >= 1")
    _warm_up(np.random.default_rng(seed0))
    out = {}
    for n in n_list:
        rng = np.random.default_rng([seed0, n])
        k = optimal_k(n)
        times = []
        for _ in range(trials):
            g = build_graph(random_keys(rng, n), k, _seed(rng))
            t0 = time.perf_counter()
            try:
                min_weight_perfect_matching(g)
            except NoPerfectMatching:
                pass
            times.append(time.perf_counter() - t0)
        out[n] = statistics.median(times)
    return out


def _warm_up(rng: np.random.Generator) -> None:
    # first call compiles the kernels; keep that out of the timings
    for _ in range(4):
        try:
            min_weight_perfect_matching(build_graph(random_keys(rng, 16), 4, _seed(rng)))
            return
        except NoPerfectMatching:
            continue


def query_throughput(h, keys: Sequence[bytes], num_queries: int, seed0: int = 0) -> float:
    """Nanoseconds per query over member keys sampled uniformly with replacement."""
    if num_queries < 1:
        raise InvalidArgument("num_queries must be >= 1")
    if not keys:
        raise InvalidArgument("need member keys to sample from")
    rng = np.random.default_rng(seed0)
    sample = [keys[i] for i in rng.integers(0, len(keys), num_queries)]
    if isinstance(h, MatchingMphf):
        run = lambda: query_batch(h, sample)
    elif isinstance(h, ShardedMphf):
        run = lambda: sharded_query_batch(h, sample)
    else:
        def run():
            q = h.query
            for key in sample:
                q(key)
    if isinstance(h, MatchingMphf):
        query_batch(h, sample[:64])  # compile outside the timed region
    elif isinstance(h, ShardedMphf):
        sharded_query_batch(h, sample[:64])
    t0 = time.perf_counter()
    run()
    return (time.perf_counter() - t0) * 1e9 / num_queries


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def phase_csv(rows: Sequence[PhaseRow]) -> str:
    return to_csv(PHASE_HEADER, (r.csv_row() for r in rows))
