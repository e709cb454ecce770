"""The twelve acceptance criteria, each at its stated tolerance.

Every test appends one PASS/FAIL line to a summary printed at the end of
the pytest run (and prints it directly when run with -s).
"""

import math
import random
import time

import numpy as np

from satmphf import container
from satmphf.bench import hungarian_scaling, phase_experiment, random_keys, weight_experiment
from satmphf.encoding import decode_raw, encode_compact, encode_cubic
from satmphf.errors import SingularSystem
from satmphf.hashing import LiteralTable
from satmphf.matching import WeightedBipartiteGraph, min_weight_perfect_matching
from satmphf.matching_mphf import (bits_per_key, build_matching_mphf, build_sharded,
                                   matching_to_tuples, verify_bijection)
from satmphf.sat_mphf import alpha, build_sat_mphf
from satmphf.sat_mphf import verify_bijection as sat_verify
from satmphf.solver import ORACLE_MAX_VARS, solve_builtin, solve_oracle, solve_projected
from satmphf.xorsat import XorConstraint, solve_gf2

from conftest import ACCEPTANCE_LINES
from gf2_oracle import consistent
from test_encoding import random_table, with_units
from test_matching_mphf import FIVE_KEY_TUPLES, five_key_structure
from test_sat_mphf import FOUR_KEYS, InjectedSat
from worked_examples import (FIVE_KEY_BITS, FIVE_KEY_FILTER, FIVE_KEY_HASHES, FIVE_KEYS,
                             FOUR_KEY_INDICES, FOUR_KEY_ROWS, FOUR_KEY_STORAGE)


def report(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_four_key_golden():
    t0 = time.perf_counter()
    table = LiteralTable.from_rows(FOUR_KEY_ROWS, 6)
    cubic, compact = encode_cubic(table), encode_compact(table)
    storage = [bool(b) for b in FOUR_KEY_STORAGE]
    both_sat = solve_builtin(cubic).sat and solve_builtin(compact).sat
    storage_ok = cubic.satisfied_by(storage) and solve_builtin(with_units(compact, FOUR_KEY_STORAGE)).sat
    h = InjectedSat(0, 4, 6, 2, "cubic", FOUR_KEY_STORAGE, rows=FOUR_KEY_ROWS, keys=FOUR_KEYS)
    indices = tuple(h.query(y) for y in FOUR_KEYS)
    raw = tuple(decode_raw(r, lambda v: storage[v - 1]) for r in FOUR_KEY_ROWS)
    elapsed = time.perf_counter() - t0
    ok = both_sat and storage_ok and indices == raw == FOUR_KEY_INDICES and elapsed < 1
    report(1, ok, f"both SAT={both_sat}, storage satisfies both={storage_ok}, "
                  f"indices={indices}, {elapsed:.3f}s")


def test_criterion_02_five_key_golden():
    t0 = time.perf_counter()
    m = min_weight_perfect_matching(WeightedBipartiteGraph.from_hash_table(FIVE_KEY_HASHES))
    tuples = matching_to_tuples(m, FIVE_KEYS)
    cons = [XorConstraint(pos, rhs) for pos, rhs in FIVE_KEY_FILTER.values()]
    system_ok = all(c.holds(FIVE_KEY_BITS) for c in cons)
    h = five_key_structure()
    trace, idx = h.probe_trace(b"y3"), h.query(b"y3")
    elapsed = time.perf_counter() - t0
    ok = (m.total_weight == 8 and tuples == FIVE_KEY_TUPLES and system_ok
          and trace == [0, 0, 1] and idx == 4 and elapsed < 1)
    report(2, ok, f"weight={m.total_weight}, tuples match={tuples == FIVE_KEY_TUPLES}, "
                  f"bits satisfy={system_ok}, probes={trace}, index={idx}, {elapsed:.3f}s")


def test_criterion_03_alpha_table():
    table = {10: 1.143, 20: 1.268, 30: 1.317, 40: 1.343, 100: 1.396, 1000: 1.436, 10000: 1.442}
    worst = max(abs(alpha(n) - want) for n, want in table.items())
    report(3, worst <= 0.001, f"max |alpha(n) - table| = {worst:.5f}")


def _oracle_status(f, base_vars):
    if f.num_vars <= ORACLE_MAX_VARS:
        return solve_oracle(f)
    return solve_projected(f, base_vars)


def test_criterion_04_oracle_equivalence():
    rng = random.Random(4)
    disagreements = bad_models = 0
    trials = 500
    for _ in range(trials):
        n = rng.randint(2, 6)
        m = rng.randint((n - 1).bit_length(), 10)
        t = random_table(rng, n, m)
        for f in (encode_cubic(t), encode_compact(t)):
            b = solve_builtin(f)
            o = _oracle_status(f, m)
            disagreements += b.status is not o.status
            for r in (b, o):
                if r.sat and not f.satisfied_by(r.assignment):
                    bad_models += 1
    report(4, disagreements == 0 and bad_models == 0,
           f"{trials} tables x 2 encodings: {disagreements} disagreements, {bad_models} bad models")


def test_criterion_05_equisatisfiability():
    rng = random.Random(5)
    disagreements = sat = 0
    trials = 200
    for _ in range(trials):
        n = rng.randint(2, 8)
        m = rng.randint((n - 1).bit_length(), 12)
        t = random_table(rng, n, m)
        a, b = solve_builtin(encode_compact(t)).sat, solve_builtin(encode_cubic(t)).sat
        disagreements += a != b
        sat += b
    report(5, disagreements == 0, f"{trials} tables ({sat} SAT): {disagreements} disagreements")


def test_criterion_06_bijection():
    rng = random.Random(6)
    sat_fail = 0
    for t in range(100):
        n = rng.randint(2, 16)
        keys = [b"%d:%d" % (t, i) for i in range(n)]
        h = build_sat_mphf(keys, math.ceil(1.6 * n), rng.randrange(1 << 32))
        sat_fail += not sat_verify(h, keys)
    match_fail = 0
    sizes = [1 << (8 + i % 7) for i in range(20)]
    for i, n in enumerate(sizes):
        keys = random_keys(np.random.default_rng([6, i]), n)
        match_fail += not verify_bijection(build_matching_mphf(keys, seed=i), keys)
    report(6, sat_fail == 0 and match_fail == 0,
           f"100 SAT builds: {sat_fail} failures; 20 matching builds (2^8..2^14): {match_fail} failures")


def test_criterion_07_phase_transition():
    t0 = time.perf_counter()
    grid = [1.0 + 0.1 * i for i in range(11)]
    rows = phase_experiment([10], grid, 200, seed0=7)
    elapsed = time.perf_counter() - t0
    p = [r.sat_fraction for r in rows]
    T = 200
    monotone = all(
        p[j] >= p[i] - 3 * math.sqrt((p[i] * (1 - p[i]) + p[j] * (1 - p[j])) / T)
        for i in range(len(p)) for j in range(i + 1, len(p)))
    crossing = None
    for i in range(1, len(p)):
        if p[i - 1] < 0.5 <= p[i]:
            b0, b1 = rows[i - 1].bits_per_key, rows[i].bits_per_key
            crossing = b0 + (0.5 - p[i - 1]) * (b1 - b0) / (p[i] - p[i - 1])
            break
    if crossing is None and p[0] >= 0.5:
        crossing = rows[0].bits_per_key
    ok = monotone and crossing is not None and 1.0 <= crossing <= 1.6 and elapsed < 600
    shape = " ".join(f"{r.m}:{r.sat_fraction:.2f}" for r in rows)
    report(7, ok, f"monotone={monotone}, 0.5 crossing at bpk={crossing and round(crossing, 3)}, "
                  f"{elapsed:.0f}s; m:frac {shape}")


def test_criterion_08_matching_weight():
    t0 = time.perf_counter()
    w = weight_experiment([1 << 12], 5, seed0=8)[1 << 12]
    elapsed = time.perf_counter() - t0
    report(8, 1.78 <= w <= 1.88 and elapsed < 300, f"mean weight/n at 2^12 = {w:.4f}, {elapsed:.0f}s")


def test_criterion_09_hungarian_scaling():
    ns = [1 << 11, 1 << 12, 1 << 13]
    t = hungarian_scaling(ns, 5, seed0=9)
    ratios = [t[ns[i + 1]] / t[ns[i]] for i in range(2)]
    ok = all(3 <= r <= 6 for r in ratios)
    report(9, ok, "median seconds " + ", ".join(f"2^{n.bit_length() - 1}={t[n]:.3f}" for n in ns)
           + "; ratios " + ", ".join(f"{r:.2f}" for r in ratios))


def test_criterion_10_bits_per_key():
    keys = random_keys(np.random.default_rng(10), 1 << 16)
    t0 = time.perf_counter()
    h = build_sharded(keys, 1 << 13, seed=10)
    elapsed = time.perf_counter() - t0
    bpk = bits_per_key(h)
    bijective = verify_bijection(h, keys)
    ok = 1.80 <= bpk <= 2.10 and elapsed < 120 and bijective
    report(10, ok, f"{len(h.blocks)} blocks, bpk with full container = {bpk:.4f} "
                   f"(filter only {bits_per_key(h, include_headers=False):.4f}), "
                   f"build {elapsed:.1f}s, bijective={bijective}")


def test_criterion_11_gf2():
    rng = random.Random(11)
    failures = solved = singular = 0
    for _ in range(200):
        s = rng.randint(1, 64)
        rows = [(tuple(rng.randint(1, s) for _ in range(rng.randint(1, 5))), rng.randrange(2))
                for _ in range(rng.randint(1, int(1.3 * s) + 1))]
        cons = [XorConstraint(p, b) for p, b in rows]
        try:
            x = solve_gf2(cons, s)
        except SingularSystem:
            singular += 1
            failures += consistent(rows, s)
        else:
            solved += 1
            failures += not all(c.holds(x) for c in cons)
    report(11, failures == 0 and solved > 0 and singular > 0,
           f"200 systems: {solved} solved, {singular} singular, {failures} failures")


def test_criterion_12_container_round_trip(tmp_path):
    mismatches = 0
    cases = []
    keys = [b"sat-%d" % i for i in range(12)]
    cases.append(("sat", build_sat_mphf(keys, 18, 12), keys))
    keys = random_keys(np.random.default_rng(12), 2000)
    cases.append(("matching", build_matching_mphf(keys, 12), keys))
    keys = random_keys(np.random.default_rng(13), 5000)
    cases.append(("sharded", build_sharded(keys, 1024, 12), keys))
    for name, h, keys in cases:
        path = tmp_path / f"{name}.mphf"
        container.save(h, path)
        g = container.load(path)
        mismatches += sum(g.query(y) != h.query(y) for y in keys)
    report(12, mismatches == 0, f"sat/matching/sharded: {mismatches} mismatches")
