import pytest

from satmphf import bench
from satmphf.errors import InvalidArgument
from satmphf.matching_mphf import build_matching_mphf
from satmphf.sat_mphf import build_sat_mphf


def test_phase_rows_tally():
    rows = bench.phase_experiment([6], [1.0, 2.0], 1, seed0=3)
    assert [r.m for r in rows] == [6, 12]
    for r in rows:
        assert r.sat + r.unsat + r.timeout == 1


def test_phase_far_above_threshold_always_sat():
    row, = bench.phase_experiment([10], [3.0], 50, seed0=1)
    assert row.sat == 50 and row.sat_fraction == 1.0


def test_phase_deterministic_and_csv():
    a = bench.phase_experiment([5], [1.2, 1.6], 20, seed0=9)
    b = bench.phase_experiment([5], [1.2, 1.6], 20, seed0=9)
    assert [(r.m, r.sat) for r in a] == [(r.m, r.sat) for r in b]
    text = bench.phase_csv(a)
    lines = text.split("\n")
    assert lines[0] == "n,m,bpk,trials,sat,unsat,timeout,mean_seconds"
    assert lines[1].startswith("5,6,1.2000,20,")
    assert text.endswith("\n") and "\r" not in text


def test_phase_timeouts_are_counted():
    row, = bench.phase_experiment([12], [1.2], 3, time_limit=0.0, seed0=0)
    assert row.timeout + row.sat + row.unsat == 3


def test_phase_rejects_zero_trials():
    with pytest.raises(InvalidArgument):
        bench.phase_experiment([5], [1.5], 0)


def test_weight_experiment():
    res = bench.weight_experiment([64, 128], 3, seed0=1)
    assert set(res) == {64, 128}
    assert all(w >= 1 for w in res.values())


def test_hungarian_scaling_small():
    res = bench.hungarian_scaling([2, 64], 2)
    assert set(res) == {2, 64} and all(t >= 0 for t in res.values())


def test_query_throughput():
    keys = [b"key%d" % i for i in range(512)]
    h = build_matching_mphf(keys, 1)
    assert bench.query_throughput(h, keys, 2000) > 0
    s = build_sat_mphf(keys[:8], 12, 1)
    assert bench.query_throughput(s, keys[:8], 100) > 0
    with pytest.raises(InvalidArgument):
        bench.query_throughput(h, keys, 0)


def test_random_keys_distinct():
    import numpy as np
    keys = bench.random_keys(np.random.default_rng(0), 1000, size=2)
    assert len(set(keys)) == 1000 and all(len(k) == 2 for k in keys)
