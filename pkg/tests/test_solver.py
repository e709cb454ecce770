import random
import sys
import textwrap

import pytest
from hypothesis import given, strategies as st

from satmphf.encoding import CnfFormula, encode_compact, encode_cubic
from satmphf.errors import InvalidArgument, ModelVerificationError, SolverCrash, TooManyVariables
from satmphf.hashing import LiteralTable
from satmphf.solver import (SolverConfig, Status, solve, solve_builtin, solve_external, solve_oracle,
                            solve_projected)

from test_encoding import random_table
from worked_examples import FOUR_KEY_ROWS


def brute_sat(f):
    for x in range(1 << f.num_vars):
        if f.satisfied_by([(x >> v) & 1 == 1 for v in range(f.num_vars)]):
            return True
    return False


cnf_st = st.integers(1, 10).flatmap(lambda nv: st.tuples(
    st.just(nv),
    st.lists(st.lists(st.integers(1, nv).flatmap(lambda v: st.sampled_from([v, -v])),
                      min_size=1, max_size=3, unique_by=abs), max_size=40)))


@given(cnf_st, st.one_of(st.none(), st.integers(0, 1000)))
def test_builtin_agrees_with_oracle(data, seed):
    nv, clauses = data
    f = CnfFormula(nv, clauses)
    want = brute_sat(f)
    o = solve_oracle(f)
    b = solve_builtin(f, SolverConfig(seed=seed))
    assert o.sat == b.sat == want
    for r in (o, b):
        if r.sat:
            assert f.satisfied_by(r.assignment)


def test_oracle_returns_smallest_model():
    f = CnfFormula(3, [(2, 3), (-3,)])
    assert solve_oracle(f).assignment == (False, True, False)


def test_builtin_default_order_is_false_first():
    assert solve_builtin(CnfFormula(3, [])).assignment == (False, False, False)


def test_empty_clause_is_unsat():
    f = CnfFormula(2, [(1,), ()])
    assert solve_oracle(f).status is Status.UNSAT
    assert solve_builtin(f).status is Status.UNSAT
    assert solve_projected(f, 2).status is Status.UNSAT


def test_oracle_variable_limit():
    with pytest.raises(TooManyVariables):
        solve_oracle(CnfFormula(27, []))


def pigeonhole(holes):
    var = lambda p, h: p * holes + h + 1
    clauses = [tuple(var(p, h) for h in range(holes)) for p in range(holes + 1)]
    for h in range(holes):
        for p in range(holes + 1):
            for q in range(p + 1, holes + 1):
                clauses.append((-var(p, h), -var(q, h)))
    return CnfFormula((holes + 1) * holes, clauses)


def test_builtin_timeout_is_a_status():
    r = solve_builtin(pigeonhole(9), SolverConfig(time_limit=0.0))
    assert r.status is Status.TIMEOUT and r.assignment is None


def test_builtin_proves_small_pigeonhole_unsat():
    assert solve_builtin(pigeonhole(4)).status is Status.UNSAT


def test_projected_oracle_matches_exhaustive_on_compact():
    rng = random.Random(11)
    checked = 0
    while checked < 40:
        n = rng.randint(2, 5)
        m = rng.randint((n - 1).bit_length(), 6)
        t = random_table(rng, n, m)
        f = encode_compact(t)
        if f.num_vars > 20:
            continue
        assert solve_projected(f, m).sat == solve_oracle(f).sat == solve_oracle(encode_cubic(t)).sat
        checked += 1


def stub(tmp_path, body):
    script = tmp_path / "stub_solver.py"
    script.write_text(textwrap.dedent(body))
    return f"{sys.executable} {script}"


FOUR = encode_cubic(LiteralTable.from_rows(FOUR_KEY_ROWS, 6))


def test_external_sat_model_is_verified(tmp_path):
    cmd = stub(tmp_path, """
        import sys
        text = open(sys.argv[1]).read()
        assert text.startswith("p cnf 6 ")
        print("c stub")
        print("s SATISFIABLE")
        print("v 1 -2 3")
        print("v -4 5 6 0")
    """)
    r = solve(FOUR, SolverConfig("external", cmd))
    assert r.status is Status.SAT
    assert r.assignment == (True, False, True, False, True, True)


def test_external_placeholder_substitution(tmp_path):
    cmd = stub(tmp_path, """
        import sys
        assert sys.argv[1] == "--in" and sys.argv[2].endswith(".cnf")
        print("s UNSATISFIABLE")
    """)
    r = solve_external(FOUR, SolverConfig("external", cmd + " --in {cnf}"))
    assert r.status is Status.UNSAT


def test_external_wrong_model_is_rejected(tmp_path):
    cmd = stub(tmp_path, 'print("s SATISFIABLE")\nprint("v 1 2 3 4 5 6 0")\n')
    with pytest.raises(ModelVerificationError):
        solve(FOUR, SolverConfig("external", cmd))


def test_external_without_status_is_a_crash(tmp_path):
    cmd = stub(tmp_path, "import sys\nsys.exit(3)\n")
    with pytest.raises(SolverCrash):
        solve(FOUR, SolverConfig("external", cmd))


def test_external_missing_binary(tmp_path):
    with pytest.raises(SolverCrash):
        solve(FOUR, SolverConfig("external", str(tmp_path / "no-such-solver")))


def test_external_timeout(tmp_path):
    cmd = stub(tmp_path, "import time\ntime.sleep(10)\n")
    assert solve(FOUR, SolverConfig("external", cmd, time_limit=0.3)).status is Status.TIMEOUT


def test_external_unknown_status(tmp_path):
    cmd = stub(tmp_path, 'print("s UNKNOWN")\n')
    assert solve(FOUR, SolverConfig("external", cmd)).status is Status.TIMEOUT


def test_unknown_engine():
    with pytest.raises(InvalidArgument):
        solve(FOUR, SolverConfig("nope"))
    with pytest.raises(InvalidArgument):
        solve(FOUR, SolverConfig("external"))


def test_unit_chain_is_forced():
    f = CnfFormula(3, [(1,), (-1, 2), (-2, 3)])
    assert solve_builtin(f).assignment == (True, True, True)


def test_three_keys_one_bit_is_unsat():
    t = LiteralTable.from_rows([(1,), (-1,), (1,)], 1)
    f = encode_cubic(t)
    assert solve_builtin(f).status is Status.UNSAT
    assert solve_oracle(f).status is Status.UNSAT


def test_seeded_builtin_is_deterministic():
    t = random_table(random.Random(9), 6, 9)
    f = encode_cubic(t)
    runs = {solve_builtin(f, SolverConfig(seed=4)).assignment for _ in range(3)}
    assert len(runs) == 1
