"""Deciding CNF formulas: exhaustive oracle, built-in DPLL, external process.

Every SAT answer is re-verified against the formula before it is returned.
"""

from __future__ import annotations

import enum
import os
import random
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from .encoding import CnfFormula, emit_dimacs
from .errors import InvalidArgument, ModelVerificationError, SolverCrash, TooManyVariables

ORACLE_MAX_VARS = 26


class Status(enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    TIMEOUT = "TIMEOUT"


@dataclass(frozen=True)
class SolveResult:
    status: Status
    assignment: tuple[bool, ...] | None = None
    seconds: float = 0.0

    @property
    def sat(self) -> bool:
        return self.status is Status.SAT


@dataclass(frozen=True)
class SolverConfig:
    engine: str = "builtin"  # builtin | oracle | external
    command: str | None = None  # external only; "{cnf}" is replaced by the file path
    time_limit: float | None = None
    seed: int | None = None  # builtin only; None means lowest-variable-first, false-first


def _checked(f: CnfFormula, assignment, started: float) -> SolveResult:
    assignment = tuple(bool(v) for v in assignment)
    if len(assignment) != f.num_vars or not f.satisfied_by(assignment):
        raise ModelVerificationError("solver returned an assignment that falsifies the formula")
    return SolveResult(Status.SAT, assignment, time.monotonic() - started)


def _clause_masks(f: CnfFormula, nbits: int):
    pos = np.zeros(len(f.clauses), dtype=np.int64)
    neg = np.zeros(len(f.clauses), dtype=np.int64)
    for ci, c in enumerate(f.clauses):
        for lit in c:
            bit = 1 << (abs(lit) - 1)
            if lit > 0:
                pos[ci] |= bit
            else:
                neg[ci] |= bit
    return pos, neg


_CHUNK = 1 << 16


def solve_oracle(f: CnfFormula) -> SolveResult:
    """Enumerate assignments as integers (bit v-1 holds x_v) in ascending order."""
    if f.num_vars > ORACLE_MAX_VARS:
        raise TooManyVariables(f"oracle handles at most {ORACLE_MAX_VARS} variables, got {f.num_vars}")
    started = time.monotonic()
    if any(len(c) == 0 for c in f.clauses):
        return SolveResult(Status.UNSAT, None, time.monotonic() - started)
    pos, neg = _clause_masks(f, f.num_vars)
    total = 1 << f.num_vars
    for lo in range(0, total, _CHUNK):
        xs = np.arange(lo, min(total, lo + _CHUNK), dtype=np.int64)
        ok = np.ones(len(xs), dtype=bool)
        for p, q in zip(pos, neg):
            ok &= ((xs & p) != 0) | ((xs & q) != q)
            if not ok.any():
                break
        hits = np.flatnonzero(ok)
        if len(hits):
            x = int(xs[hits[0]])
            return _checked(f, [(x >> v) & 1 for v in range(f.num_vars)], started)
    return SolveResult(Status.UNSAT, None, time.monotonic() - started)


def solve_projected(f: CnfFormula, base_vars: int) -> SolveResult:
    """Enumerate x_1..x_base_vars; extend the rest as the least forced set.

    Variables above ``base_vars`` take the value true only when some clause
    containing them positively has every other literal false, iterated to a
    fixpoint; everything else is false.  This is exact for formulas whose
    auxiliary variables occur positively only in their defining clauses and
    negatively elsewhere, which is the shape of the compact encoding.
    """
    if base_vars > ORACLE_MAX_VARS:
        raise TooManyVariables(f"projected oracle handles at most {ORACLE_MAX_VARS} base variables")
    started = time.monotonic()
    if any(len(c) == 0 for c in f.clauses):
        return SolveResult(Status.UNSAT, None, time.monotonic() - started)
    nv = f.num_vars
    total = 1 << base_vars
    for lo in range(0, total, _CHUNK):
        xs = np.arange(lo, min(total, lo + _CHUNK), dtype=np.int64)
        vals = np.zeros((nv + 1, len(xs)), dtype=bool)
        for v in range(1, base_vars + 1):
            vals[v] = (xs >> (v - 1)) & 1
        changed = True
        while changed:
            changed = False
            for c in f.clauses:
                for lit in c:
                    v = abs(lit)
                    if lit < 0 or v <= base_vars:
                        continue
                    others_false = np.ones(len(xs), dtype=bool)
                    for o in c:
                        if o != lit:
                            others_false &= vals[abs(o)] != (o > 0)
                    newly = others_false & ~vals[v]
                    if newly.any():
                        vals[v] |= newly
                        changed = True
        ok = np.ones(len(xs), dtype=bool)
        for c in f.clauses:
            sat = np.zeros(len(xs), dtype=bool)
            for lit in c:
                sat |= vals[abs(lit)] == (lit > 0)
            ok &= sat
        hits = np.flatnonzero(ok)
        if len(hits):
            return _checked(f, vals[1:, hits[0]], started)
    return SolveResult(Status.UNSAT, None, time.monotonic() - started)


class _Timeout(Exception):
    pass


def solve_builtin(f: CnfFormula, cfg: SolverConfig | None = None) -> SolveResult:
    """DPLL with two watched literals and chronological backtracking."""
    cfg = cfg or SolverConfig()
    started = time.monotonic()
    deadline = None if cfg.time_limit is None else started + cfg.time_limit
    nv = f.num_vars

    # literal code: 2*v for x_v, 2*v+1 for its negation; lv[code] is 1, 0 or -1 (unset)
    lv = [-1] * (2 * nv + 2)
    watches: list[list[int]] = [[] for _ in range(2 * nv + 2)]
    clauses: list[list[int]] = []
    units: list[int] = []
    for c in f.clauses:
        if not c:
            return SolveResult(Status.UNSAT, None, time.monotonic() - started)
        codes = [2 * abs(l) + (l < 0) for l in c]
        if len(codes) == 1:
            units.append(codes[0])
            continue
        ci = len(clauses)
        clauses.append(codes)
        watches[codes[0]].append(ci)
        watches[codes[1]].append(ci)

    order = list(range(1, nv + 1))
    phase = [1] * (nv + 1)  # 1: try the negative literal first (false first)
    if cfg.seed is not None:
        rng = random.Random(cfg.seed)
        rng.shuffle(order)
        phase = [rng.randrange(2) for _ in range(nv + 1)]
    where = [0] * (nv + 1)
    for idx, v in enumerate(order):
        where[v] = idx

    trail: list[int] = []
    qhead = 0

    def assign(code: int) -> None:
        lv[code] = 1
        lv[code ^ 1] = 0
        trail.append(code)

    def propagate() -> bool:
        nonlocal qhead
        while qhead < len(trail):
            false_lit = trail[qhead] ^ 1
            qhead += 1
            ws = watches[false_lit]
            keep = 0
            i = 0
            conflict = False
            while i < len(ws):
                ci = ws[i]
                i += 1
                cl = clauses[ci]
                if cl[0] == false_lit:
                    cl[0], cl[1] = cl[1], cl[0]
                first = cl[0]
                if lv[first] == 1:
                    ws[keep] = ci
                    keep += 1
                    continue
                for p in range(2, len(cl)):
                    if lv[cl[p]] != 0:
                        cl[1], cl[p] = cl[p], cl[1]
                        watches[cl[1]].append(ci)
                        break
                else:
                    ws[keep] = ci
                    keep += 1
                    if lv[first] == 0:
                        conflict = True
                        break
                    assign(first)
            if conflict:
                while i < len(ws):
                    ws[keep] = ws[i]
                    keep += 1
                    i += 1
                del ws[keep:]
                return False
            del ws[keep:]
        return True

    def undo(to: int) -> None:
        nonlocal qhead
        while len(trail) > to:
            code = trail.pop()
            lv[code] = -1
            lv[code ^ 1] = -1
        qhead = to

    for u in units:
        if lv[u] == 0:
            return SolveResult(Status.UNSAT, None, time.monotonic() - started)
        if lv[u] == -1:
            assign(u)

    # (trail length before the decision, literal assigned, already flipped)
    decisions: list[tuple[int, int, bool]] = []
    cursor = 0
    steps = 0
    try:
        ok = propagate()
        while True:
            steps += 1
            if deadline is not None and steps & 255 == 0 and time.monotonic() > deadline:
                raise _Timeout
            if not ok:
                while decisions:
                    tl, lit, flipped = decisions.pop()
                    undo(tl)
                    cursor = where[lit >> 1]
                    if not flipped:
                        decisions.append((tl, lit ^ 1, True))
                        assign(lit ^ 1)
                        break
                else:
                    return SolveResult(Status.UNSAT, None, time.monotonic() - started)
                ok = propagate()
                continue
            while cursor < nv and lv[2 * order[cursor]] != -1:
                cursor += 1
            if cursor == nv:
                break
            v = order[cursor]
            lit = 2 * v + phase[v]
            decisions.append((len(trail), lit, False))
            assign(lit)
            ok = propagate()
    except _Timeout:
        return SolveResult(Status.TIMEOUT, None, time.monotonic() - started)

    return _checked(f, [lv[2 * v] == 1 for v in range(1, nv + 1)], started)


def _parse_competition_output(text: str):
    status = None
    lits: list[int] = []
    for line in text.splitlines():
        if line.startswith("s "):
            word = line[2:].strip().upper()
            if word == "SATISFIABLE":
                status = Status.SAT
            elif word == "UNSATISFIABLE":
                status = Status.UNSAT
            else:
                status = Status.TIMEOUT
        elif line.startswith("v "):
            lits.extend(int(t) for t in line[2:].split())
    return status, lits


def solve_external(f: CnfFormula, cfg: SolverConfig) -> SolveResult:
    if not cfg.command:
        raise InvalidArgument("external solver needs a command template")
    started = time.monotonic()
    fd, path = tempfile.mkstemp(suffix=".cnf")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(emit_dimacs(f))
        if "{cnf}" in cfg.command:
            argv = [tok.replace("{cnf}", path) for tok in shlex.split(cfg.command)]
        else:
            argv = shlex.split(cfg.command) + [path]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=cfg.time_limit)
        except subprocess.TimeoutExpired:
            return SolveResult(Status.TIMEOUT, None, time.monotonic() - started)
        except OSError as exc:
            raise SolverCrash(f"cannot run {argv[0]!r}: {exc}") from exc
    finally:
        os.unlink(path)

    status, lits = _parse_competition_output(proc.stdout)
    if status is None:
        raise SolverCrash(f"solver exited with code {proc.returncode} and no status line")
    if status is not Status.SAT:
        return SolveResult(status, None, time.monotonic() - started)
    values = [False] * f.num_vars
    for lit in lits:
        if lit != 0 and abs(lit) <= f.num_vars:
            values[abs(lit) - 1] = lit > 0
    return _checked(f, values, started)


def solve(f: CnfFormula, cfg: SolverConfig | None = None) -> SolveResult:
    cfg = cfg or SolverConfig()
    if cfg.engine == "builtin":
        return solve_builtin(f, cfg)
    if cfg.engine == "oracle":
        return solve_oracle(f)
    if cfg.engine == "external":
        return solve_external(f, cfg)
    raise InvalidArgument(f"unknown solver engine {cfg.engine!r}")
