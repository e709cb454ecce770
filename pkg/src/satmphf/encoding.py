"""CNF encodings of the all-different constraint over literal-table rows.

Two encodings are provided.  The cubic one forbids, for every pair of keys
and every index value, that both keys spell that value.  The compact one
introduces one auxiliary equality variable per distinct pair of literals
that meet at the same bit position, and asks every pair of keys to differ
in at least one position.

When n is not a power of two the index space has 2^k > n raw patterns.
The cubic encoding drops the most significant bit from the clauses of the
values whose mirror ``l + 2^(k-1)`` lies outside [1, n], so such a mirror
pattern collides with ``l`` and decodes to it.  The compact encoding
expresses the same semantics with one "mirror zone" variable per key, so
both encodings accept exactly the same assignments of x_1..x_m.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DimacsParseError, InvalidArgument
from .hashing import LiteralTable

Clause = tuple[int, ...]


@dataclass
class CnfFormula:
    num_vars: int
    clauses: list[Clause] = field(default_factory=list)

    def __post_init__(self):
        self.clauses = [tuple(c) for c in self.clauses]

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def validate(self) -> None:
        for c in self.clauses:
            if len(set(c)) != len(c):
                raise InvalidArgument(f"clause {c} repeats a literal")
            for lit in c:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise InvalidArgument(f"literal {lit} out of range")
                if -lit in c:
                    raise InvalidArgument(f"clause {c} is a tautology")

    def satisfied_by(self, assignment: Sequence[bool]) -> bool:
        """``assignment[v - 1]`` is the value of variable v."""
        for c in self.clauses:
            for lit in c:
                if assignment[abs(lit) - 1] == (lit > 0):
                    break
            else:
                return False
        return True


def _clean(lits: Iterable[int]) -> Clause | None:
    """Drop duplicate literals; return None for a tautology."""
    seen: dict[int, None] = {}
    for lit in lits:
        if -lit in seen:
            return None
        seen[lit] = None
    return tuple(seen)


def is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def mirrored(l: int, n: int, k: int) -> bool:
    """True if value ``l`` absorbs the out-of-range pattern ``l + 2^(k-1)``."""
    half = 1 << (k - 1)
    return not is_power_of_two(n) and l <= half and l + half > n


def _value_literals(row: Sequence[int], value: int, positions: Iterable[int], k: int) -> list[int]:
    # literals falsified exactly when the row spells ``value`` (0-based) on ``positions``
    out = []
    for p in positions:
        bit = (value >> (k - 1 - p)) & 1
        out.append(-row[p] if bit else row[p])
    return out


def encode_cubic(table: LiteralTable) -> CnfFormula:
    n, k, rows = table.n, table.k, table.rows
    clauses: list[Clause] = []
    for i in range(n):
        for j in range(i + 1, n):
            for l in range(1, n + 1):
                positions = range(1, k) if mirrored(l, n, k) else range(k)
                lits = _value_literals(rows[i], l - 1, positions, k)
                lits += _value_literals(rows[j], l - 1, positions, k)
                c = _clean(lits)
                if c is not None:
                    clauses.append(c)
    return CnfFormula(table.m, clauses)


class EqVarRegistry:
    """Auxiliary variables e_{a,b} meaning "literal a equals literal b"."""

    def __init__(self, first_id: int):
        self.next_id = first_id
        self.ids: dict[tuple[int, int], int] = {}

    def get(self, a: int, b: int) -> int:
        if a == b or a == -b:
            raise InvalidArgument("e_{a,a} and e_{a,-a} are constants")
        pair = (a, b) if a < b else (b, a)
        var = self.ids.get(pair)
        if var is None:
            var = self.ids[pair] = self.next_id
            self.next_id += 1
        return var

    def __len__(self):
        return len(self.ids)

    def definitions(self) -> list[Clause]:
        # only the two clauses with positive e; the negative ones are blocked
        out = []
        for (a, b), e in self.ids.items():
            out.append((e, a, b))
            out.append((e, -a, -b))
        return out


def encode_compact(table: LiteralTable) -> CnfFormula:
    n, k, m, rows = table.n, table.k, table.m, table.rows
    use_zone = k >= 2 and not is_power_of_two(n)
    eq = EqVarRegistry(m + 1)
    pair_clauses: list[Clause] = []
    pending_zone: list[tuple[int, list[int]]] = []

    for i in range(n):
        for j in range(i + 1, n):
            ri, rj = rows[i], rows[j]
            complementary = [ri[p] == -rj[p] for p in range(k)]
            full_needed = not any(complementary)
            zone_needed = use_zone and not any(complementary[1:])
            if not (full_needed or zone_needed):
                continue
            evars: dict[int, int] = {}
            for p in range(k):
                if ri[p] == rj[p] or complementary[p]:
                    continue
                if full_needed or p >= 1:
                    evars[p] = eq.get(ri[p], rj[p])
            if full_needed:
                # empty when every position carries the same literal: UNSAT
                pair_clauses.append(tuple(-e for e in evars.values()))
            if zone_needed:
                pending_zone.append((i, [-evars[p] for p in range(1, k) if p in evars]))

    clauses = pair_clauses + eq.definitions()
    num_vars = eq.next_id - 1
    if use_zone:
        zone_var = [num_vars + 1 + i for i in range(n)]
        num_vars += n
        half = 1 << (k - 1)
        low_start = n - half  # 0-based low value where the mirror zone begins
        for i in range(n):
            for v in range(low_start, half):
                lits = _value_literals(rows[i], v, range(1, k), k)
                clauses.append((zone_var[i], *lits))
        for i, neg_es in pending_zone:
            clauses.append((*neg_es, -zone_var[i]))
    return CnfFormula(num_vars, clauses)


def decode_raw(row: Sequence[int], value_of) -> int:
    """Raw index 1..2^k spelled by ``row`` under ``value_of(var) -> bool``."""
    v = 0
    for lit in row:
        bit = value_of(abs(lit))
        if lit < 0:
            bit = not bit
        v = (v << 1) | int(bit)
    return v + 1


def canonical_index(raw: int, n: int, k: int) -> int:
    if raw > n:
        return raw - (1 << (k - 1))
    return raw


def emit_dimacs(f: CnfFormula) -> str:
    lines = [f"p cnf {f.num_vars} {len(f.clauses)}"]
    for c in f.clauses:
        lines.append(" ".join(map(str, c)) + (" 0" if c else "0"))
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> CnfFormula:
    header = None
    tokens: list[str] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("c"):
            continue
        if s.startswith("p"):
            if header is not None:
                raise DimacsParseError(f"line {lineno}: second header")
            parts = s.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsParseError(f"line {lineno}: malformed header {s!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise DimacsParseError(f"line {lineno}: malformed header {s!r}") from None
            if header[0] < 0 or header[1] < 0:
                raise DimacsParseError(f"line {lineno}: negative count in header")
            continue
        if header is None:
            raise DimacsParseError(f"line {lineno}: clause before header")
        tokens.extend(s.split())
    if header is None:
        raise DimacsParseError("missing 'p cnf' header")
    num_vars, num_clauses = header
    clauses: list[Clause] = []
    cur: list[int] = []
    for tok in tokens:
        try:
            lit = int(tok)
        except ValueError:
            raise DimacsParseError(f"bad literal {tok!r}") from None
        if lit == 0:
            clauses.append(tuple(cur))
            cur = []
        elif abs(lit) > num_vars:
            raise DimacsParseError(f"literal {lit} exceeds {num_vars} variables")
        else:
            cur.append(lit)
    if cur:
        raise DimacsParseError("last clause is not terminated by 0")
    if len(clauses) != num_clauses:
        raise DimacsParseError(f"header announces {num_clauses} clauses, found {len(clauses)}")
    return CnfFormula(num_vars, clauses)
