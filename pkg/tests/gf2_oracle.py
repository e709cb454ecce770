"""Independent GF(2) rank check: Python-int rows, pivots taken from the highest column down."""


def rank(rows):
    basis = {}  # top bit -> row
    r = 0
    for row in rows:
        while row:
            top = row.bit_length() - 1
            if top not in basis:
                basis[top] = row
                r += 1
                break
            row ^= basis[top]
    return r


def consistent(constraints, s):
    """constraints: iterable of (1-based positions, rhs).  Compares rank(A) with rank(A|b)."""
    a, ab = [], []
    for positions, rhs in constraints:
        row = 0
        for p in positions:
            row ^= 1 << (p - 1)
        a.append(row)
        ab.append(row | ((rhs & 1) << s))
    return rank(a) == rank(ab)
