"""Exact rational and integer linear algebra.

Everything here works on plain nested sequences of ``int`` or
:class:`fractions.Fraction`; no floating point is ever involved.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence

Rational = Fraction
IntMatrix = Sequence[Sequence[int]]


class SingularMatrixError(ArithmeticError):
    """Raised when a linear system has no unique solution."""

    def __init__(self, row: int):
        super().__init__(f"matrix is singular: row {row} is dependent on the others")
        self.row = row


def _check_square(m: Sequence[Sequence], what: str = "matrix") -> int:
    n = len(m)
    for i, row in enumerate(m):
        if len(row) != n:
            raise ValueError(f"{what} is not square (row {i} has {len(row)} entries, expected {n})")
    return n


def is_symmetric(m: IntMatrix) -> bool:
    n = _check_square(m)
    return all(m[i][j] == m[j][i] for i in range(n) for j in range(i + 1, n))


def rat_solve(m: Sequence[Sequence], b: Sequence) -> List[Fraction]:
    """Solve ``m x = b`` exactly by Gauss-Jordan elimination over Q.

    Raises :class:`SingularMatrixError` naming the first row (in the original
    numbering) that turned out to be a combination of the earlier ones.
    """
    n = _check_square(m)
    if len(b) != n:
        raise ValueError(f"right-hand side has length {len(b)}, expected {n}")
    a = [[Fraction(x) for x in row] + [Fraction(b[i])] for i, row in enumerate(m)]
    order = list(range(n))
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise SingularMatrixError(order[col])
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            order[col], order[piv] = order[piv], order[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


def int_det(m: IntMatrix) -> int:
    """Determinant by Bareiss fraction-free elimination."""
    n = _check_square(m)
    if n == 0:
        return 1
    a = [[int(x) for x in row] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                # exact division is guaranteed by Sylvester's identity
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def smith_normal_form(m: IntMatrix) -> List[int]:
    """Invariant factors ``d1 | d2 | ...`` of an integer matrix.

    The list has ``min(rows, cols)`` entries, all non-negative, zeros last.
    Only the diagonal is returned; the transforming matrices are not tracked.
    """
    a = [[int(x) for x in row] for row in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    if any(len(r) != cols for r in a):
        raise ValueError("ragged matrix")
    diag: List[int] = []
    t = 0
    while t < min(rows, cols):
        # pivot: smallest nonzero absolute value in the remaining block
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if a[i][j] and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            diag.extend([0] * (min(rows, cols) - t))
            break
        i, j = best
        a[t], a[i] = a[i], a[t]
        for row in a:
            row[t], row[j] = row[j], row[t]
        while True:
            p = a[t][t]
            dirty = False
            for i in range(t + 1, rows):
                q = a[i][t] // p
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                if a[i][t]:
                    dirty = True
            for j in range(t + 1, cols):
                q = a[t][j] // p
                if q:
                    for row in a:
                        row[j] -= q * row[t]
                if a[t][j]:
                    dirty = True
            if not dirty:
                bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                            if a[i][j] % p), None)
                if bad is None:
                    break
                # fold the offending row in so the pivot shrinks to a divisor
                a[t] = [x + y for x, y in zip(a[t], a[bad[0]])]
                continue
            # move the smallest entry of the pivot row/column into position
            cand = [(abs(a[i][t]), i, t) for i in range(t, rows) if a[i][t]]
            cand += [(abs(a[t][j]), t, j) for j in range(t, cols) if a[t][j]]
            _, i, j = min(cand)
            a[t], a[i] = a[i], a[t]
            for row in a:
                row[t], row[j] = row[j], row[t]
        diag.append(abs(a[t][t]))
        t += 1
    return diag


def is_negative_definite(m: IntMatrix) -> bool:
    """Sylvester's criterion: the k-th leading minor has sign (-1)^k."""
    n = _check_square(m)
    if not is_symmetric(m):
        raise ValueError("matrix is not symmetric")
    for k in range(1, n + 1):
        d = int_det([row[:k] for row in m[:k]])
        if d == 0 or (d > 0) != (k % 2 == 0):
            return False
    return True

