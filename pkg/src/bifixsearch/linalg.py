"""Dense Gaussian elimination with scaled partial pivoting.

Works on ``float`` and on :class:`fractions.Fraction` entries alike. In
rational arithmetic a pivot is rejected only when it is exactly zero.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .errors import SingularSystem

PIVOT_TOL = 1e-12


def solve(A: Sequence[Sequence], b: Sequence) -> list:
    """Solve the square system ``A x = b`` and return ``x`` as a list."""
    n = len(A)
    if any(len(row) != n for row in A) or len(b) != n:
        raise ValueError("solve expects a square matrix and a matching right-hand side")
    rows = [list(row) + [b[i]] for i, row in enumerate(A)]
    exact = all(isinstance(v, (int, Fraction)) for row in rows for v in row)

    scale = []
    for row in rows:
        s = max(abs(v) for v in row[:n])
        if s == 0:
            raise SingularSystem("matrix has an all-zero row")
        scale.append(s)

    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(rows[r][col]) / scale[r])
        rel = abs(rows[piv][col]) / scale[piv]
        if rel == 0 or (not exact and rel < PIVOT_TOL):
            raise SingularSystem(f"scaled pivot {float(rel):.3g} in column {col} below threshold")
        if piv != col:
            rows[col], rows[piv] = rows[piv], rows[col]
            scale[col], scale[piv] = scale[piv], scale[col]
        pivot_row = rows[col]
        p = pivot_row[col]
        for r in range(col + 1, n):
            f = rows[r][col] / p
            if f:
                row = rows[r]
                for c in range(col, n + 1):
                    row[c] -= f * pivot_row[c]

    x = [None] * n
    for i in range(n - 1, -1, -1):
        acc = rows[i][n]
        for c in range(i + 1, n):
            acc -= rows[i][c] * x[c]
        x[i] = acc / rows[i][i]
    return x
