"""Exact rational and integer linear algebra on small dense matrices."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

Matrix = list[list[Fraction]]


def to_fractions(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(v) for v in row] for row in rows]


def rref(rows: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    A = to_fractions(rows)
    if not A:
        return A, []
    m, n = len(A), len(A[0])
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        lead = A[r][c]
        A[r] = [v / lead for v in A[r]]
        for i in range(m):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return A, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1]) if rows else 0


def det(rows: Sequence[Sequence]) -> Fraction:
    A = to_fractions(rows)
    n = len(A)
    sign = 1
    result = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            sign = -sign
        result *= A[c][c]
        for i in range(c + 1, n):
            if A[i][c] != 0:
                f = A[i][c] / A[c][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return sign * result


def solve(rows: Sequence[Sequence], rhs: Sequence) -> list[Fraction] | None:
    """Unique solution of a square system, or None when singular."""
    n = len(rows)
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    R, pivots = rref(aug)
    if pivots != list(range(n)):
        return None
    return [R[i][n] for i in range(n)]


def nullspace(rows: Sequence[Sequence], ncols: int) -> Matrix:
    """Basis of the right kernel ``{v : A v = 0}``."""
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    R, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -R[i][f]
        basis.append(v)
    return basis


def primitive(vec: Sequence) -> tuple[int, ...]:
    """Scale a rational vector to the primitive integer vector on its ray."""
    fr = [Fraction(v) for v in vec]
    den = 1
    for v in fr:
        den = den * v.denominator // gcd(den, v.denominator)
    ints = [int(v * den) for v in fr]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g == 0:
        return tuple(ints)
    return tuple(v // g for v in ints)


def integer_orthogonal_basis(vectors: Sequence[Sequence[int]], n: int) -> list[tuple[int, ...]]:
    """Integer vectors spanning the rational orthogonal complement of ``vectors``."""
    return [primitive(v) for v in nullspace([list(v) for v in vectors], n)]


def row_kernel_lattice(row: Sequence[int]) -> list[list[int]]:
    """Lattice basis of ``{u in Z^k : row . u = 0}`` by unimodular column operations."""
    k = len(row)
    a = [int(v) for v in row]
    U = [[int(i == j) for j in range(k)] for i in range(k)]  # columns of U
    # Euclid on entries; keep ``a = row . U`` as columns are combined
    while True:
        nz = [i for i in range(k) if a[i] != 0]
        if len(nz) <= 1:
            break
        i = min(nz, key=lambda t: (abs(a[t]), t))
        for j in nz:
            if j == i:
                continue
            qt = a[j] // a[i]
            a[j] -= qt * a[i]
            for r in range(k):
                U[r][j] -= qt * U[r][i]
    nz = [i for i in range(k) if a[i] != 0]
    return [[U[r][j] for r in range(k)] for j in range(k) if j not in nz]
