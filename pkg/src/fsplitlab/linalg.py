"""Exact sparse linear algebra over F_p for multiplication operators.

The main object is the operator "multiply by h" on the Artinian algebra
``A = F_p[x_1..x_n] / (x_1^q, ..., x_n^q)`` in its monomial basis.  The
operator is split into independent blocks using the finest grading for
which ``h`` is homogeneous (the lattice orthogonal to the differences of
its exponent vectors), so every block is small.  When a weight vector is
given, each block also carries the weighted degree of its source slice.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _exact
from .algebra import Poly, monomial_counts

DENSE_LIMIT = 4_000_000  # rows * cols below which a block is eliminated densely
WIEDEMANN_MIN_COLS = 2_000


class NotHomogeneous(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    """A configured resource budget ran out; ``partial`` holds what was found."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class SparseMatrix:
    nrows: int
    ncols: int
    p: int
    entries: dict = field(default_factory=dict)  # (row, col) -> nonzero residue

    @classmethod
    def from_coo(cls, nrows: int, ncols: int, rows: Iterable[int], cols: Iterable[int],
                 vals: Iterable[int], p: int) -> "SparseMatrix":
        acc: dict = {}
        for r, c, v in zip(rows, cols, vals):
            if not (0 <= r < nrows and 0 <= c < ncols):
                raise IndexError(f"entry ({r}, {c}) outside {nrows}x{ncols}")
            key = (int(r), int(c))
            acc[key] = (acc.get(key, 0) + int(v)) % p
        return cls(nrows, ncols, p, {k: v for k, v in acc.items() if v})

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[int]], p: int) -> "SparseMatrix":
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        ent = {(i, j): v % p for i, row in enumerate(rows) for j, v in enumerate(row) if v % p}
        return cls(nrows, ncols, p, ent)

    @classmethod
    def identity(cls, n: int, p: int) -> "SparseMatrix":
        return cls(n, n, p, {(i, i): 1 for i in range(n)})

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.ncols for _ in range(self.nrows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.ncols, self.nrows, self.p, {(c, r): v for (r, c), v in self.entries.items()})

    def matvec(self, vec: Sequence[int]) -> list[int]:
        out = [0] * self.nrows
        for (r, c), v in self.entries.items():
            out[r] += v * vec[c]
        return [x % self.p for x in out]


# ----------------------------------------------------------------------------
# rank and kernel

def _sparse_rank(row_dicts: list[dict], p: int) -> int:
    """Gaussian elimination on dict rows with a Markowitz-style pivot choice.

    The pivot row is the sparsest active row; within it the pivot column is
    the one with the fewest active entries.  Ties break on the smallest
    index so the elimination sequence is deterministic.
    """
    rows = {i: dict(r) for i, r in enumerate(row_dicts) if r}
    col_rows: dict[int, set] = {}
    for i, r in rows.items():
        for c in r:
            col_rows.setdefault(c, set()).add(i)
    rank = 0
    while rows:
        pi = min(rows, key=lambda i: (len(rows[i]), i))
        prow = rows.pop(pi)
        pc = min(prow, key=lambda c: (len(col_rows[c]), c))
        for c in prow:
            col_rows[c].discard(pi)
        inv = pow(prow[pc], -1, p)
        for si in sorted(col_rows[pc]):
            srow = rows[si]
            factor = srow[pc] * inv % p
            for c, v in prow.items():
                nv = (srow.get(c, 0) - factor * v) % p
                if nv:
                    if c not in srow:
                        col_rows[c].add(si)
                    srow[c] = nv
                elif c in srow:
                    del srow[c]
                    col_rows[c].discard(si)
            if not srow:
                del rows[si]
        rank += 1
    return rank


def _dense_rank(A: np.ndarray, p: int) -> int:
    A = np.array(A, dtype=np.int64) % p
    m, n = A.shape
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        inv = pow(int(A[r, c]), -1, p)
        A[r, c:] = A[r, c:] * inv % p
        below = r + 1 + np.flatnonzero(A[r + 1:, c])
        if below.size:
            A[below, c:] = (A[below, c:] - np.outer(A[below, c], A[r, c:])) % p
        r += 1
    return r


def _berlekamp_massey(seq: list[int], p: int) -> list[int]:
    """Connection polynomial (low degree first, constant 1) of a sequence over F_p."""
    C, B = [1], [1]
    L, m, b = 0, 1, 1
    for i, s in enumerate(seq):
        d = s
        for j in range(1, L + 1):
            d = (d + C[j] * seq[i - j]) % p
        if d == 0:
            m += 1
            continue
        coef = d * pow(b, -1, p) % p
        T = C[:]
        C = C + [0] * (len(B) + m - len(C))
        for j, v in enumerate(B):
            C[j + m] = (C[j + m] - coef * v) % p
        if 2 * L <= i:
            L, B, b, m = i + 1 - L, T, d, 1
        else:
            m += 1
    return C[: L + 1] + [0] * max(0, L + 1 - len(C))


def wiedemann_rank(M: SparseMatrix, seed: int) -> int:
    """Monte Carlo rank from the minimal polynomial of ``D1 A^T D2 A D1``.

    The estimate never exceeds the true rank; it is exact with high
    probability when p is large compared with the matrix size.
    """
    p = M.p
    rng = random.Random(seed)
    n = M.ncols
    if n == 0 or M.nnz == 0:
        return 0
    rows = np.array([r for r, _ in M.entries], dtype=np.int64)
    cols = np.array([c for _, c in M.entries], dtype=np.int64)
    vals = np.array(list(M.entries.values()), dtype=np.int64)
    d1 = np.array([rng.randrange(1, p) for _ in range(n)], dtype=np.int64)
    d2 = np.array([rng.randrange(1, p) for _ in range(M.nrows)], dtype=np.int64)

    def apply(x):
        x = x * d1 % p
        y = np.zeros(M.nrows, dtype=np.int64)
        np.add.at(y, rows, vals * x[cols] % p)
        y = y % p * d2 % p
        z = np.zeros(n, dtype=np.int64)
        np.add.at(z, cols, vals * y[rows] % p)
        return z % p * d1 % p

    u = np.array([rng.randrange(p) for _ in range(n)], dtype=np.int64)
    v = np.array([rng.randrange(p) for _ in range(n)], dtype=np.int64)
    bound = min(n, M.nrows)
    seq = []
    x = v
    for _ in range(2 * bound + 2):
        seq.append(int(u @ x % p))
        x = apply(x)
    conn = _berlekamp_massey(seq, p)
    deg = len(conn) - 1
    # minimal polynomial is the reversal of the connection polynomial
    trailing = 0
    while trailing < len(conn) and conn[len(conn) - 1 - trailing] == 0:
        trailing += 1
    return deg - min(trailing, 1) if trailing else deg


def rank(M: SparseMatrix, method: str = "auto", seed: int | None = None) -> int:
    """Exact rank over F_p.

    ``method`` is ``"sparse"``, ``"dense"``, ``"wiedemann"`` or ``"auto"``.
    The Wiedemann path needs a seed and is re-run with an independent
    seed; disagreement falls back to deterministic elimination.
    """
    if M.nnz == 0:
        return 0
    if method == "auto":
        if seed is not None and M.ncols >= WIEDEMANN_MIN_COLS:
            method = "wiedemann"
        else:
            method = "dense" if M.nrows * M.ncols <= DENSE_LIMIT and M.nnz * 8 > M.nrows * M.ncols / 8 else "sparse"
    if method == "dense":
        A = np.zeros((M.nrows, M.ncols), dtype=np.int64)
        for (r, c), v in M.entries.items():
            A[r, c] = v
        return _dense_rank(A, M.p)
    if method == "sparse":
        rows: list[dict] = [dict() for _ in range(M.nrows)]
        for (r, c), v in M.entries.items():
            rows[r][c] = v
        return _sparse_rank(rows, M.p)
    if method == "wiedemann":
        if seed is None:
            raise ValueError("the randomized rank path needs a seed")
        first = wiedemann_rank(M, seed)
        second = wiedemann_rank(M, seed + 0x9E3779B9)
        if first == second:
            return first
        return rank(M, method="sparse")
    raise ValueError(f"unknown rank method {method!r}")


def kernel_basis(M: SparseMatrix) -> list[list[int]]:
    """Basis of ``{v : M v = 0}`` from the reduced row echelon form."""
    p = M.p
    A = M.to_dense()
    m, n = M.nrows, M.ncols
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = pow(A[r][c], -1, p)
        A[r] = [v * inv % p for v in A[r]]
        for i in range(m):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [(a - f * b) % p for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    basis = []
    for free in (c for c in range(n) if c not in pivots):
        v = [0] * n
        v[free] = 1
        for i, c in enumerate(pivots):
            v[c] = -A[i][free] % p
        basis.append(v)
    return basis


# ----------------------------------------------------------------------------
# graded multiplication operators

@dataclass
class Block:
    """One independent piece of the operator.

    ``col_codes``/``row_codes`` are mixed-radix codes (base q, first
    variable most significant) of the source and target monomials, both in
    descending order, i.e. the canonical monomial order within a slice.
    """

    degree: int | None
    col_codes: np.ndarray
    row_codes: np.ndarray
    rows: np.ndarray  # local row index per entry
    cols: np.ndarray  # local column index per entry
    vals: np.ndarray
    p: int
    _rank: int | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.row_codes), len(self.col_codes)

    @property
    def matrix(self) -> SparseMatrix:
        nr, nc = self.shape
        return SparseMatrix.from_coo(nr, nc, self.rows.tolist(), self.cols.tolist(), self.vals.tolist(), self.p)

    def rank(self, seed: int | None = None) -> int:
        if self._rank is None:
            nr, nc = self.shape
            if nr == 1 or nc == 1:
                self._rank = 1
            elif nr * nc <= 64:
                self._rank = rank(self.matrix, method="sparse")
            elif seed is not None and nc >= WIEDEMANN_MIN_COLS:
                self._rank = rank(self.matrix, method="wiedemann", seed=seed)
            elif nr * nc <= DENSE_LIMIT:
                A = np.zeros((nr, nc), dtype=np.int64)
                A[self.rows, self.cols] = self.vals
                self._rank = _dense_rank(A, self.p)
            else:
                self._rank = rank(self.matrix, method="sparse")
        return self._rank


@dataclass
class GradedBlocks:
    """Multiplication by ``h`` on ``F_p[x]/m^[q]`` split into blocks.

    Columns that ``h`` sends to zero in ``A`` belong to no block; they are
    kernel vectors and are accounted for through ``slice_sizes``.
    """

    q: int
    p: int
    n: int
    weights: tuple[int, ...] | None
    shift: int | None  # weighted degree of h
    grading: list[tuple[int, ...]]
    blocks: list[Block]
    seed: int | None = None

    @property
    def dimension(self) -> int:
        return self.q ** self.n

    def slice_sizes(self) -> dict[int, int]:
        """Number of basis monomials in each weighted-degree slice of A."""
        if self.weights is None:
            raise NotHomogeneous("operator was built without a weight vector")
        top = (self.q - 1) * sum(self.weights)
        counts = monomial_counts(self.weights, top, box=self.q)
        return {t: c for t, c in enumerate(counts) if c}

    def rank(self) -> int:
        return sum(b.rank(self.seed) for b in self.blocks)

    def rank_by_degree(self) -> dict[int, int]:
        if self.weights is None:
            raise NotHomogeneous("operator was built without a weight vector")
        out: dict[int, int] = {}
        for b in self.blocks:
            out[b.degree] = out.get(b.degree, 0) + b.rank(self.seed)
        return dict(sorted(out.items()))

    def kernel_dims(self) -> dict[int, int]:
        ranks = self.rank_by_degree()
        dims = {t: size - ranks.get(t, 0) for t, size in self.slice_sizes().items()}
        total = sum(dims.values())
        if total != self.dimension - self.rank():
            raise AssertionError("rank-nullity violated in graded operator")
        return dims


def decode(codes: Iterable[int], q: int, n: int) -> list[tuple[int, ...]]:
    out = []
    for code in codes:
        code = int(code)
        exp = [0] * n
        for i in range(n - 1, -1, -1):
            code, exp[i] = divmod(code, q)
        out.append(tuple(exp))
    return out


def fine_grading(h: Poly) -> list[tuple[int, ...]]:
    """Integer vectors whose pairings with exponents grade ``h`` homogeneously."""
    exps = list(h.terms)
    if not exps:
        return [tuple(int(i == j) for j in range(h.ambient.n)) for i in range(h.ambient.n)]
    base = exps[0]
    diffs = [[a - b for a, b in zip(e, base)] for e in exps[1:]]
    diffs = [d for d in diffs if any(d)]
    return _exact.integer_orthogonal_basis(diffs, h.ambient.n)


def mult_operator(h: Poly, q: int, weights: Sequence[int] | None = None,
                  seed: int | None = None, max_entries: int | None = None) -> GradedBlocks:
    """Blocks of multiplication by ``h`` on the monomial basis of ``F_p[x]/m^[q]``.

    ``h`` must already be truncated below ``q``.  With ``weights``, ``h``
    must be homogeneous for them and every block records its source degree;
    without, only ranks are available.
    """
    if h.modulus is None:
        raise ValueError("operator needs prime-field coefficients")
    if any(max(e, default=0) >= q for e in h.terms):
        raise ValueError("h must be truncated below q before building the operator")
    n = h.ambient.n
    p = h.modulus
    shift = None
    if weights is not None:
        weights = tuple(int(w) for w in weights)
        degs = h.degrees(weights)
        if len(degs) > 1:
            raise NotHomogeneous(f"h is not homogeneous for weights {weights}")
        shift = degs.pop() if degs else 0
    grading = fine_grading(h)
    radix = np.array([q ** (n - 1 - i) for i in range(n)], dtype=np.int64)

    total = 0
    for e in h.terms:
        size = 1
        for a in e:
            size *= q - a
        total += size
    if max_entries is not None and total > max_entries:
        raise BudgetExceeded(f"operator has {total} entries, budget is {max_entries}", partial=total)

    src_parts, dst_parts, val_parts = [], [], []
    for e, c in h.terms.items():
        dims = [q - a for a in e]
        grid = np.indices(dims, dtype=np.int64).reshape(n, -1)
        src = radix @ grid
        dst = src + int(np.dot(radix, np.array(e, dtype=np.int64)))
        src_parts.append(src)
        dst_parts.append(dst)
        val_parts.append(np.full(src.shape, c, dtype=np.int64))
    if src_parts:
        src = np.concatenate(src_parts)
        dst = np.concatenate(dst_parts)
        vals = np.concatenate(val_parts)
    else:
        src = dst = vals = np.zeros(0, dtype=np.int64)

    blocks: list[Block] = []
    if src.size:
        exps = np.stack([(src // q ** (n - 1 - i)) % q for i in range(n)])
        G = np.array(grading, dtype=np.int64).reshape(len(grading), n)
        keys = G @ exps if len(grading) else np.zeros((0, src.size), dtype=np.int64)
        if weights is not None:
            degree = np.array(weights, dtype=np.int64) @ exps
        else:
            degree = np.zeros(src.size, dtype=np.int64)
        # sort: by degree, then fine key, then descending source code
        order = np.lexsort((-dst, -src) + tuple(keys[::-1]) + (degree,))
        src, dst, vals, degree = src[order], dst[order], vals[order], degree[order]
        keys = keys[:, order]
        if keys.shape[0]:
            change = np.any(keys[:, 1:] != keys[:, :-1], axis=0) | (degree[1:] != degree[:-1])
        else:
            change = degree[1:] != degree[:-1]
        bounds = np.concatenate(([0], np.flatnonzero(change) + 1, [src.size]))
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            s, d, v = src[lo:hi], dst[lo:hi], vals[lo:hi]
            col_codes, cols = np.unique(-s, return_inverse=True)
            row_codes, rows = np.unique(-d, return_inverse=True)
            blocks.append(Block(
                degree=int(degree[lo]) if weights is not None else None,
                col_codes=-col_codes, row_codes=-row_codes,
                rows=rows.reshape(-1), cols=cols.reshape(-1), vals=v, p=p,
            ))
    return GradedBlocks(q=q, p=p, n=n, weights=weights, shift=shift, grading=grading,
                        blocks=blocks, seed=seed)


def mult_operator_matrix(h: Poly, q: int) -> SparseMatrix:
    """The whole ``q^n x q^n`` operator, assembled term by term (no grading)."""
    n = h.ambient.n
    p = h.modulus
    from itertools import product

    index = {}
    for code, exp in enumerate(product(range(q), repeat=n)):
        index[exp] = code
    rows, cols, vals = [], [], []
    for a, j in index.items():
        for b, c in h.terms.items():
            t = tuple(x + y for x, y in zip(a, b))
            if max(t, default=0) < q:
                rows.append(index[t])
                cols.append(j)
                vals.append(c)
    return SparseMatrix.from_coo(q ** n, q ** n, rows, cols, vals, p)


def kernel_min_degree(blocks: GradedBlocks, relation_degree: int | None = None) -> tuple[int, dict[int, int]]:
    """Lowest weighted degree of the splitting ideal, plus kernel dimensions.

    Without a relation this is ``min(min{t : ker_t > 0}, q * min(w))``.
    For a hypersurface ``S/(g)`` the kernel always contains ``g`` itself,
    which is zero in the ring, so the answer is the least ``t >= 1`` with
    ``dim R_t > rank_t``; here ``rank_t`` is the dimension of the degree-t
    part of ``R/I_e``.
    """
    if blocks.weights is None:
        raise NotHomogeneous("degree profile needs a weight vector")
    w = blocks.weights
    q = blocks.q
    dims = blocks.kernel_dims()
    ranks = blocks.rank_by_degree()
    if relation_degree is None:
        with_kernel = [t for t, k in dims.items() if k > 0 and t >= 1]
        return min(with_kernel + [q * min(w)]), dims
    top = (q - 1) * sum(w) + relation_degree + max(w)
    while True:
        S = monomial_counts(w, top)
        for t in range(1, top + 1):
            below = S[t - relation_degree] if t >= relation_degree else 0
            if S[t] - below > ranks.get(t, 0):
                return t, dims
        top *= 2
