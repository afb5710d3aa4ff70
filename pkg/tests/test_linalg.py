from __future__ import annotations

import random

import numpy as np
import pytest

from fsplitlab.algebra import Ambient, Poly, parse_poly, power_truncated, reduce_mod_p
from fsplitlab.groebner import MonomialOrder, buchberger, colon_ideal, normal_form
from fsplitlab.linalg import (BudgetExceeded, NotHomogeneous, SparseMatrix, decode, kernel_basis,
                              kernel_min_degree, mult_operator, mult_operator_matrix, rank, wiedemann_rank)

from oracles import rank_mod_p, splitting_colength_brute


def random_matrix(rng, m, n, p, density):
    rows = [[rng.randrange(1, p) if rng.random() < density else 0 for _ in range(n)] for _ in range(m)]
    return rows, SparseMatrix.from_dense(rows, p)


def test_rank_trivial():
    assert rank(SparseMatrix.identity(7, 5)) == 7
    assert rank(SparseMatrix(4, 6, 5, {})) == 0


def test_sparse_matrix_rejects_out_of_range():
    with pytest.raises(IndexError):
        SparseMatrix.from_coo(2, 2, [2], [0], [1], 5)


def test_from_coo_merges_duplicates():
    M = SparseMatrix.from_coo(2, 2, [0, 0, 1], [0, 0, 1], [2, 3, 4], 5)
    assert M.entries == {(1, 1): 4}


@pytest.mark.parametrize("method", ["sparse", "dense", "auto"])
def test_rank_random_against_oracle(method):
    rng = random.Random(42)
    for _ in range(50):
        rows, M = random_matrix(rng, 40, 40, 5, 0.1)
        assert rank(M, method=method) == rank_mod_p(rows, 5)


def test_rank_of_transpose():
    rng = random.Random(7)
    for _ in range(30):
        rows, M = random_matrix(rng, rng.randrange(1, 30), rng.randrange(1, 30), 7, 0.2)
        assert rank(M) == rank(M.transpose())


def test_rank_structured_deficiency():
    rng = random.Random(3)
    p = 11
    for r in (0, 1, 5, 17):
        A = np.array([[rng.randrange(p) for _ in range(r)] for _ in range(25)], dtype=np.int64).reshape(25, r)
        B = np.array([[rng.randrange(p) for _ in range(30)] for _ in range(r)], dtype=np.int64).reshape(r, 30)
        C = (A @ B) % p
        M = SparseMatrix.from_dense(C.tolist(), p)
        assert rank(M, method="sparse") == rank(M, method="dense") == rank_mod_p(C.tolist(), p) <= r


def test_wiedemann_agrees_on_large_prime():
    rng = random.Random(9)
    p = 1_000_003
    for _ in range(10):
        rows, M = random_matrix(rng, 30, 30, p, 0.08)
        exact = rank_mod_p(rows, p)
        assert wiedemann_rank(M, seed=1) <= exact
        assert rank(M, method="wiedemann", seed=5) == exact


def test_wiedemann_needs_seed():
    with pytest.raises(ValueError):
        rank(SparseMatrix.identity(3, 5), method="wiedemann")


def test_kernel_vectors_are_in_kernel():
    rng = random.Random(13)
    for _ in range(20):
        rows, M = random_matrix(rng, 12, 15, 7, 0.3)
        K = kernel_basis(M)
        assert len(K) == 15 - rank_mod_p(rows, 7)
        for v in K:
            assert not any(M.matvec(v))


# ---------------------------------------------------------------- multiplication operators

XYZ = Ambient.of("x,y,z")


def h_for(text, q, p, amb=XYZ):
    g = reduce_mod_p(parse_poly(text, amb), p)
    return power_truncated(g, q - 1, q)


@pytest.mark.parametrize("q", [2, 3, 5])
def test_operator_of_one_is_identity(q):
    one = Poly.one(XYZ, 5)
    blocks = mult_operator(one, q, (1, 1, 1))
    assert blocks.rank() == q ** 3
    m, dims = kernel_min_degree(blocks)
    assert m == q and not any(dims.values())


def test_operator_of_top_monomial():
    x = Ambient.of("x")
    for q in (3, 7):
        h = Poly.monomial(x, [q - 1], 1, 7)
        assert mult_operator(h, q, (1,)).rank() == 1


def test_operator_rejects_untruncated_and_inhomogeneous():
    with pytest.raises(ValueError):
        mult_operator(reduce_mod_p(parse_poly("x^3", XYZ), 3), 3)
    with pytest.raises(NotHomogeneous):
        mult_operator(reduce_mod_p(parse_poly("x + y^2", XYZ), 3), 3, (1, 1, 1))


def test_operator_budget():
    h = h_for("x*y - z^2", 5, 5)
    with pytest.raises(BudgetExceeded):
        mult_operator(h, 5, (1, 1, 1), max_entries=10)


CASES = [
    ("x*y - z^2", (1, 1, 1)),
    ("x^2 + y^2 + z^2", (1, 1, 1)),
    ("x*y - z^3", (3, 3, 2)),
    ("x^2 + y^3 + z^4", (6, 4, 3)),
    ("x^2 + y^2*z + z^3", (3, 2, 2)),
    ("x*y*z", (1, 1, 1)),
]


@pytest.mark.parametrize("text,w", CASES)
@pytest.mark.parametrize("p,e", [(3, 1), (5, 1), (7, 1), (3, 2)])
def test_graded_rank_matches_dense(text, w, p, e):
    q = p ** e
    h = h_for(text, q, p)
    blocks = mult_operator(h, q, w)
    dense = mult_operator_matrix(h, q)
    assert blocks.rank() == rank(dense, method="dense")
    assert sum(blocks.kernel_dims().values()) == q ** 3 - blocks.rank()
    assert sum(blocks.slice_sizes().values()) == q ** 3


@pytest.mark.parametrize("text,w", CASES[:3])
def test_graded_rank_matches_brute_force(text, w):
    g = reduce_mod_p(parse_poly(text, XYZ), 3)
    assert mult_operator(h_for(text, 3, 3), 3, w).rank() == splitting_colength_brute(g, 3)


def test_ungraded_operator_still_ranks():
    h = h_for("x*y - z^2 + x^3", 3, 3)
    blocks = mult_operator(h, 3)
    assert blocks.rank() == rank(mult_operator_matrix(h, 3))
    with pytest.raises(NotHomogeneous):
        blocks.kernel_dims()


def test_blocks_respect_degree_and_codes():
    q = 5
    h = h_for("x*y - z^2", q, 5)
    blocks = mult_operator(h, q, (1, 1, 1))
    shift = blocks.shift
    assert shift == 2 * (q - 1)
    for b in blocks.blocks:
        src = decode(b.col_codes, q, 3)
        dst = decode(b.row_codes, q, 3)
        assert all(sum(e) == b.degree for e in src)
        assert all(sum(e) == b.degree + shift for e in dst)
        # canonical order within a slice: descending codes
        assert list(b.col_codes) == sorted(b.col_codes, reverse=True)


def test_a1_kernel_min_degree_matches_colon_ideal():
    # m_1 for xy - z^2 at p = 3 from the Groebner generators of (m^[3] : g^2) + (g)
    p = q = 3
    g = reduce_mod_p(parse_poly("x*y - z^2", XYZ), p)
    h = power_truncated(g, q - 1, q)
    blocks = mult_operator(h, q, (1, 1, 1))
    m_e, _ = kernel_min_degree(blocks, relation_degree=2)
    bracket = [Poly.monomial(XYZ, [q if j == i else 0 for j in range(3)], 1, p) for i in range(3)]
    J = colon_ideal(bracket, h)
    order = MonomialOrder.grevlex(3)
    # I_e in R: drop generators that lie in (g); the lowest degree of what is left is m_e
    gb = buchberger(list(J.generators), order)
    gbg = buchberger([g], order)
    degrees = [min(c.degrees()) for c in gb if normal_form(c, gbg, order)]
    assert m_e == min(degrees) == 2


def test_kernel_min_degree_weighted_ambient():
    for q in (7, 11, 49):
        blocks = mult_operator(Poly.one(Ambient.of("y,z"), 7), q, (5, 3))
        assert kernel_min_degree(blocks)[0] == 3 * q
