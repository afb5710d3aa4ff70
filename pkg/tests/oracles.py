"""Small brute-force references used only by the tests."""

from __future__ import annotations

import itertools

from fsplitlab.algebra import Poly


def rank_mod_p(rows, p):
    """Row-reduce a list of lists over F_p; no library code involved."""
    A = [[v % p for v in r] for r in rows]
    if not A:
        return 0
    rank, ncols = 0, len(A[0])
    for c in range(ncols):
        piv = next((i for i in range(rank, len(A)) if A[i][c]), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        inv = pow(A[rank][c], -1, p)
        A[rank] = [v * inv % p for v in A[rank]]
        for i in range(len(A)):
            if i != rank and A[i][c]:
                f = A[i][c]
                A[i] = [(a - f * b) % p for a, b in zip(A[i], A[rank])]
        rank += 1
    return rank


def monomials_of_degree(n, d, weights=None):
    weights = weights or (1,) * n
    out = []
    for e in itertools.product(*[range(d // w + 1) for w in weights]):
        if sum(a * w for a, w in zip(e, weights)) == d:
            out.append(e)
    return out


def in_homogeneous_ideal(f: Poly, gens: list[Poly], p: int) -> bool:
    """Membership of ``f`` in an ideal with homogeneous generators, degree by degree."""
    n = f.ambient.n
    for d in sorted(f.degrees()):
        fd = f.homogeneous_component(d)
        basis = monomials_of_degree(n, d)
        index = {m: i for i, m in enumerate(basis)}
        rows = []
        for g in gens:
            gd = min(g.degrees())
            if gd > d:
                continue
            for m in monomials_of_degree(n, d - gd):
                row = [0] * len(basis)
                for e, c in g.terms.items():
                    row[index[tuple(a + b for a, b in zip(e, m))]] += c
                rows.append(row)
        target = [0] * len(basis)
        for e, c in fd.terms.items():
            target[index[e]] = c
        if rank_mod_p(rows + [target], p) != rank_mod_p(rows, p):
            return False
    return True


def splitting_colength_brute(g: Poly, q: int) -> int:
    """dim of the image of multiplication by g^(q-1) on the box of exponents < q."""
    p = g.modulus
    n = g.ambient.n
    h = {(0,) * n: 1}
    for _ in range(q - 1):
        nxt = {}
        for e1, c1 in h.items():
            for e2, c2 in g.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if max(e) < q:
                    nxt[e] = (nxt.get(e, 0) + c1 * c2) % p
        h = {e: c for e, c in nxt.items() if c}
    box = list(itertools.product(range(q), repeat=n))
    index = {m: i for i, m in enumerate(box)}
    rows = []
    for m in box:
        row = [0] * len(box)
        for e, c in h.items():
            t = tuple(a + b for a, b in zip(e, m))
            if max(t) < q:
                row[index[t]] = c
        rows.append(row)
    return rank_mod_p(rows, p)
