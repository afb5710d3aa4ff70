"""Buchberger's algorithm over F_p, normal forms, colon ideals and colengths.

This is the slow, general path.  The Frobenius measurements use it to
cross-check the linear-algebra kernel and to compute colengths of
arbitrary ideals such as powers of the maximal ideal.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from .algebra import INF, Ambient, Poly
from .linalg import BudgetExceeded

DEFAULT_PAIR_BUDGET = 200_000


class MonomialOrder:
    """A monomial order given by a sort key: larger key means larger monomial.

    Kinds: ``lex``, ``grevlex``, ``wgrevlex`` (weighted degree first, then
    reverse lexicographic tie-break) and ``elim`` (graded reverse lex on
    the first ``block`` variables, ties broken by graded reverse lex on
    the rest).
    """

    def __init__(self, kind: str, n: int, weights: Sequence[int] | None = None, block: int | None = None):
        if kind not in ("lex", "grevlex", "wgrevlex", "elim"):
            raise ValueError(f"unknown monomial order {kind!r}")
        if kind == "wgrevlex":
            if weights is None or len(weights) != n or min(weights) < 1:
                raise ValueError("wgrevlex needs one positive weight per variable")
            weights = tuple(int(w) for w in weights)
        if kind == "elim" and not (block is not None and 0 < block < n):
            raise ValueError("elimination order needs 0 < block < n")
        self.kind, self.n, self.weights, self.block = kind, n, weights, block

    @classmethod
    def lex(cls, n):
        return cls("lex", n)

    @classmethod
    def grevlex(cls, n):
        return cls("grevlex", n)

    @classmethod
    def wgrevlex(cls, weights):
        return cls("wgrevlex", len(weights), weights=weights)

    @classmethod
    def elimination(cls, block, n):
        return cls("elim", n, block=block)

    def __repr__(self):
        extra = f", weights={self.weights}" if self.weights else ""
        extra += f", block={self.block}" if self.block else ""
        return f"MonomialOrder({self.kind!r}, n={self.n}{extra})"

    def __eq__(self, other):
        return isinstance(other, MonomialOrder) and (self.kind, self.n, self.weights, self.block) == (
            other.kind, other.n, other.weights, other.block)

    def __hash__(self):
        return hash((self.kind, self.n, self.weights, self.block))

    def key(self, e: tuple[int, ...]) -> tuple[int, ...]:
        kind = self.kind
        if kind == "lex":
            return e
        if kind == "grevlex":
            return (sum(e),) + tuple(-a for a in reversed(e))
        if kind == "wgrevlex":
            return (sum(w * a for w, a in zip(self.weights, e)),) + tuple(-a for a in reversed(e))
        k = self.block
        head, tail = e[:k], e[k:]
        return ((sum(head),) + tuple(-a for a in reversed(head))
                + (sum(tail),) + tuple(-a for a in reversed(tail)))


@dataclass
class IdealBasis:
    generators: tuple[Poly, ...]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __init__(self, generators: Sequence[Poly]):
        gens = tuple(generators)
        if not gens:
            raise ValueError("an ideal basis needs at least one generator")
        first = gens[0]
        for g in gens[1:]:
            first._check_compatible(g)
        if first.modulus is None:
            raise ValueError("ideal generators must have prime-field coefficients")
        self.generators = gens
        self._cache = {}

    @property
    def ambient(self) -> Ambient:
        return self.generators[0].ambient

    @property
    def modulus(self) -> int:
        return self.generators[0].modulus

    def groebner(self, order: MonomialOrder | None = None, pair_budget: int = DEFAULT_PAIR_BUDGET) -> list[Poly]:
        order = order or MonomialOrder.grevlex(self.ambient.n)
        if order not in self._cache:
            self._cache[order] = buchberger(self, order, pair_budget)
        return self._cache[order]


# ----------------------------------------------------------------------------
# dict-level kernels

def _divides(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def _neg(key):
    return tuple(-k for k in key)


class _Reducer:
    def __init__(self, order: MonomialOrder, p: int):
        self.key = order.key
        self.p = p

    def lead(self, f: dict):
        return max(f, key=self.key)

    def monic(self, f: dict) -> dict:
        lm = self.lead(f)
        inv = pow(f[lm], -1, self.p)
        return {e: c * inv % self.p for e, c in f.items()}

    def reduce(self, f: dict, basis: list[tuple[dict, tuple]], full: bool = True) -> dict:
        """Remainder of ``f`` on division by monic ``basis`` (pairs of poly and lead)."""
        p, key = self.p, self.key
        f = dict(f)
        rem = {}
        heap = [(_neg(key(e)), e) for e in f]
        heapq.heapify(heap)
        while heap:
            _, e = heapq.heappop(heap)
            c = f.get(e)
            if not c:
                continue
            for g, lm in basis:
                if _divides(lm, e):
                    break
            else:
                rem[e] = c
                del f[e]
                if not full:
                    rem.update(f)
                    return rem
                continue
            shift = tuple(x - y for x, y in zip(e, lm))
            for ge, gc in g.items():
                ne = tuple(x + y for x, y in zip(ge, shift))
                old = f.get(ne)
                nv = ((old or 0) - c * gc) % p
                if nv:
                    if old is None:
                        heapq.heappush(heap, (_neg(key(ne)), ne))
                    f[ne] = nv
                elif old is not None:
                    del f[ne]
        return rem

    def spoly(self, f: dict, lf, g: dict, lg) -> dict:
        p = self.p
        L = _lcm(lf, lg)
        sf = tuple(x - y for x, y in zip(L, lf))
        sg = tuple(x - y for x, y in zip(L, lg))
        out: dict = {}
        for e, c in f.items():
            ne = tuple(x + y for x, y in zip(e, sf))
            out[ne] = (out.get(ne, 0) + c) % p
        for e, c in g.items():
            ne = tuple(x + y for x, y in zip(e, sg))
            out[ne] = (out.get(ne, 0) - c) % p
        return {e: c for e, c in out.items() if c}


def _groebner_dicts(polys: list[dict], order: MonomialOrder, p: int, pair_budget: int) -> list[dict]:
    R = _Reducer(order, p)
    key = order.key
    G: list[dict] = []
    leads: list[tuple] = []
    pairs: set[tuple[int, int]] = set()
    queue: list = []  # (sugar-free normal strategy key, i, j)

    def add(f):
        f = R.monic(f)
        G.append(f)
        lf = R.lead(f)
        leads.append(lf)
        j = len(G) - 1
        for i in range(j):
            L = _lcm(leads[i], lf)
            pairs.add((i, j))
            heapq.heappush(queue, (sum(L), key(L), i, j))

    for f in polys:
        if f:
            r = R.reduce(f, list(zip(G, leads)))
            if r:
                add(r)

    processed = 0
    while queue:
        _, _, i, j = heapq.heappop(queue)
        pairs.discard((i, j))
        li, lj = leads[i], leads[j]
        L = _lcm(li, lj)
        # product criterion
        if all(a == 0 or b == 0 for a, b in zip(li, lj)):
            continue
        # chain criterion
        chained = False
        for k in range(len(G)):
            if k in (i, j) or not _divides(leads[k], L):
                continue
            if (min(i, k), max(i, k)) not in pairs and (min(j, k), max(j, k)) not in pairs:
                chained = True
                break
        if chained:
            continue
        processed += 1
        if processed > pair_budget:
            raise BudgetExceeded(f"Buchberger exceeded the pair budget of {pair_budget}", partial=len(G))
        s = R.spoly(G[i], li, G[j], lj)
        if not s:
            continue
        r = R.reduce(s, list(zip(G, leads)))
        if r:
            add(r)

    # minimise, then interreduce
    keep = []
    for i, li in enumerate(leads):
        dominated = False
        for j, lj in enumerate(leads):
            if j == i:
                continue
            if _divides(lj, li) and (lj != li or j < i):
                dominated = True
                break
        if not dominated:
            keep.append(i)
    basis = [(G[i], leads[i]) for i in keep]
    reduced = []
    for idx, (g, lg) in enumerate(basis):
        others = [b for k, b in enumerate(basis) if k != idx]
        tail = {e: c for e, c in g.items() if e != lg}
        tail = R.reduce(tail, others) if tail else {}
        tail[lg] = 1
        reduced.append(tail)
    reduced.sort(key=lambda f: key(R.lead(f)))
    return reduced


def _to_dicts(polys: Sequence[Poly]) -> list[dict]:
    return [dict(f.terms) for f in polys]


def buchberger(gens: IdealBasis | Sequence[Poly], order: MonomialOrder | None = None,
               pair_budget: int = DEFAULT_PAIR_BUDGET) -> list[Poly]:
    """Reduced Groebner basis, sorted by increasing leading monomial.

    S-pairs are taken in normal-strategy order (smallest lcm first) and
    pruned with the product and chain criteria.  More than ``pair_budget``
    reduced S-pairs raises :class:`BudgetExceeded`.
    """
    if not isinstance(gens, IdealBasis):
        gens = IdealBasis(gens)
    amb, p = gens.ambient, gens.modulus
    order = order or MonomialOrder.grevlex(amb.n)
    if order.n != amb.n:
        raise ValueError("order and ring have different numbers of variables")
    polys = sorted(_to_dicts(gens.generators), key=lambda f: sorted(f.items()))
    out = _groebner_dicts(polys, order, p, pair_budget)
    return [Poly._raw(amb, f, p) for f in out]


def leading_monomial(f: Poly, order: MonomialOrder) -> tuple[int, ...]:
    if not f:
        raise ValueError("zero polynomial has no leading monomial")
    return max(f.terms, key=order.key)


def normal_form(f: Poly, gb: Sequence[Poly], order: MonomialOrder) -> Poly:
    """Fully reduced remainder of ``f`` modulo a Groebner basis."""
    if f.modulus is None:
        raise ValueError("normal_form needs prime-field coefficients")
    R = _Reducer(order, f.modulus)
    basis = [(R.monic(dict(g.terms)), leading_monomial(g, order)) for g in gb if g]
    return Poly._raw(f.ambient, R.reduce(dict(f.terms), basis), f.modulus)


def _exact_divide(a: dict, b: dict, order: MonomialOrder, p: int) -> dict:
    R = _Reducer(order, p)
    lb = R.lead(b)
    inv = pow(b[lb], -1, p)
    a = dict(a)
    quot: dict = {}
    while a:
        la = R.lead(a)
        if not _divides(lb, la):
            raise ArithmeticError("division is not exact")
        c = a[la] * inv % p
        shift = tuple(x - y for x, y in zip(la, lb))
        quot[shift] = c
        for e, v in b.items():
            ne = tuple(x + y for x, y in zip(e, shift))
            nv = (a.get(ne, 0) - c * v) % p
            if nv:
                a[ne] = nv
            else:
                a.pop(ne, None)
    return quot


def colon_ideal(I: IdealBasis | Sequence[Poly], h: Poly, order: MonomialOrder | None = None,
                pair_budget: int = DEFAULT_PAIR_BUDGET) -> IdealBasis:
    """Generators of ``(I : h) = {c : c h in I}``.

    ``I ∩ (h)`` is obtained by eliminating a tag variable t from
    ``t I + (1 - t) h``; each generator of the intersection is then
    divided by ``h``.
    """
    if not isinstance(I, IdealBasis):
        I = IdealBasis(I)
    if not h:
        raise ValueError("colon by the zero polynomial")
    I.generators[0]._check_compatible(h)
    amb, p = I.ambient, I.modulus
    n = amb.n
    tagged = []
    for f in I.generators:
        tagged.append({(1,) + e: c for e, c in f.terms.items()})
    hh: dict = {}
    for e, c in h.terms.items():
        hh[(0,) + e] = c
        hh[(1,) + e] = -c % p
    tagged.append(hh)
    elim = MonomialOrder.elimination(1, n + 1)
    gb = _groebner_dicts(sorted(tagged, key=lambda f: sorted(f.items())), elim, p, pair_budget)
    inner = order or MonomialOrder.grevlex(n)
    hd = dict(h.terms)
    quotients = []
    for g in gb:
        if all(e[0] == 0 for e in g):
            q = _exact_divide({e[1:]: c for e, c in g.items()}, hd, inner, p)
            quotients.append(Poly._raw(amb, q, p))
    if not quotients:
        raise ArithmeticError("intersection with (h) came out empty")
    return IdealBasis(quotients)


def _count_standard(leads: tuple[tuple[int, ...], ...], n: int):
    """Monomials not divisible by any lead; INF when there are infinitely many."""

    @lru_cache(maxsize=None)
    def count(gens: frozenset, k: int):
        # standard monomials in variables k..n-1 of the monomial ideal ``gens``
        if any(all(a == 0 for a in g) for g in gens):
            return 0
        if k == n:
            return 1
        pure = [g[0] for g in gens if all(a == 0 for a in g[1:])]
        if not pure:
            return INF
        d = min(pure)
        total = 0
        for j in range(d):
            colon = frozenset(
                (0,) + g[1:] for g in gens if g[0] <= j
            )
            sub = count(frozenset(g[1:] for g in colon), k + 1)
            if sub is INF:
                return INF
            total += sub
        return total

    return count(frozenset(leads), 0)


def colength(I: IdealBasis | Sequence[Poly], order: MonomialOrder | None = None,
             pair_budget: int = DEFAULT_PAIR_BUDGET):
    """``dim_k S/I`` as the number of standard monomials (``INF`` if infinite)."""
    if not isinstance(I, IdealBasis):
        I = IdealBasis(I)
    order = order or MonomialOrder.grevlex(I.ambient.n)
    gb = I.groebner(order, pair_budget)
    leads = tuple(sorted(leading_monomial(g, order) for g in gb))
    return _count_standard(leads, I.ambient.n)


def standard_monomials(I: IdealBasis | Sequence[Poly], order: MonomialOrder | None = None) -> list[tuple[int, ...]]:
    """All standard monomials of a zero-dimensional ideal."""
    if not isinstance(I, IdealBasis):
        I = IdealBasis(I)
    n = I.ambient.n
    order = order or MonomialOrder.grevlex(n)
    gb = I.groebner(order)
    leads = [leading_monomial(g, order) for g in gb]
    bounds = []
    for i in range(n):
        pure = [l[i] for l in leads if all(a == 0 for j, a in enumerate(l) if j != i)]
        if not pure:
            raise ValueError("ideal is not zero-dimensional")
        bounds.append(min(pure))
    out = []

    def rec(prefix):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        i = len(prefix)
        for a in range(bounds[i]):
            cand = prefix + [a]
            if any(_divides(l[: i + 1], cand) and all(x == 0 for x in l[i + 1:]) for l in leads):
                break
            rec(cand)

    rec([])
    return [m for m in out if not any(_divides(l, m) for l in leads)]
