"""Threshold sequences, splitting ideals and finite-level invariants.

For a hypersurface ``R = S/(g)`` with ``S = F_p[x_1..x_n]`` and
``q = p^e``, an element ``c`` of ``S`` lies in the preimage of ``I_e(R)``
iff ``c * g^(q-1)`` lies in ``m^[q]``.  So ``I_e`` is read off the kernel
of multiplication by ``h = g^(q-1)`` on ``A = S/m^[q]`` and
``l(R/I_e) = rank``.  For the ambient ring ``I_e = m^[q]``.

Threshold counters ``nu_e(f)`` are computed by descent through Frobenius
roots: writing ``r = sum r_i p^i`` gives
``f^r g^(q-1) = prod_i (f^(r_i) g^(p-1))^(p^i)``, and membership in
``m^[q]`` can be decided one base-p digit at a time, keeping only a
linear basis of the surviving roots.  This avoids ever forming
``f^r g^(q-1)``, whose support grows like ``q^n``.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence

from .algebra import (INF, Ambient, Poly, check_prime, parse_poly, power_truncated,
                      reduce_mod_p, weighted_order)
from .groebner import IdealBasis, colength
from .linalg import (BudgetExceeded, kernel_min_degree, mult_operator, mult_operator_matrix,
                     rank as matrix_rank)

DEFAULT_MULTISET_BUDGET = 100_000


class NotFPure(ArithmeticError):
    """The ring is not F-split at the requested level, so ``nu_e`` is undefined."""


@dataclass(frozen=True)
class RingPresentation:
    """``S = F_p[vars]`` with positive weights, optionally modulo one relation.

    ``relation`` keeps the integer-coefficient polynomial; ``relation_p`` is
    its reduction at the active prime.
    """

    ambient: Ambient
    p: int
    relation: Poly | None = None
    label: str = ""
    relation_p: Poly | None = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        check_prime(self.p)
        g = self.relation
        if g is None:
            object.__setattr__(self, "relation_p", None)
            return
        if g.ambient != self.ambient:
            raise ValueError("relation lives in a different ambient ring")
        if not g:
            raise ValueError("relation must be nonzero")
        if g.modulus not in (None, self.p):
            raise ValueError("relation was reduced at a different prime")
        gp = g if g.modulus == self.p else reduce_mod_p(g, self.p)
        if not gp:
            raise ValueError(f"relation vanishes modulo {self.p}")
        if gp.constant_term():
            raise ValueError("relation must vanish at the origin")
        object.__setattr__(self, "relation_p", gp)

    @classmethod
    def from_text(cls, names, p: int, relation: str | None = None, weights=None, label: str = ""):
        amb = Ambient.of(names, weights)
        g = parse_poly(relation, amb) if relation is not None else None
        return cls(amb, p, g, label)

    def at_prime(self, p: int) -> "RingPresentation":
        return RingPresentation(self.ambient, p, self.relation, self.label)

    @property
    def n(self) -> int:
        return self.ambient.n

    @property
    def is_hypersurface(self) -> bool:
        return self.relation is not None

    @property
    def dimension(self) -> int:
        return self.n - 1 if self.is_hypersurface else self.n

    @property
    def weights(self) -> tuple[int, ...]:
        return self.ambient.weights

    @property
    def is_standard_graded(self) -> bool:
        return self.ambient.is_standard

    @property
    def relation_weighted_homogeneous(self) -> bool:
        return self.relation_p is None or self.relation_p.is_homogeneous(self.weights)

    @property
    def relation_degree(self) -> int | None:
        if self.relation_p is None or not self.relation_weighted_homogeneous:
            return None
        return weighted_order(self.relation_p, self.weights)

    def is_normal(self) -> bool:
        """Certified normality (False means not certified, not necessarily non-normal).

        A hypersurface satisfies S2, so it is normal iff regular in
        codimension one.  Certified when ``g`` has a linear term, or when
        the singular locus ``V(g, dg)`` is the origin alone and ``d >= 2``.
        """
        g = self.relation_p
        if g is None or weighted_order(g) == 1:
            return True
        if self.dimension < 2:
            return False
        gens = [g] + [d for d in partials(g) if d]
        return colength(IdealBasis(gens)) is not INF

    @property
    def order_is_exact(self) -> bool:
        """Plain order equals normalized order (regular or standard-graded normal)."""
        if self.relation is None:
            return True
        return self.is_standard_graded and self.relation_weighted_homogeneous and self.is_normal()

    def element(self, f: Poly | str) -> Poly:
        """An element of ``S`` over F_p, checked to lie in the maximal ideal."""
        if isinstance(f, str):
            f = parse_poly(f, self.ambient)
        if f.ambient.names != self.ambient.names:
            raise ValueError("element lives in a different ambient ring")
        f = Poly._raw(self.ambient, dict(f.terms), f.modulus)
        if f.modulus is None:
            f = reduce_mod_p(f, self.p)
        elif f.modulus != self.p:
            raise ValueError("element was reduced at a different prime")
        if not f:
            raise ValueError(f"element vanishes modulo {self.p}")
        if f.constant_term():
            raise ValueError("element is a unit; thresholds need f in the maximal ideal")
        return f


def partials(g: Poly) -> list[Poly]:
    out = []
    for i in range(g.ambient.n):
        acc = {}
        for e, c in g.terms.items():
            if e[i]:
                ne = e[:i] + (e[i] - 1,) + e[i + 1:]
                acc[ne] = c * e[i]
        out.append(Poly(g.ambient, acc, g.modulus))
    return out


@dataclass(frozen=True)
class FrobeniusProfile:
    p: int
    e: int
    q: int
    dimension: int
    colength_Ie: int
    s_e: Fraction
    m_e: int | None
    alpha_e: Fraction | None
    order_is_exact: bool
    nu_f: int | None = None
    mu_f: int | None = None

    def __post_init__(self):
        if self.nu_f is not None and self.mu_f != self.nu_f + 1:
            raise AssertionError("mu_e must equal nu_e + 1")
        if not 0 <= self.s_e <= 1:
            raise AssertionError(f"s_e = {self.s_e} outside [0, 1]")
        if self.alpha_e is not None and self.alpha_e < 0:
            raise AssertionError("alpha_e must be nonnegative")


@dataclass(frozen=True)
class ThresholdBracket:
    """``lower < fpt(f) <= upper`` with ``lower = max nu_e/q`` and ``upper = min mu_e/q``."""

    lower: Fraction
    upper: Fraction
    e_used: int
    rows: tuple[tuple[int, int, int], ...] = ()  # (e, nu_e, mu_e)
    partial: bool = False

    def __post_init__(self):
        if not self.lower < self.upper:
            raise AssertionError("bracket must satisfy lower < upper")

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    def contains(self, t) -> bool:
        """Could ``fpt = t``?  Lower end open, upper end closed."""
        return self.lower < t <= self.upper


# ----------------------------------------------------------------------------
# Frobenius-root descent

def _mul_trunc(a: dict, b: dict, q: int, p: int) -> dict:
    acc: dict = {}
    get = acc.get
    if len(a) < len(b):
        a, b = b, a
    for eb, cb in b.items():
        for ea, ca in a.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            if max(e) >= q:
                continue
            acc[e] = get(e, 0) + ca * cb
    return {e: c % p for e, c in acc.items() if c % p}


def _roots(v: dict, p: int) -> list[dict]:
    """Split ``v = sum_a x^a * v_a^p`` over residues ``a`` in ``[0, p)^n``."""
    parts: dict = {}
    for e, c in v.items():
        res = tuple(a % p for a in e)
        parts.setdefault(res, {})[tuple(a // p for a in e)] = c
    return [parts[k] for k in sorted(parts)]


class _Echelon:
    """Incremental basis of a span of sparse vectors (dicts) over F_p."""

    def __init__(self, p: int):
        self.p = p
        self.pivots: dict = {}

    def add(self, v: dict) -> bool:
        p = self.p
        v = dict(v)
        while v:
            lead = max(v)
            row = self.pivots.get(lead)
            if row is None:
                inv = pow(v[lead], -1, p)
                self.pivots[lead] = {e: c * inv % p for e, c in v.items()}
                return True
            c = v[lead]
            for e, rc in row.items():
                nv = (v.get(e, 0) - c * rc) % p
                if nv:
                    v[e] = nv
                else:
                    v.pop(e, None)
        return False

    def basis(self) -> list[dict]:
        return [self.pivots[k] for k in sorted(self.pivots)]


def _escapes(stage_factors: Sequence[dict], p: int, n: int) -> bool:
    """Is ``prod_i P_i^(p^i)`` outside ``m^[p^e]``, ``e = len(stage_factors)``?"""
    e = len(stage_factors)
    Q = p ** e
    V = [{(0,) * n: 1}]
    for P in stage_factors:
        span = _Echelon(p)
        for v in V:
            prod = _mul_trunc(v, P, Q, p)
            for part in _roots(prod, p):
                span.add(part)
        V = span.basis()
        Q //= p
        if not V:
            return False
    return True


class _Tester:
    """Decides ``f^r g^(q-1) not in m^[q]`` for one (f, ring, e)."""

    def __init__(self, f: Poly, ring: RingPresentation, e: int, method: str = "descent"):
        if method not in ("descent", "direct"):
            raise ValueError(f"unknown method {method!r}")
        self.f, self.ring, self.e, self.method = f, ring, e, method
        self.p = ring.p
        self.q = ring.p ** e
        self._fpow: dict[int, dict] = {}
        self.calls = 0

    def _stage(self, d: int) -> dict:
        if d not in self._fpow:
            p, n = self.p, self.ring.n
            fd = dict(power_truncated(self.f, d, self.q).terms)
            g = self.ring.relation_p
            if g is not None:
                fd = _mul_trunc(fd, dict(power_truncated(g, p - 1, self.q).terms), self.q, p)
            self._fpow[d] = fd if fd else {}
        return self._fpow[d]

    def survives(self, r: int) -> bool:
        self.calls += 1
        p, q = self.p, self.q
        if r >= q:
            # f lies in m, so f^q lies in m^[q]
            return False
        if self.method == "direct":
            c = power_truncated(self.f, r, q)
            g = self.ring.relation_p
            if g is not None:
                c = Poly._raw(c.ambient, _mul_trunc(dict(c.terms), dict(_fedder_element(g, p, q).terms), q, p), p)
            return bool(c)
        digits = []
        for _ in range(self.e):
            r, d = divmod(r, p)
            digits.append(d)
        factors = [self._stage(d) for d in digits]
        if any(not F for F in factors):
            return False
        return _escapes(factors, p, self.ring.n)


@lru_cache(maxsize=64)
def _fedder_element(g: Poly, p: int, q: int) -> Poly:
    """``g^(q-1)`` truncated below ``q``."""
    return power_truncated(g, q - 1, q)


def _search(test: _Tester, lo_hint: int | None = None, hi_bound: int | None = None) -> int:
    """Largest ``r`` with ``test.survives(r)``."""
    if not test.survives(0):
        raise NotFPure(f"ring is not F-split at p={test.p}, e={test.e}")
    hi = test.q - 1 if hi_bound is None else min(hi_bound, test.q - 1)
    lo = 0
    if lo_hint is not None and 0 < lo_hint <= hi and test.survives(lo_hint):
        lo = lo_hint
    # invariant: survives(lo) and not survives(hi + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if test.survives(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def nu_e(f: Poly | str, ring: RingPresentation, e: int, method: str = "descent") -> int:
    """``max{r : f^r g^(q-1) not in m^[q]}`` (``g = 1`` for the ambient ring)."""
    if e < 1:
        raise ValueError("e must be >= 1")
    f = ring.element(f)
    return _search(_Tester(f, ring, e, method))


def mu_e(f: Poly | str, ring: RingPresentation, e: int, method: str = "descent") -> int:
    """``nu_e + 1``, which is also the least ``r`` with ``f^r g^(q-1) in m^[q]``."""
    f = ring.element(f)
    test = _Tester(f, ring, e, method)
    nu = _search(test)
    mu = nu + 1
    if test.q ** ring.n <= 4096 and test.survives(mu):
        raise AssertionError("mu_e is not the least failing exponent")
    return mu


def fpt_bracket(f: Poly | str, ring: RingPresentation, e_max: int,
                budget_seconds: float | None = None, method: str = "descent") -> ThresholdBracket:
    """Bracket ``(max_e nu_e/q, min_e mu_e/q]`` around ``fpt(f)`` for ``e = 1..e_max``.

    ``p * nu_(e-1)`` is tried first as a lower hint and ``p * mu_(e-1) - 1``
    bounds the search from above.  When the time budget runs out the
    bracket from the completed levels is returned flagged partial.
    """
    if e_max < 1:
        raise ValueError("e_max must be >= 1")
    f = ring.element(f)
    start = time.monotonic()
    rows = []
    lower, upper = None, None
    partial = False
    for e in range(1, e_max + 1):
        if budget_seconds is not None and rows and time.monotonic() - start > budget_seconds:
            partial = True
            break
        test = _Tester(f, ring, e, method)
        if rows:
            _, nu_prev, mu_prev = rows[-1]
            nu = _search(test, lo_hint=ring.p * nu_prev, hi_bound=ring.p * mu_prev - 1)
        else:
            nu = _search(test)
        q = ring.p ** e
        rows.append((e, nu, nu + 1))
        lo, hi = Fraction(nu, q), Fraction(nu + 1, q)
        lower = lo if lower is None else max(lower, lo)
        upper = hi if upper is None else min(upper, hi)
    return ThresholdBracket(lower, upper, rows[-1][0], tuple(rows), partial)


def nu_e_ideal(gens: Sequence[Poly | str], ring: RingPresentation, e: int,
               budget: int = DEFAULT_MULTISET_BUDGET) -> int:
    """``max{r : some product of r generators survives the splitting test}``.

    Products are enumerated over multisets of generators, so the cost is
    combinatorial; more than ``budget`` distinct products raises
    :class:`BudgetExceeded` carrying the best verified lower bound.
    """
    elems = [ring.element(g) for g in gens]
    if not elems:
        raise ValueError("ideal needs at least one generator")
    q, p = ring.p ** e, ring.p
    h = dict(_fedder_element(ring.relation_p, p, q).terms) if ring.relation_p is not None else None
    pows: dict = {}

    def gen_power(i, k):
        if (i, k) not in pows:
            pows[(i, k)] = dict(power_truncated(elems[i], k, q).terms)
        return pows[(i, k)]

    seen = 0
    best = 0

    def survives(r: int) -> bool:
        nonlocal seen
        done = set()
        for combo in itertools.combinations_with_replacement(range(len(elems)), r):
            counts = [combo.count(i) for i in range(len(elems))]
            prod = {(0,) * ring.n: 1}
            for i, k in enumerate(counts):
                if k:
                    prod = _mul_trunc(prod, gen_power(i, k), q, p)
                    if not prod:
                        break
            if not prod:
                continue
            key = frozenset(prod.items())
            if key in done:
                continue
            done.add(key)
            seen += 1
            if seen > budget:
                raise BudgetExceeded(f"more than {budget} generator products examined", partial=best)
            if h is None or _mul_trunc(prod, h, q, p):
                return True
        return False

    if not survives(0):
        raise NotFPure(f"ring is not F-split at p={p}, e={e}")
    lo, hi = 0, ring.n * (q - 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if survives(mid):
            lo = best = mid
        else:
            hi = mid - 1
    return lo


# ----------------------------------------------------------------------------
# splitting ideals

def splitting_profile(ring: RingPresentation, e: int, element: Poly | str | None = None,
                      seed: int | None = None, method: str = "graded") -> FrobeniusProfile:
    """Finite-level invariants of ``I_e``: colength, ``s_e``, ``m_e`` and ``alpha_e``.

    ``method="dense"`` assembles the full ``q^n x q^n`` operator instead of
    the graded blocks (oracle path; also used for non-homogeneous relations,
    in which case ``m_e`` is unavailable).
    """
    if e < 1:
        raise ValueError("e must be >= 1")
    p, q, n = ring.p, ring.p ** e, ring.n
    d = ring.dimension
    nu = mu = None
    if element is not None:
        nu = nu_e(element, ring, e)
        mu = nu + 1
    if not ring.is_hypersurface:
        colen = q ** n
        m_e = q * min(ring.weights)
        return FrobeniusProfile(p, e, q, d, colen, Fraction(1), m_e, Fraction(m_e, q), True, nu, mu)

    h = _fedder_element(ring.relation_p, p, q)
    exact = ring.order_is_exact
    if not h:
        # not F-split: I_e is the unit ideal
        return FrobeniusProfile(p, e, q, d, 0, Fraction(0), 0, Fraction(0), exact, nu, mu)
    graded = method == "graded" and ring.relation_weighted_homogeneous
    if graded:
        blocks = mult_operator(h, q, ring.weights, seed=seed)
        colen = blocks.rank()
        m_e, _ = kernel_min_degree(blocks, ring.relation_degree)
        alpha = Fraction(m_e, q)
    else:
        colen = matrix_rank(mult_operator_matrix(h, q), seed=seed)
        m_e, alpha = None, None
    return FrobeniusProfile(p, e, q, d, colen, Fraction(colen, q ** d), m_e, alpha, exact, nu, mu)


def splitting_colength_groebner(ring: RingPresentation, e: int) -> int:
    """``l(R/I_e)`` through the colon ideal ``(m^[q] : g^(q-1))`` (validation path)."""
    from .groebner import colon_ideal

    p, q, amb = ring.p, ring.p ** e, ring.ambient
    bracket = [Poly.monomial(amb, [q if j == i else 0 for j in range(amb.n)], 1, p) for i in range(amb.n)]
    if not ring.is_hypersurface:
        return colength(IdealBasis(bracket))
    h = _fedder_element(ring.relation_p, p, q)
    if not h:
        return 0
    J = colon_ideal(bracket, h)
    return colength(IdealBasis(list(J.generators) + [ring.relation_p]))


# ----------------------------------------------------------------------------
# containment-colength comparisons

def filtration_generators(weights: Sequence[int], k: int) -> list[tuple[int, ...]]:
    """Minimal monomials of weighted degree ``>= k`` (generators of ``m_w^k``)."""
    n = len(weights)
    if k <= 0:
        return [(0,) * n]
    top = k + max(weights) - 1
    out = []

    def rec(prefix, deg):
        i = len(prefix)
        if i == n:
            if deg >= k and all(deg - weights[j] < k for j in range(n) if prefix[j]):
                out.append(tuple(prefix))
            return
        a = 0
        while deg + a * weights[i] <= top:
            rec(prefix + [a], deg + a * weights[i])
            a += 1

    rec([], 0)
    return sorted(out)


def quotient_colength(ring: RingPresentation, monomials: Sequence[tuple[int, ...]]) -> int:
    """``l(R/(monomials))`` by Groebner colength of ``(g) + (monomials)``."""
    amb, p = ring.ambient, ring.p
    gens = [Poly.monomial(amb, m, 1, p) for m in monomials]
    if ring.relation_p is not None:
        gens.append(ring.relation_p)
    return colength(IdealBasis(gens))


def power_generators(n: int, k: int) -> list[tuple[int, ...]]:
    return filtration_generators((1,) * n, k)


@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs: int | None
    rhs: int | None
    status: str  # "pass", "fail" or "skipped"
    detail: str = ""


@dataclass(frozen=True)
class BoundReport:
    checks: tuple[BoundCheck, ...]

    @property
    def passed(self) -> int:
        return sum(c.status == "pass" for c in self.checks)

    @property
    def failed(self) -> int:
        return sum(c.status == "fail" for c in self.checks)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def summary(self) -> str:
        ran = sum(c.status != "skipped" for c in self.checks)
        return f"containment checks: {self.passed}/{ran} pass"


def pigeonhole_check(n: int, q: int, samples: int = 100, seed: int = 0, exhaustive_limit: int = 5000) -> bool:
    """Every monomial of degree ``n*q`` has an exponent ``>= q``."""
    deg = n * q
    if comb(deg + n - 1, n - 1) <= exhaustive_limit:
        monos = (m for m in power_generators(n, deg))
    else:
        rng = random.Random(seed)
        monos = []
        for _ in range(samples):
            cuts = sorted(rng.randint(0, deg) for _ in range(n - 1))
            parts = [b - a for a, b in zip([0] + cuts, cuts + [deg])]
            monos.append(tuple(parts))
    return all(max(m) >= q for m in monos)


def bound_check(profile: FrobeniusProfile, ring: RingPresentation, nu_m: int | None = None) -> BoundReport:
    """Exact finite-level inequalities for one profile.

    * ``l(R/m_w^(m_e)) <= l(R/I_e)`` from ``I_e in m_w^(m_e)``;
    * ``l(R/I_e) <= l(R/m^(nu_e(m)+1))`` from ``m^(nu_e(m)+1) in I_e``;
    * ``m^(n q) in m^[q]`` by pigeonhole.
    """
    checks = []
    L = profile.colength_Ie
    if profile.m_e is None:
        checks.append(BoundCheck("order", None, L, "skipped", "m_e unavailable"))
    else:
        lhs = quotient_colength(ring, filtration_generators(ring.weights, profile.m_e))
        checks.append(BoundCheck("order", lhs, L, "pass" if lhs <= L else "fail",
                                 f"l(R/m^{profile.m_e}) <= l(R/I_e)"))
    if nu_m is None:
        variables = [Poly.variable(ring.ambient, v, ring.p) for v in ring.ambient.names]
        nu_m = nu_e_ideal(variables, ring, profile.e)
    rhs = quotient_colength(ring, power_generators(ring.n, nu_m + 1))
    checks.append(BoundCheck("threshold", L, rhs, "pass" if L <= rhs else "fail",
                             f"l(R/I_e) <= l(R/m^{nu_m + 1})"))
    ok = pigeonhole_check(ring.n, profile.q)
    checks.append(BoundCheck("pigeonhole", None, None, "pass" if ok else "fail",
                             f"m^{ring.n * profile.q} in m^[{profile.q}]"))
    return BoundReport(tuple(checks))
