from __future__ import annotations

import itertools
import random
from math import comb, factorial

import pytest
from hypothesis import given, settings, strategies as st

from fsplitlab.algebra import (INF, Ambient, ExponentOverflow, ParseError, Poly, PrimeField,
                               bracket_membership, format_poly, is_prime, monomial_counts, parse_poly,
                               poly_mul, power, power_truncated, reduce_mod_p, weighted_order)

XYZ = Ambient.of("x,y,z")
XY = Ambient.of("x,y")


def P(text, amb=XYZ, p=None):
    f = parse_poly(text, amb)
    return reduce_mod_p(f, p) if p else f


def brute_expand(f: Poly, k: int) -> dict:
    """g^k by repeated naive multiplication over the integers."""
    acc = {(0,) * f.ambient.n: 1}
    for _ in range(k):
        nxt = {}
        for e1, c1 in acc.items():
            for e2, c2 in f.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                nxt[e] = nxt.get(e, 0) + c1 * c2
        acc = {e: c for e, c in nxt.items() if c}
    return acc


# ---------------------------------------------------------------- field

@pytest.mark.parametrize("n,expected", [(2, True), (3, True), (9, False), (561, False),
                                        (2**31 - 1, True), (3215031751, False), (1, False)])
def test_is_prime(n, expected):
    assert is_prime(n) is expected


def test_is_prime_matches_trial_division():
    def slow(n):
        return n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))
    assert all(is_prime(n) == slow(n) for n in range(2000))


@pytest.mark.parametrize("p", [2, 4, 15, 2**31 + 11, -3])
def test_field_rejects_bad_modulus(p):
    with pytest.raises(ValueError):
        PrimeField(p)


@pytest.mark.parametrize("p", [3, 5, 7, 2**31 - 1])
def test_field_results_are_canonical(p):
    F = PrimeField(p)
    rng = random.Random(p)
    for _ in range(200):
        a, b = rng.randrange(-p * p, p * p), rng.randrange(1, p)
        for r in (F.add(a, b), F.sub(a, b), F.mul(a, b), F.neg(a), F.pow(a, 5)):
            assert 0 <= r < p
        assert F.mul(b, F.inv(b)) == 1


# ---------------------------------------------------------------- parsing

def test_parse_paper_relation():
    f = P("x^2 + y^3 + z^5")
    assert len(f) == 3
    assert set(f.terms.values()) == {1}


def test_parse_zero_and_cancellation():
    assert not P("0")
    assert P("0").terms == {}
    assert not P("x*x - x^2")


def test_parse_coefficients_and_signs():
    f = P("-3*x^2*y + 2^3*z - 4 + x*3")
    assert f.terms == {(2, 1, 0): -3, (0, 0, 1): 8, (0, 0, 0): -4, (1, 0, 0): 3}


@pytest.mark.parametrize("text,fragment", [
    ("", "empty"),
    ("   ", "empty"),
    ("x + w", "unknown variable"),
    ("x^", "malformed exponent"),
    ("x^y", "malformed exponent"),
    ("x^-2", "malformed exponent"),
    ("(x + y)", "unexpected character"),
    ("x y", "between terms"),
    ("x +", "expected a number or variable"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_poly(text, XYZ)


def test_parse_exponent_overflow():
    with pytest.raises(ExponentOverflow):
        parse_poly("x^4294967296", XYZ)


polys = st.dictionaries(
    st.tuples(*[st.integers(0, 6)] * 3), st.integers(-20, 20), max_size=6
).map(lambda d: Poly(XYZ, d))


@given(polys)
def test_parse_print_roundtrip(f):
    assert parse_poly(format_poly(f), XYZ) == f


# ---------------------------------------------------------------- reduction and products

def test_reduce_mod_p_examples():
    assert reduce_mod_p(parse_poly("7*x + 3*y", XYZ), 7) == Poly(XYZ, {(0, 1, 0): 3}, 7)
    g = reduce_mod_p(parse_poly("x^2 + y^3 + z^5", XYZ), 11)
    assert set(g.terms) == {(2, 0, 0), (0, 3, 0), (0, 0, 5)} and set(g.terms.values()) == {1}
    assert not reduce_mod_p(parse_poly("5*x^5", XYZ), 5)


def test_reduce_mod_p_invalid_prime():
    with pytest.raises(ValueError):
        reduce_mod_p(parse_poly("x", XYZ), 6)


def test_poly_mul_examples():
    # (x+y)(x-y) over F_5
    assert poly_mul(P("x + y", XY, 5), P("x - y", XY, 5)) == P("x^2 + 4*y^2", XY, 5)
    assert not poly_mul(P("x + y", XY, 5), Poly.zero(XY, 5))
    # freshman's dream at p = 3 (F_2 is outside the supported fields)
    s = P("x + y", XY, 3)
    assert poly_mul(poly_mul(s, s), s) == P("x^3 + y^3", XY, 3)


def test_poly_mul_ambient_mismatch():
    with pytest.raises(ValueError):
        poly_mul(P("x", XY), P("x", XYZ))
    with pytest.raises(ValueError):
        poly_mul(P("x", XY, 3), P("x", XY, 5))


def test_term_count_bound():
    rng = random.Random(1)
    for _ in range(20):
        a = Poly(XYZ, {tuple(rng.randrange(4) for _ in range(3)): rng.randrange(1, 7) for _ in range(5)}, 7)
        b = Poly(XYZ, {tuple(rng.randrange(4) for _ in range(3)): rng.randrange(1, 7) for _ in range(4)}, 7)
        assert len(poly_mul(a, b)) <= len(a) * len(b)


@pytest.mark.parametrize("p", [3, 5, 7, 11])
def test_freshmans_dream(p):
    rng = random.Random(p)
    for _ in range(5):
        f = Poly(XYZ, {tuple(rng.randrange(3) for _ in range(3)): rng.randrange(1, p) for _ in range(3)}, p)
        g = Poly(XYZ, {tuple(rng.randrange(3) for _ in range(3)): rng.randrange(1, p) for _ in range(3)}, p)
        lhs = Poly.one(XYZ, p)
        for _ in range(p):
            lhs = poly_mul(lhs, f + g)
        assert lhs == power(f, p) + power(g, p)


def test_lucas_multinomial_support():
    # (x+y+z)^k mod p keeps exactly the terms whose multinomial has no carries in base p
    p, k = 3, 7
    f = power(P("x + y + z", XYZ, p), k)
    for a in range(k + 1):
        for b in range(k + 1 - a):
            c = k - a - b
            coeff = factorial(k) // (factorial(a) * factorial(b) * factorial(c))
            assert ((a, b, c) in f.terms) == (coeff % p != 0)


# ---------------------------------------------------------------- truncated powers

def test_power_truncated_examples():
    for q in (3, 5, 9):
        assert not power_truncated(P("x", XYZ, 3), q, q)
    p = 5
    got = power_truncated(P("x + y", XY, p), p - 1, p)
    assert got.terms == {(i, p - 1 - i): comb(p - 1, i) % p for i in range(p)}
    g = P("x^2 + y^3", XY, 5)
    full = brute_expand(g, 4)
    want = {e: c % 5 for e, c in full.items() if max(e) < 5 and c % 5}
    assert power_truncated(g, 4, 5).terms == want


small_polys = st.dictionaries(st.tuples(*[st.integers(0, 4)] * 3), st.integers(1, 2), min_size=1, max_size=3)


@settings(max_examples=60, deadline=None)
@given(small_polys, st.integers(0, 8), st.sampled_from([(3, 3), (3, 9), (5, 5), (7, 7)]),
       st.sampled_from(["square", "frobenius"]))
def test_power_truncated_matches_brute_force(terms, k, pq, method):
    p, q = pq
    g = Poly(XYZ, terms, p)
    full = brute_expand(g, k)
    want = {e: c % p for e, c in full.items() if max(e) < q and c % p}
    assert power_truncated(g, k, q, method=method).terms == want


def test_power_truncated_integer_coefficients():
    g = P("x - 2*y")
    assert power_truncated(g, 5, 4) == power(g, 5).truncate(4)
    with pytest.raises(ValueError):
        power_truncated(g, 5, 4, method="frobenius")


def test_power_truncated_overflow_guard():
    with pytest.raises(ExponentOverflow):
        power_truncated(P("x", XYZ, 3), 1, 3**20)


# ---------------------------------------------------------------- orders and brackets

def test_weighted_order_examples():
    w = (15, 10, 6)
    assert weighted_order(P("z"), w) == 6
    assert weighted_order(P("x^2 + y^3 + z^5"), w) == 30
    assert weighted_order(P("x^3*y^3"), (1, 1, 1)) == 6
    assert weighted_order(Poly.zero(XYZ)) is INF
    assert INF > 10**30 and min(INF, 4) == 4


@settings(max_examples=80)
@given(polys, polys)
def test_weighted_order_superadditive(f, g):
    w = (3, 2, 1)
    fg = f * g
    if not f or not g:
        assert weighted_order(fg, w) is INF
        return
    assert weighted_order(fg, w) >= weighted_order(f, w) + weighted_order(g, w)


@settings(max_examples=40)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=4),
       st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=4))
def test_weighted_order_additive_on_homogeneous(xs, ys):
    # homogeneous for weights (1,1,1) after padding each monomial to a common degree
    def homog(exps, deg):
        return Poly(XYZ, {(a, b, deg - a - b): 1 for a, b, _ in exps if a + b <= deg}, 7)
    f, g = homog(xs, 6), homog(ys, 6)
    if f and g:
        assert weighted_order(f * g) == weighted_order(f) + weighted_order(g) == 12


@pytest.mark.parametrize("q", [3, 5, 9])
def test_bracket_membership_examples(q):
    assert bracket_membership(Poly(XY, {(q, 0): 1, (0, q): 1}), q)
    assert not bracket_membership(Poly(XY, {(q - 1, q - 1): 1}), q)


def test_bracket_membership_odd_power():
    p = q = 3
    f = power(P("x + y", XY, p), 2 * q - 1)
    assert all(max(e) >= q for e in f.terms)
    assert bracket_membership(f, q)


def test_monomial_counts_brute_force():
    w = (3, 2, 1)
    for box in (None, 4):
        counts = monomial_counts(w, 20, box)
        lim = box or 21
        brute = [0] * 21
        for e in itertools.product(range(lim), repeat=3):
            d = sum(a * b for a, b in zip(w, e))
            if d <= 20:
                brute[d] += 1
        assert counts == brute
