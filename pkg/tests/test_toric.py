from __future__ import annotations

import itertools
from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings, strategies as st

from fsplitlab.toric import (InvalidCone, RationalPolytope, ToricCone, Unbounded, parse_rays, polytope_volume,
                             product_cone, toric_fsignature, veronese_cone)


def lattice_count(cone: ToricCone, q: int, radius: int) -> int:
    """#{u in Z^d : 0 <= <u, v_i> < q}: the number of free summands of R^(1/q)."""
    d = cone.dim
    return sum(all(0 <= sum(a * b for a, b in zip(u, r)) < q for r in cone.rays)
               for u in itertools.product(range(-radius, radius + 1), repeat=d))


def test_unit_cube_volume():
    P = RationalPolytope([((1, 0), 1), ((-1, 0), 0), ((0, 1), 1), ((0, -1), 0)])
    assert len(P.vertices()) == 4
    assert P.volume() == 1


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_standard_simplex_volume(d):
    hs = [(tuple(-int(i == j) for j in range(d)), 0) for i in range(d)] + [((1,) * d, 1)]
    assert polytope_volume(RationalPolytope(hs)) == Fraction(1, factorial(d))


def test_rational_vertices():
    P = RationalPolytope([((2, 0), 1), ((-1, 0), 0), ((0, 3), 1), ((0, -1), 0)])
    assert P.volume() == Fraction(1, 6)


def test_unbounded_rejected():
    with pytest.raises(Unbounded):
        RationalPolytope([((1, 0), 1), ((-1, 0), 0), ((0, -1), 0)])
    with pytest.raises(Unbounded):
        RationalPolytope([((1, 1), 1), ((-1, -1), 0)])


def test_a1_cone():
    assert toric_fsignature(ToricCone(parse_rays("1,0;1,2"))) == Fraction(1, 2)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_smooth_cone(d):
    assert toric_fsignature(ToricCone.smooth(d)) == 1


@pytest.mark.parametrize("rays,q,radius", [
    ([[1, 0], [1, 2]], 12, 24),
    ([[1, 0], [1, 3]], 12, 36),
    ([[1, 0], [2, 3]], 12, 36),
    ([[1, 0, 0], [0, 1, 0], [1, 1, 2]], 8, 16),
])
def test_volume_matches_lattice_count(rays, q, radius):
    cone = ToricCone(rays)
    s = toric_fsignature(cone)
    count = lattice_count(cone, q, radius)
    # the count is an Ehrhart quasi-polynomial with leading term s q^d
    assert abs(Fraction(count, q ** cone.dim) - s) <= Fraction(3, q)


def test_lattice_count_exact_for_a1():
    cone = ToricCone([[1, 0], [1, 2]])
    for q in (3, 5, 7):
        assert lattice_count(cone, q, 2 * q) == (q * q + 1) // 2


unimodular = st.sampled_from([((1, 1), (0, 1)), ((1, 0), (3, 1)), ((2, 1), (1, 1)), ((0, 1), (1, 0)),
                              ((1, -2), (0, 1))])


@settings(max_examples=25, deadline=None)
@given(unimodular, st.integers(1, 5), st.integers(1, 5))
def test_unimodular_invariance(U, a, b):
    from math import gcd
    if gcd(a, b) != 1:
        return
    rays = [(1, 0), (a, b)] if b else [(1, 0), (0, 1)]
    base = ToricCone(rays)
    moved = ToricCone([tuple(sum(U[i][j] * r[j] for j in range(2)) for i in range(2)) for r in rays])
    assert toric_fsignature(base) == toric_fsignature(moved) == Fraction(1, b)


@pytest.mark.parametrize("r", [2, 3, 4, 5])
def test_veronese_of_plane(r):
    cone = veronese_cone(ToricCone.smooth(2), r)
    assert toric_fsignature(cone) == Fraction(1, r) > 0


@pytest.mark.parametrize("r", [2, 3])
def test_veronese_of_three_space(r):
    # diagonal cyclic quotient of order r without pseudo-reflections
    assert toric_fsignature(veronese_cone(ToricCone.smooth(3), r)) == Fraction(1, r)


@pytest.mark.parametrize("rays", [[[1, 0], [0, 1]], [[1, 0], [1, 2]], [[1, 0], [2, 3]],
                                  [[1, 0, 0], [0, 1, 0], [0, 0, 1]], [[1, 0, 0], [0, 1, 0], [1, 1, 2]]])
@pytest.mark.parametrize("n", [2, 3, 4])
def test_veronese_does_not_increase_signature(rays, n):
    cone = ToricCone(rays)
    assert toric_fsignature(veronese_cone(cone, n)) <= toric_fsignature(cone)


def test_veronese_with_grading():
    cone = veronese_cone(ToricCone.smooth(2), 3, grading=[1, 1])
    assert toric_fsignature(cone) == Fraction(1, 3)


def test_product():
    a1 = ToricCone([[1, 0], [1, 2]])
    assert toric_fsignature(product_cone(a1, a1)) == Fraction(1, 4)
    assert toric_fsignature(product_cone(a1, ToricCone.smooth(1))) == Fraction(1, 2)


@pytest.mark.parametrize("rays,match", [
    ([[2, 0], [1, 1]], "primitive"),
    ([[1, 0], [1, 0]], "duplicate"),
    ([[1, 0, 0], [0, 1, 0]], "span"),
    ([[1, 0], [-1, 0], [0, 1]], "strongly convex"),
    ([[1, 0], [1, 1], [0, 1]], "extremal"),
    ([], "at least one"),
    ([[1, 0], [0, 1, 0]], "dimension"),
    ([[0, 0]], "zero"),
])
def test_invalid_cones(rays, match):
    with pytest.raises(InvalidCone, match=match):
        ToricCone(rays)


def test_parse_rays():
    assert parse_rays("1,0; 1,2") == [[1, 0], [1, 2]]
    with pytest.raises(InvalidCone):
        parse_rays("1,a")


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(1, 3)), min_size=3, max_size=5))
def test_signature_positive_and_at_most_one(rays):
    try:
        cone = ToricCone(rays)
    except InvalidCone:
        return
    s = toric_fsignature(cone)
    assert 0 < s <= 1
