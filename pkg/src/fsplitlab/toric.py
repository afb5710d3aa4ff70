"""Exact F-signatures of affine toric rings.

For ``R = k[sigma^v ∩ M]`` with ``sigma`` generated by primitive rays
``v_1..v_r`` the F-signature is the Euclidean volume (lattice-normalised)
of ``{u : 0 <= <u, v_i> <= 1}``.  Everything here is exact rational
arithmetic; dimensions are capped at 4 so exhaustive facet-subset vertex
enumeration is cheap.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, gcd
from typing import Sequence

from . import _exact

MAX_DIM = 4


class InvalidCone(ValueError):
    pass


class Unbounded(ValueError):
    pass


def _affine_rank(points: Sequence[Sequence[Fraction]]) -> int:
    if len(points) <= 1:
        return 0
    base = points[0]
    return _exact.rank([[a - b for a, b in zip(pt, base)] for pt in points[1:]])


@dataclass
class RationalPolytope:
    """``{u : <a_i, u> <= b_i}`` with integer ``a_i`` and rational ``b_i``."""

    halfspaces: tuple[tuple[tuple[int, ...], Fraction], ...]
    _vertices: list | None = field(default=None, repr=False, compare=False)

    def __init__(self, halfspaces: Sequence[tuple[Sequence[int], object]]):
        hs = tuple((tuple(int(x) for x in a), Fraction(b)) for a, b in halfspaces)
        if not hs:
            raise ValueError("polytope needs at least one halfspace")
        d = len(hs[0][0])
        if d < 1 or d > MAX_DIM or any(len(a) != d for a, _ in hs):
            raise ValueError(f"halfspace normals must share a dimension between 1 and {MAX_DIM}")
        self.halfspaces = hs
        self._vertices = None
        self._check_bounded()

    @property
    def dim(self) -> int:
        return len(self.halfspaces[0][0])

    def _check_bounded(self) -> None:
        d = self.dim
        A = [list(a) for a, _ in self.halfspaces]
        if _exact.rank(A) < d:
            raise Unbounded("halfspace normals do not span; the recession cone contains a line")
        # a pointed recession cone {x : A x <= 0} is trivial iff it has no extreme ray
        for rows in itertools.combinations(A, d - 1):
            null = _exact.nullspace(list(rows), d) if rows else _exact.nullspace([], d)
            if len(null) != 1:
                continue
            r = null[0]
            for sign in (1, -1):
                if all(sum(sign * ai * ri for ai, ri in zip(a, r)) <= 0 for a in A):
                    raise Unbounded(f"polytope is unbounded in direction {[sign * x for x in r]}")

    def contains(self, u: Sequence) -> bool:
        return all(sum(ai * ui for ai, ui in zip(a, u)) <= b for a, b in self.halfspaces)

    def tight(self, u: Sequence) -> frozenset[int]:
        return frozenset(i for i, (a, b) in enumerate(self.halfspaces)
                         if sum(ai * ui for ai, ui in zip(a, u)) == b)

    def vertices(self) -> list[tuple[Fraction, ...]]:
        if self._vertices is None:
            d = self.dim
            found = set()
            for combo in itertools.combinations(self.halfspaces, d):
                sol = _exact.solve([list(a) for a, _ in combo], [b for _, b in combo])
                if sol is not None and self.contains(sol):
                    found.add(tuple(sol))
            self._vertices = sorted(found)
        return self._vertices

    def volume(self) -> Fraction:
        return polytope_volume(self)


def _pulling_simplices(verts: list[tuple[Fraction, ...]], tight: dict, k: int) -> list[list[tuple[Fraction, ...]]]:
    """Triangulate the k-dimensional face spanned by ``verts``, pulling its least vertex."""
    if k == 0:
        return [[verts[0]]]
    apex = verts[0]
    common = frozenset.intersection(*(tight[v] for v in verts))
    facets = set()
    for i in set().union(*(tight[v] for v in verts)) - common:
        fv = tuple(v for v in verts if i in tight[v])
        if len(fv) >= k and _affine_rank(fv) == k - 1:
            facets.add(fv)
    out = []
    for fv in sorted(facets):
        if apex in fv:
            continue
        for simplex in _pulling_simplices(list(fv), tight, k - 1):
            out.append([apex] + simplex)
    return out


def polytope_volume(P: RationalPolytope) -> Fraction:
    """Exact Euclidean volume: vertex enumeration, then a pulling triangulation."""
    verts = P.vertices()
    d = P.dim
    if len(verts) <= d or _affine_rank(verts) < d:
        return Fraction(0)
    tight = {v: P.tight(v) for v in verts}
    total = Fraction(0)
    for simplex in _pulling_simplices(verts, tight, d):
        base = simplex[0]
        total += abs(_exact.det([[a - b for a, b in zip(v, base)] for v in simplex[1:]]))
    return total / factorial(d)


def _primitive_int(v: Sequence[int]) -> tuple[int, ...]:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    if g == 0:
        raise InvalidCone("zero ray")
    return tuple(int(x) // g for x in v)


@dataclass(frozen=True)
class ToricCone:
    """Cone ``sigma`` in ``N_R`` given by its primitive ray generators.

    The ring is ``k[sigma^v ∩ M]``; the rays are the inner facet normals
    of ``sigma^v``.
    """

    rays: tuple[tuple[int, ...], ...]

    def __init__(self, rays: Sequence[Sequence[int]]):
        rays = tuple(tuple(int(x) for x in r) for r in rays)
        if not rays:
            raise InvalidCone("a cone needs at least one ray")
        d = len(rays[0])
        if not 1 <= d <= MAX_DIM or any(len(r) != d for r in rays):
            raise InvalidCone(f"rays must share a dimension between 1 and {MAX_DIM}")
        for r in rays:
            if _primitive_int(r) != r:
                raise InvalidCone(f"ray {r} is not primitive")
        if len(set(rays)) != len(rays):
            raise InvalidCone("duplicate rays")
        if _exact.rank([list(r) for r in rays]) < d:
            raise InvalidCone("rays do not span: the cone is not full-dimensional")
        object.__setattr__(self, "rays", rays)
        P = self.slab()
        if polytope_volume(P) == 0:
            raise InvalidCone("cone is not strongly convex")
        # each ray must cut a facet of the dual cone, i.e. not be redundant
        for i in range(len(rays)):
            on_face = [v for v in P.vertices() if sum(a * x for a, x in zip(rays[i], v)) == 0]
            if _affine_rank(on_face) < d - 1 or len(on_face) < d:
                raise InvalidCone(f"ray {rays[i]} is not extremal")

    @property
    def dim(self) -> int:
        return len(self.rays[0])

    def slab(self) -> RationalPolytope:
        hs = []
        for r in self.rays:
            hs.append((r, 1))
            hs.append((tuple(-x for x in r), 0))
        return RationalPolytope(hs)

    @classmethod
    def smooth(cls, d: int) -> "ToricCone":
        return cls([[int(i == j) for j in range(d)] for i in range(d)])


def toric_fsignature(cone: ToricCone) -> Fraction:
    """Volume of ``{u : 0 <= <u, v_i> <= 1 for all rays v_i}``."""
    s = polytope_volume(cone.slab())
    if s <= 0:
        raise AssertionError("toric F-signature must be positive")
    return s


def veronese_cone(cone: ToricCone, n: int, grading: Sequence[int] | None = None) -> ToricCone:
    """Cone of the n-th Veronese subring for the grading ``deg x^u = <u, grading>``.

    The Veronese keeps the sublattice ``M' = {u : <u, grading> = 0 mod n}``;
    rewriting ``u = B u'`` in a basis ``B`` of ``M'`` turns each ray ``v``
    into the primitive part of ``B^T v``.  ``grading`` defaults to the sum
    of the rays, an interior point of the cone.
    """
    if n < 1:
        raise ValueError("Veronese index must be >= 1")
    if n == 1:
        return cone
    d = cone.dim
    g = list(grading) if grading is not None else [sum(r[i] for r in cone.rays) for i in range(d)]
    if len(g) != d:
        raise ValueError("grading vector has the wrong length")
    basis = [vec[:d] for vec in _exact.row_kernel_lattice(g + [-n])]
    new_rays = []
    for r in cone.rays:
        image = [sum(b[i] * r[i] for i in range(d)) for b in basis]
        new_rays.append(_primitive_int(image))
    return ToricCone(new_rays)


def product_cone(a: ToricCone, b: ToricCone) -> ToricCone:
    """Cone of the tensor product of the two toric rings."""
    da, db = a.dim, b.dim
    rays = [tuple(r) + (0,) * db for r in a.rays] + [(0,) * da + tuple(r) for r in b.rays]
    return ToricCone(rays)


def parse_rays(text: str) -> list[list[int]]:
    """``"1,0;1,2"`` -> ``[[1, 0], [1, 2]]``."""
    rays = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            rays.append([int(x) for x in chunk.split(",")])
        except ValueError:
            raise InvalidCone(f"cannot read ray {chunk!r}") from None
    return rays
