"""Prime fields, sparse multivariate polynomials and the expression parser.

Polynomials are immutable maps ``exponent tuple -> coefficient``.  A
polynomial either has integer coefficients (``modulus is None``), which is
what the parser produces, or coefficients that are canonical residues
modulo a prime.  Every polynomial lives in an :class:`Ambient`, i.e. an
ordered list of variable names together with positive integer weights.

Expression grammar (whitespace is ignored)::

    expr    := term (("+" | "-") term)*
    term    := ["+" | "-"] factor ("*" factor)*
    factor  := INT ["^" INT] | NAME ["^" INT]
    INT     := [0-9]+
    NAME    := [A-Za-z_][A-Za-z0-9_]*

Parentheses are not part of the grammar; products are flat.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

MAX_EXPONENT = 2**32
MAX_PRIME = 2**31

Exponent = tuple[int, ...]


@total_ordering
class _Infinity:
    """Order value of the zero polynomial; compares above every integer."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self

    def __hash__(self):
        return hash("fsplitlab.INF")

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"


INF = _Infinity()


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for sp in small:
        if n % sp == 0:
            return n == sp
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class PrimeField:
    """Arithmetic in F_p on canonical residues ``0 <= a < p``."""

    __slots__ = ("p",)

    def __init__(self, p: int):
        p = int(p)
        if not (3 <= p < MAX_PRIME) or not is_prime(p):
            raise ValueError(f"modulus must be an odd prime below 2^31, got {p}")
        self.p = p

    def __repr__(self):
        return f"PrimeField({self.p})"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("PrimeField", self.p))

    def __call__(self, a: int) -> int:
        return a % self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return a * b % self.p

    def neg(self, a: int) -> int:
        return -a % self.p

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise ZeroDivisionError(f"0 has no inverse mod {self.p}")
        return pow(a, -1, self.p)

    def pow(self, a: int, k: int) -> int:
        return pow(a, k, self.p)


def check_prime(p: int) -> int:
    return PrimeField(p).p


@dataclass(frozen=True)
class Ambient:
    """Variable names and their positive integer weights."""

    names: tuple[str, ...]
    weights: tuple[int, ...]

    def __post_init__(self):
        if len(self.names) != len(self.weights):
            raise ValueError("names and weights differ in length")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names in {self.names}")
        for name in self.names:
            if not _NAME_RE.fullmatch(name):
                raise ValueError(f"invalid variable name {name!r}")
        if any(int(w) < 1 for w in self.weights):
            raise ValueError(f"weights must be positive integers, got {self.weights}")

    @classmethod
    def of(cls, names: Sequence[str] | str, weights: Sequence[int] | None = None) -> "Ambient":
        if isinstance(names, str):
            names = [s.strip() for s in names.split(",") if s.strip()]
        names = tuple(names)
        if weights is None:
            weights = (1,) * len(names)
        return cls(names, tuple(int(w) for w in weights))

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def is_standard(self) -> bool:
        return all(w == 1 for w in self.weights)

    def with_weights(self, weights: Sequence[int]) -> "Ambient":
        return Ambient(self.names, tuple(int(w) for w in weights))

    def degree(self, exp: Exponent) -> int:
        return sum(w * a for w, a in zip(self.weights, exp))


_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class ExponentOverflow(OverflowError):
    pass


def _check_exponent(exp: Exponent, n: int) -> None:
    if len(exp) != n:
        raise ValueError(f"exponent {exp} has length {len(exp)}, expected {n}")
    for a in exp:
        if a < 0:
            raise ValueError(f"negative exponent in {exp}")
        if a >= MAX_EXPONENT:
            raise ExponentOverflow(f"exponent {a} exceeds the 32-bit bound")


class Poly:
    """Immutable sparse polynomial.

    ``terms`` never stores a zero coefficient; iteration follows the
    canonical order (descending weighted degree, then descending
    exponent tuple) so printing and serialisation are deterministic.
    """

    __slots__ = ("ambient", "modulus", "_terms", "_hash")

    def __init__(self, ambient: Ambient, terms: Mapping[Exponent, int] | Iterable = (), modulus: int | None = None):
        if modulus is not None:
            modulus = check_prime(modulus)
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Exponent, int] = {}
        n = ambient.n
        for exp, c in items:
            exp = tuple(int(a) for a in exp)
            _check_exponent(exp, n)
            acc[exp] = acc.get(exp, 0) + int(c)
        self._init(ambient, acc, modulus)

    def _init(self, ambient, acc, modulus):
        if modulus is not None:
            acc = {e: c % modulus for e, c in acc.items()}
        w = ambient.weights
        keys = sorted(
            (e for e, c in acc.items() if c),
            key=lambda e: (sum(a * b for a, b in zip(w, e)), e),
            reverse=True,
        )
        self.ambient = ambient
        self.modulus = modulus
        self._terms = {e: acc[e] for e in keys}
        self._hash = None

    @classmethod
    def _raw(cls, ambient: Ambient, acc: dict, modulus: int | None) -> "Poly":
        # trusted constructor: exponents already validated
        obj = cls.__new__(cls)
        obj._init(ambient, acc, modulus)
        return obj

    @classmethod
    def zero(cls, ambient: Ambient, modulus: int | None = None) -> "Poly":
        return cls._raw(ambient, {}, modulus)

    @classmethod
    def one(cls, ambient: Ambient, modulus: int | None = None) -> "Poly":
        return cls._raw(ambient, {(0,) * ambient.n: 1}, modulus)

    @classmethod
    def monomial(cls, ambient: Ambient, exp: Sequence[int], coeff: int = 1, modulus: int | None = None) -> "Poly":
        return cls(ambient, {tuple(exp): coeff}, modulus)

    @classmethod
    def variable(cls, ambient: Ambient, name: str, modulus: int | None = None) -> "Poly":
        i = ambient.names.index(name)
        exp = [0] * ambient.n
        exp[i] = 1
        return cls._raw(ambient, {tuple(exp): 1}, modulus)

    @property
    def terms(self) -> Mapping[Exponent, int]:
        return MappingProxyType(self._terms)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return (
            self.ambient == other.ambient
            and self.modulus == other.modulus
            and self._terms == other._terms
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ambient, self.modulus, tuple(self._terms.items())))
        return self._hash

    def __repr__(self):
        mod = "" if self.modulus is None else f" mod {self.modulus}"
        return f"Poly({self.to_text()!r}{mod})"

    def __str__(self):
        return self.to_text()

    def _check_compatible(self, other: "Poly") -> None:
        if self.ambient != other.ambient:
            raise ValueError(f"ambient mismatch: {self.ambient} vs {other.ambient}")
        if self.modulus != other.modulus:
            raise ValueError(f"modulus mismatch: {self.modulus} vs {other.modulus}")

    def __add__(self, other: "Poly") -> "Poly":
        self._check_compatible(other)
        acc = dict(self._terms)
        for e, c in other._terms.items():
            acc[e] = acc.get(e, 0) + c
        return Poly._raw(self.ambient, acc, self.modulus)

    def __neg__(self) -> "Poly":
        return Poly._raw(self.ambient, {e: -c for e, c in self._terms.items()}, self.modulus)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Poly):
            return poly_mul(self, other)
        if isinstance(other, int):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int) -> "Poly":
        return power(self, k)

    def scale(self, c: int) -> "Poly":
        return Poly._raw(self.ambient, {e: c * v for e, v in self._terms.items()}, self.modulus)

    def shift(self, exp: Exponent, c: int = 1) -> "Poly":
        """Multiply by the monomial ``c * x^exp``."""
        acc = {tuple(a + b for a, b in zip(e, exp)): c * v for e, v in self._terms.items()}
        return Poly(self.ambient, acc, self.modulus)

    @property
    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def constant_term(self) -> int:
        return self._terms.get((0,) * self.ambient.n, 0)

    def degrees(self, weights: Sequence[int] | None = None) -> set[int]:
        w = self.ambient.weights if weights is None else tuple(weights)
        return {sum(a * b for a, b in zip(w, e)) for e in self._terms}

    def is_homogeneous(self, weights: Sequence[int] | None = None) -> bool:
        return len(self.degrees(weights)) <= 1

    def homogeneous_component(self, t: int, weights: Sequence[int] | None = None) -> "Poly":
        w = self.ambient.weights if weights is None else tuple(weights)
        acc = {e: c for e, c in self._terms.items() if sum(a * b for a, b in zip(w, e)) == t}
        return Poly._raw(self.ambient, acc, self.modulus)

    def lowest_component(self, weights: Sequence[int] | None = None) -> "Poly":
        if not self:
            return self
        return self.homogeneous_component(min(self.degrees(weights)), weights)

    def truncate(self, q: int) -> "Poly":
        """Drop every term with some exponent ``>= q``."""
        acc = {e: c for e, c in self._terms.items() if max(e, default=0) < q}
        return Poly._raw(self.ambient, acc, self.modulus)

    def monic(self) -> "Poly":
        if self.modulus is None:
            raise ValueError("monic() needs prime-field coefficients")
        if not self:
            return self
        lead = next(iter(self._terms.values()))
        return self.scale(pow(lead, -1, self.modulus))

    def to_text(self) -> str:
        return format_poly(self)


# ----------------------------------------------------------------------------
# parsing / printing

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\^)|(\*)|(\+)|(-)|(\S))")


class ParseError(ValueError):
    pass


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            break
        pos = m.end()
        num, name, caret, star, plus, minus, bad = m.groups()
        if num is not None:
            tokens.append(("INT", num))
        elif name is not None:
            tokens.append(("NAME", name))
        elif caret:
            tokens.append(("^", caret))
        elif star:
            tokens.append(("*", star))
        elif plus:
            tokens.append(("+", plus))
        elif minus:
            tokens.append(("-", minus))
        else:
            raise ParseError(f"unexpected character {bad!r} at position {m.start(7)}")
    return tokens


def parse_poly(text: str, ambient: Ambient | Sequence[str] | str) -> Poly:
    """Parse an expression into an integer-coefficient :class:`Poly`.

    >>> A = Ambient.of("x,y,z")
    >>> parse_poly("x^2 + y^3 + z^5", A).to_text()
    'z^5 + y^3 + x^2'
    """
    if not isinstance(ambient, Ambient):
        ambient = Ambient.of(ambient)
    if text is None or not text.strip():
        raise ParseError("empty polynomial expression")
    tokens = _tokenize(text)
    index = {name: i for i, name in enumerate(ambient.names)}
    n = ambient.n
    pos = 0

    def peek():
        return tokens[pos][0] if pos < len(tokens) else None

    def exponent_after() -> int:
        nonlocal pos
        if peek() != "^":
            return 1
        pos += 1
        if peek() != "INT":
            got = tokens[pos][1] if pos < len(tokens) else "end of input"
            raise ParseError(f"malformed exponent: expected a nonnegative integer after '^', got {got!r}")
        k = int(tokens[pos][1])
        pos += 1
        if k >= MAX_EXPONENT:
            raise ExponentOverflow(f"exponent {k} exceeds the 32-bit bound")
        return k

    acc: dict[Exponent, int] = {}
    first = True
    while True:
        sign = 1
        kind = peek()
        if kind in ("+", "-"):
            sign = -1 if kind == "-" else 1
            pos += 1
        elif not first:
            raise ParseError(f"expected '+' or '-' between terms, got {tokens[pos][1]!r}")
        first = False
        coeff = sign
        exp = [0] * n
        while True:
            kind = peek()
            if kind == "INT":
                value = int(tokens[pos][1])
                pos += 1
                coeff *= value ** exponent_after()
            elif kind == "NAME":
                name = tokens[pos][1]
                if name not in index:
                    raise ParseError(f"unknown variable {name!r}; declared: {', '.join(ambient.names)}")
                pos += 1
                exp[index[name]] += exponent_after()
            else:
                got = tokens[pos][1] if pos < len(tokens) else "end of input"
                raise ParseError(f"expected a number or variable, got {got!r}")
            if peek() == "*":
                pos += 1
                continue
            break
        e = tuple(exp)
        _check_exponent(e, n)
        acc[e] = acc.get(e, 0) + coeff
        if peek() is None:
            break
    return Poly._raw(ambient, acc, None)


def format_poly(f: Poly) -> str:
    if not f:
        return "0"
    names = f.ambient.names
    parts = []
    for exp, c in f:
        factors = []
        for name, a in zip(names, exp):
            if a == 1:
                factors.append(name)
            elif a > 1:
                factors.append(f"{name}^{a}")
        mag = abs(c)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([str(mag)] + factors)
        parts.append(("-" if c < 0 else "+", body))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


# ----------------------------------------------------------------------------
# arithmetic

def reduce_mod_p(f: Poly, p: int) -> Poly:
    """Image of an integer polynomial in F_p[x]; vanishing terms are dropped."""
    p = check_prime(p)
    if f.modulus is not None and f.modulus != p:
        raise ValueError(f"polynomial already lives over F_{f.modulus}")
    return Poly._raw(f.ambient, dict(f._terms), p)


def _mul_dicts(a: dict, b: dict, modulus: int | None, q: int | None = None) -> dict:
    acc: dict = {}
    get = acc.get
    if len(a) < len(b):
        a, b = b, a
    for eb, cb in b.items():
        for ea, ca in a.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            if q is not None and max(e) >= q:
                continue
            acc[e] = get(e, 0) + ca * cb
    if modulus is not None:
        acc = {e: c % modulus for e, c in acc.items() if c % modulus}
    else:
        acc = {e: c for e, c in acc.items() if c}
    return acc


def poly_mul(a: Poly, b: Poly) -> Poly:
    a._check_compatible(b)
    if not a or not b:
        return Poly.zero(a.ambient, a.modulus)
    acc = _mul_dicts(a._terms, b._terms, a.modulus)
    for e in acc:
        if max(e) >= MAX_EXPONENT:
            raise ExponentOverflow(f"product exponent {e} exceeds the 32-bit bound")
    return Poly._raw(a.ambient, acc, a.modulus)


def power(g: Poly, k: int) -> Poly:
    """Untruncated ``g^k`` by square-and-multiply."""
    if k < 0:
        raise ValueError("negative exponent")
    result = Poly.one(g.ambient, g.modulus)
    base = g
    while k:
        if k & 1:
            result = poly_mul(result, base)
        k >>= 1
        if k:
            base = poly_mul(base, base)
    return result


class _Packer:
    """Pack exponent vectors (each < 2q) into one int for the truncated kernels.

    Every field is ``bits`` wide with ``2**(bits-1) >= q``; adding
    ``2**(bits-1) - q`` to each field sets the field's top bit exactly when
    that exponent is ``>= q``.
    """

    def __init__(self, n: int, q: int):
        self.n = n
        self.bits = bits = q.bit_length() + 1
        half = 1 << (bits - 1)
        self.mask = (1 << bits) - 1
        self.bias = sum((half - q) << (bits * i) for i in range(n))
        self.top = sum(half << (bits * i) for i in range(n))

    def pack(self, exp: Exponent) -> int:
        key = 0
        for i, a in enumerate(exp):
            key |= a << (self.bits * i)
        return key

    def unpack(self, key: int) -> Exponent:
        bits, mask = self.bits, self.mask
        return tuple((key >> (bits * i)) & mask for i in range(self.n))

    def killed(self, key: int) -> bool:
        return bool((key + self.bias) & self.top)


def _packed_mul(a: dict, b: dict, packer: _Packer, modulus: int | None) -> dict:
    acc: dict = {}
    get = acc.get
    bias, top = packer.bias, packer.top
    if len(a) < len(b):
        a, b = b, a
    for kb, cb in b.items():
        for ka, ca in a.items():
            k = ka + kb
            if (k + bias) & top:
                continue
            acc[k] = get(k, 0) + ca * cb
    if modulus is not None:
        return {k: c % modulus for k, c in acc.items() if c % modulus}
    return {k: c for k, c in acc.items() if c}


def power_truncated(g: Poly, k: int, q: int, method: str | None = None) -> Poly:
    """``g^k`` with every term having an exponent ``>= q`` deleted.

    Deletion happens after every intermediate product.  Two multiplication
    chains are available: ``"square"`` (binary square-and-multiply) and
    ``"frobenius"`` (prime-field coefficients only: ``g^k`` is the product
    over base-p digits ``k_i`` of ``g^{k_i}`` with exponents scaled by
    ``p^i``).  The default is ``"frobenius"`` over F_p and ``"square"``
    over the integers.
    """
    if k < 0:
        raise ValueError("negative exponent")
    if q < 1:
        raise ValueError("truncation bound must be >= 1")
    n = g.ambient.n
    if n * q >= MAX_EXPONENT:
        raise ExponentOverflow(f"truncation bound q={q} too large for {n} variables")
    if method is None:
        method = "square" if g.modulus is None else "frobenius"
    if method not in ("square", "frobenius"):
        raise ValueError(f"unknown method {method!r}")
    if method == "frobenius" and g.modulus is None:
        raise ValueError("the frobenius chain needs prime-field coefficients")

    packer = _Packer(n, q)
    modulus = g.modulus
    one = {packer.pack((0,) * n): 1}
    base = {packer.pack(e): c for e, c in g.truncate(q)}

    if method == "square":
        result = one
        while k:
            if k & 1:
                result = _packed_mul(result, base, packer, modulus)
            k >>= 1
            if k and base:
                base = _packed_mul(base, base, packer, modulus)
            if not result:
                break
    else:
        p = modulus
        digits = []
        while k:
            k, d = divmod(k, p)
            digits.append(d)
        small = [one]
        for _ in range(max(digits, default=0)):
            small.append(_packed_mul(small[-1], base, packer, modulus))
        result = one
        scale = 1
        for d in digits:
            if d:
                inflated = {}
                for key, c in small[d].items():
                    e = tuple(a * scale for a in packer.unpack(key))
                    if max(e, default=0) < q:
                        inflated[packer.pack(e)] = c
                result = _packed_mul(result, inflated, packer, modulus)
                if not result:
                    break
            scale *= p
    acc = {packer.unpack(key): c for key, c in result.items()}
    return Poly._raw(g.ambient, acc, modulus)


def weighted_order(f: Poly, weights: Sequence[int] | None = None):
    """Minimum weighted degree over the terms of ``f``; :data:`INF` for zero."""
    if not f:
        return INF
    return min(f.degrees(weights))


def bracket_membership(f: Poly, q: int) -> bool:
    """Is ``f`` in the monomial ideal ``(x_1^q, ..., x_n^q)``?"""
    if q < 1:
        raise ValueError("bound must be >= 1")
    return all(max(e, default=0) >= q for e in f.terms)


def monomial_counts(weights: Sequence[int], top: int, box: int | None = None) -> list[int]:
    """Number of monomials of each weighted degree ``0..top``.

    With ``box`` set, only monomials whose exponents are all ``< box`` count.
    """
    counts = [0] * (top + 1)
    counts[0] = 1
    for w in weights:
        nxt = counts[:]
        # multiply by 1/(1 - t^w), then by (1 - t^{box*w}) when boxed
        for t in range(w, top + 1):
            nxt[t] += nxt[t - w]
        if box is not None:
            cut = box * w
            for t in range(top, cut - 1, -1):
                nxt[t] -= nxt[t - cut]
        counts = nxt
    return counts
