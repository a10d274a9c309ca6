"""Integer polynomials in two variables t1, t2.

A polynomial is stored as an immutable, canonically ordered tuple of
monomials with nonzero integer coefficients. Evaluation is exact (Python
integers) or modular; nothing here touches floating point except
`eval_scaled`, which is used for diagnostics only.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
import sympy

Exponent = tuple[int, int]


class ParseError(ValueError):
    """Raised for malformed polynomial text; `pos` is a 0-based offset."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


@dataclass(frozen=True)
class Monomial:
    exponent: Exponent
    coefficient: int


@dataclass(frozen=True)
class Polynomial:
    # canonical: lexicographic on exponent, descending; coefficients nonzero
    terms: tuple[Monomial, ...]

    @classmethod
    def from_dict(cls, d: dict[Exponent, int]) -> Polynomial:
        items = sorted(((e, c) for e, c in d.items() if c != 0), reverse=True)
        for (m1, m2), _ in items:
            if m1 < 0 or m2 < 0:
                raise ValueError("negative exponent")
        return cls(tuple(Monomial((int(e[0]), int(e[1])), int(c)) for e, c in items))

    def as_dict(self) -> dict[Exponent, int]:
        return {m.exponent: m.coefficient for m in self.terms}

    @property
    def support(self) -> frozenset[Exponent]:
        return frozenset(m.exponent for m in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    @cached_property
    def degree(self) -> int:
        return max((m1 + m2 for (m1, m2), _ in self._pairs), default=0)

    @cached_property
    def degrees(self) -> Exponent:
        """Degrees in t1 and in t2 separately."""
        return (max((e[0] for e, _ in self._pairs), default=0),
                max((e[1] for e, _ in self._pairs), default=0))

    @cached_property
    def _pairs(self) -> tuple[tuple[Exponent, int], ...]:
        return tuple((m.exponent, m.coefficient) for m in self.terms)

    def __str__(self) -> str:
        return render(self)

    def __add__(self, other: Polynomial) -> Polynomial:
        d = self.as_dict()
        for e, c in other._pairs:
            d[e] = d.get(e, 0) + c
        return Polynomial.from_dict(d)

    def __neg__(self) -> Polynomial:
        return Polynomial.from_dict({e: -c for e, c in self._pairs})

    def __sub__(self, other: Polynomial) -> Polynomial:
        return self + (-other)

    def __mul__(self, other: Polynomial) -> Polynomial:
        d: dict[Exponent, int] = {}
        for (a1, a2), c in self._pairs:
            for (b1, b2), k in other._pairs:
                e = (a1 + b1, a2 + b2)
                d[e] = d.get(e, 0) + c * k
        return Polynomial.from_dict(d)

    def __pow__(self, n: int) -> Polynomial:
        out = constant(1)
        for _ in range(n):
            out = out * self
        return out

    def substitute_signs(self, s1: int, s2: int) -> Polynomial:
        """P(s1*t1, s2*t2) for signs s1, s2 in {+1, -1}."""
        return Polynomial.from_dict(
            {(m1, m2): c * s1 ** m1 * s2 ** m2 for (m1, m2), c in self._pairs})

    def shift_difference(self, r: int) -> Polynomial:
        """P(t1, t2 + r) - P(t1, t2)."""
        d: dict[Exponent, int] = {}
        for (m1, m2), c in self._pairs:
            for k in range(m2 + 1):
                e = (m1, k)
                d[e] = d.get(e, 0) + c * math.comb(m2, k) * r ** (m2 - k)
            d[(m1, m2)] -= c
        return Polynomial.from_dict(d)

    def t1_coefficients(self) -> dict[int, dict[int, int]]:
        """P as a polynomial in t1: {k: {t2 power: coeff}} for t1^k."""
        out: dict[int, dict[int, int]] = {}
        for (m1, m2), c in self._pairs:
            out.setdefault(m1, {})[m2] = c
        return out


def constant(c: int) -> Polynomial:
    return Polynomial.from_dict({(0, 0): c})


def monomial(c: int, m1: int, m2: int) -> Polynomial:
    return Polynomial.from_dict({(m1, m2): c})


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|(t1|t2)|([-+*^()])|(\S))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # only trailing whitespace left
            break
        num, var, op, bad = m.groups()
        start = m.start(m.lastindex)
        if bad is not None:
            raise ParseError(f"unexpected character {bad!r}", start)
        if num is not None:
            if "." in num:
                raise ParseError("non-integer coefficient", start)
            toks.append(("int", num, start))
        elif var is not None:
            toks.append(("var", var, start))
        else:
            toks.append(("op", op, start))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def take(self) -> tuple[str, str, int]:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expr(self) -> Polynomial:
        kind, val, _ = self.peek()
        sign = 1
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        out = self.term()
        if sign < 0:
            out = -out
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                t = self.term()
                out = out + t if val == "+" else out - t
            else:
                return out

    def term(self) -> Polynomial:
        out = self.factor()
        while self.peek()[:2] == ("op", "*"):
            self.take()
            out = out * self.factor()
        return out

    def factor(self) -> Polynomial:
        base = self.primary()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            kind, val, pos = self.take()
            if kind == "op" and val == "-":
                raise ParseError("negative exponent", pos)
            if kind != "int":
                raise ParseError("expected integer exponent", pos)
            base = base ** int(val)
        return base

    def primary(self) -> Polynomial:
        kind, val, pos = self.take()
        if kind == "int":
            return constant(int(val))
        if kind == "var":
            return monomial(1, 1, 0) if val == "t1" else monomial(1, 0, 1)
        if kind == "op" and val == "(":
            inner = self.expr()
            k2, v2, p2 = self.take()
            if (k2, v2) != ("op", ")"):
                raise ParseError("expected ')'", p2)
            return inner
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected token {val!r}", pos)


def parse(text: str) -> Polynomial:
    """Parse text such as ``"t1^3*t2^2 + t1*t2^5"`` into a Polynomial."""
    p = _Parser(text)
    out = p.expr()
    kind, val, pos = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected token {val!r}", pos)
    return out


def render(P: Polynomial) -> str:
    """Canonical text form; ``parse(render(P)) == P``."""
    if P.is_zero():
        return "0"
    parts = []
    for i, m in enumerate(P.terms):
        c = m.coefficient
        m1, m2 = m.exponent
        factors = []
        if m1:
            factors.append("t1" if m1 == 1 else f"t1^{m1}")
        if m2:
            factors.append("t2" if m2 == 1 else f"t2^{m2}")
        mag = abs(c)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = f"{mag}*" + "*".join(factors)
        if i == 0:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts)


# ------------------------------------------------------------- evaluation

def eval_exact(P: Polynomial, t: tuple[int, int]) -> int:
    t1, t2 = int(t[0]), int(t[1])
    return sum(c * t1 ** m1 * t2 ** m2 for (m1, m2), c in P._pairs)


def eval_mod(P: Polynomial, t: tuple[int, int], q: int) -> int:
    if q < 1:
        raise ValueError("q must be positive")
    t1, t2 = int(t[0]) % q, int(t[1]) % q
    acc = 0
    for (m1, m2), c in P._pairs:
        acc = (acc + (c % q) * pow(t1, m1, q) * pow(t2, m2, q)) % q
    return acc


def eval_mod_grid(P: Polynomial, t1, t2, q: int) -> np.ndarray:
    """Vectorized eval_mod over broadcastable integer arrays t1, t2.

    Uses int64 arithmetic, so q must stay below 2**31.
    """
    if not 1 <= q < 2 ** 31:
        raise ValueError("eval_mod_grid needs 1 <= q < 2**31")
    a1 = np.mod(np.asarray(t1, dtype=np.int64), q)
    a2 = np.mod(np.asarray(t2, dtype=np.int64), q)
    d1, d2 = P.degrees
    pow1 = [np.ones_like(a1)]
    for _ in range(d1):
        pow1.append(pow1[-1] * a1 % q)
    pow2 = [np.ones_like(a2)]
    for _ in range(d2):
        pow2.append(pow2[-1] * a2 % q)
    acc = np.zeros(np.broadcast(a1, a2).shape, dtype=np.int64)
    for (m1, m2), c in P._pairs:
        acc = (acc + (c % q) * (pow1[m1] * pow2[m2] % q)) % q
    return acc


def eval_scaled(P: Polynomial, j: tuple[int, int], m: Exponent,
                x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """P(2^j1 x1, 2^j2 x2) / 2^(j.m) in floating point, without overflow."""
    jm = j[0] * m[0] + j[1] * m[1]
    out = np.zeros(np.broadcast(x1, x2).shape)
    for (n1, n2), c in P._pairs:
        out += c * math.ldexp(1.0, j[0] * n1 + j[1] * n2 - jm) * x1 ** n1 * x2 ** n2
    return out


# ---------------------------------------------------------- constant C(P)

def annihilating_t2(P: Polynomial) -> list[int]:
    """Positive integers s with P(t1, s) identically zero in t1."""
    t = sympy.Symbol("t")
    g = None
    for row in P.t1_coefficients().values():
        r = sympy.Poly(sum(c * t ** k for k, c in row.items()), t)
        g = r if g is None else sympy.gcd(g, r)
    if g is None or g.degree() <= 0:
        return []
    return sorted(int(x) for x in g.ground_roots() if x.is_integer and x > 0)


def coefficient_ratio_constant(P: Polynomial) -> int:
    if P.is_zero():
        raise ValueError("C(P) undefined for the zero polynomial")
    cs = [abs(c) for _, c in P._pairs]
    ratio = sum(Fraction(a, b) for a in cs for b in cs)
    base = math.ceil(10 * ratio)
    roots = annihilating_t2(P)
    pow_term = 1 << (max(roots) - 1).bit_length() if roots else 1
    return max(base, pow_term)
