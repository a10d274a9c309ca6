"""Dirichlet approximation and the denominator selector q(j, xi).

Every comparison is exact: xi is held as a Fraction, and the dyadic height
N_j = 2^(j.m - j1/10) is never evaluated, only compared through tenth
powers.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import mpmath

EXPONENT_BUDGET = 40960   # max of 10*(j.m) - j1

Real = Union[int, float, str, Fraction, "mpmath.mpf"]


def to_fraction(x: Real) -> Fraction:
    """Exact rational value of x (decimal strings and floats are exact)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, mpmath.mpf):
        man, exp = x.man_exp
        return Fraction(int(man)) * Fraction(2) ** int(exp)
    if isinstance(x, str):
        s = x.strip()
        if "/" in s:
            n, d = s.split("/")
            return Fraction(int(n), int(d))
        return Fraction(s)
    return Fraction(x)


class ExponentBudgetError(OverflowError):
    pass


@dataclass(frozen=True)
class DyadicHeight:
    """N_j = 2^(e10 / 10) with e10 = 10 (j.m) - j1, clamped at N_j >= 1."""
    j: tuple[int, int]
    vertex: tuple[int, int]

    @property
    def e10_raw(self) -> int:
        return 10 * (self.j[0] * self.vertex[0] + self.j[1] * self.vertex[1]) - self.j[0]

    @property
    def e10(self) -> int:
        e = self.e10_raw
        if e > EXPONENT_BUDGET:
            raise ExponentBudgetError(f"10*(j.m)-j1 = {e} exceeds budget {EXPONENT_BUDGET}")
        return max(e, 0)

    @property
    def clamped(self) -> bool:
        return self.e10_raw < 0

    def q_fits(self, q: int) -> bool:
        return q ** 10 <= 1 << self.e10

    def beta_ok(self, beta: Fraction, q: int) -> bool:
        return self.err_ok(abs(beta.numerator) * q, beta.denominator, 1)

    def err_ok(self, e: int, den: int, q: int) -> bool:
        # |beta| q N < 1 with |beta| q = e / den  <=>  e^10 2^e10 < den^10
        if e == 0:
            return True
        return (e ** 10) << self.e10 < den ** 10

    def as_float(self) -> float:
        return 2.0 ** (self.e10 / 10)


@dataclass(frozen=True)
class _PlainHeight:
    N: Fraction

    def q_fits(self, q: int) -> bool:
        return q <= self.N

    def beta_ok(self, beta: Fraction, q: int) -> bool:
        return abs(beta) * q * self.N < 1

    def err_ok(self, e: int, den: int, q: int) -> bool:
        return e * self.N < den

    def as_float(self) -> float:
        return float(self.N)


@dataclass(frozen=True)
class RationalApprox:
    a: int
    q: int
    beta: Fraction
    N: float

    @property
    def value(self) -> Fraction:
        return Fraction(self.a, self.q) + self.beta


def convergent_denominators(x: Fraction):
    """Yield the continued-fraction convergent denominators of x, increasing."""
    q_prev, q = 1, 0
    num, den = x.numerator, x.denominator
    last = 0
    while True:
        a, r = divmod(num, den)
        q_prev, q = q, a * q + q_prev
        if q > last:  # q = 1 can repeat
            yield q
            last = q
        if r == 0:
            return
        num, den = den, r


@functools.lru_cache(maxsize=256)
def _convergent_table(xi: Fraction) -> tuple[tuple[int, int, int], ...]:
    """(q, a, |q num - a den|) along the convergents, a = nearest integer to q xi."""
    num, den = xi.numerator, xi.denominator
    out = []
    for q in convergent_denominators(xi):
        a = (2 * num * q + den) // (2 * den)
        out.append((q, a, abs(num * q - a * den)))
    return tuple(out)


def _approx(xi: Fraction, height) -> RationalApprox:
    # The smallest q with ||q xi|| < 1/N is a best approximation of the second
    # kind, hence a convergent denominator, and ||q xi|| decreases along them.
    den = xi.denominator
    tab = _convergent_table(xi)
    lo, hi = 0, len(tab) - 1          # the last entry is exact, so always ok
    while lo < hi:
        mid = (lo + hi) // 2
        if height.err_ok(tab[mid][2], den, tab[mid][0]):
            hi = mid
        else:
            lo = mid + 1
    q, a, _ = tab[lo]
    if not height.q_fits(q) or math.gcd(a, q) != 1:
        raise AssertionError("Dirichlet approximation not found")  # unreachable
    return RationalApprox(a, q, xi - Fraction(a, q), height.as_float())


def dirichlet_approx(xi: Real, N: Real) -> RationalApprox:
    """Smallest q <= N with gcd(a, q) = 1 and |xi - a/q| < 1/(qN)."""
    Nf = to_fraction(N)
    if Nf < 1:
        raise ValueError("N must be >= 1")
    return _approx(to_fraction(xi), _PlainHeight(Nf))


def q_of(j: tuple[int, int], xi: Real, vertex: tuple[int, int]) -> RationalApprox:
    if j[0] < 0 or j[1] < 0:
        raise ValueError("j must be non-negative")
    return _approx(to_fraction(xi), DyadicHeight(tuple(j), tuple(vertex)))


@dataclass(frozen=True)
class SimultaneousApprox:
    q: int
    a: tuple[int, int, int]
    beta: tuple[Fraction, Fraction, Fraction]
    boundary: tuple[bool, bool]   # |beta_i| == 1/(2q) for i = 1, 2


def simultaneous_approx(xi, j: tuple[int, int], vertex: tuple[int, int]) -> SimultaneousApprox:
    x1, x2, x3 = (to_fraction(v) for v in xi)
    r3 = q_of(j, x3, vertex)
    q = r3.q
    a1, a2 = round(x1 * q), round(x2 * q)  # Fraction rounding is half-to-even
    b1, b2 = x1 - Fraction(a1, q), x2 - Fraction(a2, q)
    half = Fraction(1, 2 * q)
    return SimultaneousApprox(q, (a1, a2, r3.a), (b1, b2, r3.beta),
                              (abs(b1) == half, abs(b2) == half))
