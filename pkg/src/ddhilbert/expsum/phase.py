"""Exact phase representation for xi = (xi1, xi2, xi3).

Each component is split, modulo 1, into a 128-bit binary fixed-point part
X / 2^128 and a rational part A / q with q odd. Decimal inputs such as
"0.123" = 123/1000 split exactly (1000 = 2^3 * 125), so they are carried
without rounding. Inputs whose odd denominator part is too large are
rounded to the nearest multiple of 2^-128 and marked inexact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ..rational import Real, to_fraction

FRAC_BITS = 128
MOD = 1 << FRAC_BITS
MAX_ODD_DEN = 1 << 31
MAX_COMMON_Q = 1 << 62


@dataclass(frozen=True)
class PhaseContext:
    fixed: tuple[int, int, int]    # X_i in [0, 2^128)
    num: tuple[int, int, int]      # A_i in [0, q)
    q: int                         # common odd denominator, 1 if unused
    exact: tuple[bool, bool, bool]

    @property
    def represented(self) -> tuple[Fraction, Fraction, Fraction]:
        """The values actually used, reduced to [0, 1)."""
        return tuple((Fraction(X, MOD) + Fraction(A, self.q)) % 1
                     for X, A in zip(self.fixed, self.num))

    @property
    def is_rational_only(self) -> bool:
        return not any(self.fixed)

    def negated(self) -> PhaseContext:
        return PhaseContext(tuple((-X) % MOD for X in self.fixed),
                            tuple((-A) % self.q for A in self.num),
                            self.q, self.exact)

    @classmethod
    def zero(cls) -> PhaseContext:
        return cls((0, 0, 0), (0, 0, 0), 1, (True, True, True))

    @classmethod
    def from_values(cls, xi) -> PhaseContext:
        if isinstance(xi, PhaseContext):
            return xi
        vals = [to_fraction(v) % 1 for v in xi]
        if len(vals) != 3:
            raise ValueError("xi must have three components")
        splits = []
        for x in vals:
            den = x.denominator
            k = (den & -den).bit_length() - 1
            d = den >> k
            if k <= FRAC_BITS and d <= MAX_ODD_DEN:
                splits.append((k, d))
            else:
                splits.append(None)
        q = 1
        for s in splits:
            if s is not None:
                q = math.lcm(q, s[1])
        if q > MAX_COMMON_Q:
            splits = [None] * 3
            q = 1
        fixed, num, exact = [], [], []
        for x, s in zip(vals, splits):
            if s is None:
                fixed.append(round(x * MOD) % MOD)
                num.append(0)
                exact.append(False)
                continue
            k, d = s
            n = x.numerator
            A = n * pow(1 << k, -1, d) % d if d > 1 else 0
            B = (n - A * (1 << k)) // d
            fixed.append((B << (FRAC_BITS - k)) % MOD)
            num.append(A * (q // d) % q)
            exact.append(True)
        return cls(tuple(fixed), tuple(num), q, tuple(exact))


def as_context(xi) -> PhaseContext:
    return PhaseContext.from_values(xi)


def describe(ctx: PhaseContext) -> list[str]:
    """Human-readable represented values, one per component."""
    out = []
    for v, ex in zip(ctx.represented, ctx.exact):
        tag = "exact" if ex else "rounded to 2^-128"
        out.append(f"{v.numerator}/{v.denominator} ({tag})")
    return out
