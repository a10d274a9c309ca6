"""Complete exponential sums modulo q and congruence-root counting.

Residues a*P(l) mod q are computed exactly; the exponential is looked up in
a table of q-th roots of unity whose entries are built from the reduced
residue, so no phase error accumulates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from .polynomial import Polynomial, eval_mod_grid


@dataclass(frozen=True)
class GaussSumValue:
    value: complex
    q: int
    a: int
    t2: int | None = None

    @property
    def magnitude(self) -> float:
        return abs(self.value)


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    constant: float
    r_squared: float
    sample_range: tuple[float, float]


@lru_cache(maxsize=64)
def roots_of_unity(q: int) -> np.ndarray:
    """exp(2 pi i k / q) for k = 0..q-1, each entry correctly rounded."""
    with mpmath.workdps(30):
        tab = np.array([complex(mpmath.cospi(mpmath.mpf(2 * k) / q), mpmath.sinpi(mpmath.mpf(2 * k) / q))
                        for k in range(q)])
    tab.setflags(write=False)
    return tab


def _check(a: int, q: int) -> None:
    if q < 1:
        raise ValueError("q must be positive")
    if math.gcd(a, q) != 1:
        raise ValueError("gcd(a, q) must be 1")


def _fiber_values(P: Polynomial, t2: np.ndarray, a: int, q: int) -> np.ndarray:
    t1 = np.arange(1, q + 1)[:, None]
    res = eval_mod_grid(P, t1, t2[None, :], q)
    res = res * (a % q) % q
    return roots_of_unity(q)[res].mean(axis=0)


def gauss_fiber(P: Polynomial, t2: int, a: int, q: int) -> GaussSumValue:
    """(1/q) sum_{t1=1..q} e(a P(t1, t2) / q)."""
    _check(a, q)
    v = _fiber_values(P, np.array([t2], dtype=np.int64), a, q)[0]
    return GaussSumValue(complex(v), q, a % q, t2)


def gauss_fiber_average(P: Polynomial, j2: int, a: int, q: int) -> float:
    """Mean of |S^{t2}(a/q)| over t2 in (2^(j2-1), 2^j2]."""
    _check(a, q)
    if j2 > 40:
        raise OverflowError("j2 too large for fiber enumeration")
    lo = (1 << (j2 - 1)) + 1 if j2 >= 1 else 1
    t2 = np.arange(lo, (1 << j2) + 1, dtype=np.int64)
    mags = np.abs(_fiber_values(P, t2, a, q))
    return math.fsum(mags) / len(mags)


def vanishing_leading_fibers(P: Polynomial, j2: int, q: int) -> int:
    """Count of t2 in the j2 block whose leading t1-coefficient is 0 mod q."""
    rows = P.t1_coefficients()
    top = max(rows)
    lead = Polynomial.from_dict({(0, k): c for k, c in rows[top].items()})
    lo = (1 << (j2 - 1)) + 1 if j2 >= 1 else 1
    t2 = np.arange(lo, (1 << j2) + 1, dtype=np.int64)
    return int(np.count_nonzero(eval_mod_grid(lead, 0, t2, q) == 0))


def gauss_full(P: Polynomial, a: int, q: int, w: tuple[int, int]) -> GaussSumValue:
    """(1/q^2) sum_{l in [1,q]^2} e(-(a P(l) - w.l) / q)."""
    _check(a, q)
    l = np.arange(1, q + 1, dtype=np.int64)
    res = eval_mod_grid(P, l[:, None], l[None, :], q) * (a % q) % q
    res = (res - (w[0] % q) * l[:, None] - (w[1] % q) * l[None, :]) % q
    tab = roots_of_unity(q)
    vals = tab[(-res) % q]
    return GaussSumValue(complex(vals.mean()), q, a % q)


def count_congruence_roots(g: list[int], p: int, alpha: int, budget: int = 10 ** 6) -> int:
    """#{t in [1, p^alpha] : g(t) = 0 mod p^alpha}; g given low-to-high."""
    m = p ** alpha
    if m > budget:
        raise ValueError(f"p^alpha = {m} exceeds exhaustive budget {budget}")
    if m >= 2 ** 31:
        raise ValueError("modulus too large for int64 scan")
    t = np.arange(1, m + 1, dtype=np.int64) % m
    acc = np.zeros(m, dtype=np.int64)
    for c in reversed(g):
        acc = (acc * t + c % m) % m
    return int(np.count_nonzero(acc == 0))


def fit_decay(samples) -> DecayFit:
    """Least squares of log v = log C - delta log q."""
    pts = [(float(q), float(v)) for q, v in samples]
    if len(pts) < 3:
        raise ValueError("fit_decay needs at least 3 samples")
    if any(v <= 0 for _, v in pts):
        raise ValueError("fit_decay needs positive values")
    x = np.log([q for q, _ in pts])
    y = np.log([v for _, v in pts])
    if np.ptp(x) == 0:
        raise ValueError("degenerate sample: all q equal")
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    sxy = float(((x - xm) * (y - ym)).sum())
    slope = sxy / sxx
    icpt = ym - slope * xm
    ss_tot = float(((y - ym) ** 2).sum())
    ss_res = float(((y - icpt - slope * x) ** 2).sum())
    r2 = 1.0 if ss_tot <= 1e-24 * (1.0 + float((y * y).sum())) else max(0.0, 1.0 - ss_res / ss_tot)
    qs = [q for q, _ in pts]
    return DecayFit(0.0 - slope, math.exp(icpt), r2, (min(qs), max(qs)))
