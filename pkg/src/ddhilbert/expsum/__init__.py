"""Two-parameter exponential sums.

    H_{N1,N2}(xi) = sum_{1<=|t1|<=N1, 1<=|t2|<=N2} e(-(xi1 t1 + xi2 t2 + xi3 P(t))) / (t1 t2)

with e(x) = exp(2 pi i x). Sign quadrants are folded onto t > 0: quadrant
(s1, s2) contributes s1 s2 e(-G_s(u)) / (u1 u2) where G_s is the phase
polynomial of P(s1 u1, s2 u2). Quadrants with identical G_s are merged
before any arithmetic, which makes the sum at xi = 0, or for P even in a
variable, exactly zero.

Two evaluation paths:

stream
    Forward differences of G_s in 128-bit fixed point plus a residue mod q,
    so every phase is exact before the final conversion to double.
residue
    When xi is rational a/q with small q, sum over residue classes mod q:
    the weights sum_{u = l mod q} 1/u come from the digamma function.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from ..numtheory import roots_of_unity
from ..polynomial import Polynomial, eval_exact, eval_mod_grid
from . import _kernel
from .phase import MOD, PhaseContext, as_context, describe

__all__ = [
    "PhaseContext", "SumResult", "as_context", "describe", "hilbert_sum", "dyadic_piece",
    "sharp_block", "weyl_sum", "box_terms", "differencing_identity_check",
    "partial_sup_scan", "default_workers", "BudgetError",
]

STREAM_BUDGET = 1 << 34
RESIDUE_MAX_Q = 2048
ERR_FACTOR = 16 * 2.0 ** -53
QUADRANTS = {
    "all": ((1, 1, 1.0), (-1, 1, -1.0), (1, -1, -1.0), (-1, -1, 1.0)),
    "positive": ((1, 1, 1.0),),
}
WORKERS_ENV = "DDHILBERT_WORKERS"


class BudgetError(RuntimeError):
    pass


@dataclass(frozen=True)
class SumResult:
    value: complex
    abs_error_bound: float
    terms: int
    method: str = "stream"


def default_workers() -> int:
    v = os.environ.get(WORKERS_ENV)
    if v:
        return max(1, int(v))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class _Axis:
    a: int
    b: int
    half: bool = False   # weight 1/2 at a and at b

    @property
    def n(self) -> int:
        return self.b - self.a + 1


# ------------------------------------------------------------ phase groups

def _phase_groups(P: Polynomial, ctx: PhaseContext, quads, sign: int = 1):
    """Merge quadrants into distinct phase polynomials.

    Returns [(fixed, rat, weight)] with fixed/rat dicts exponent -> coeff
    (mod 2^128 and mod q). sign=-1 negates the phase.
    """
    X1, X2, X3 = ctx.fixed
    A1, A2, A3 = ctx.num
    q = ctx.q
    merged: dict = {}
    for s1, s2, w in quads:
        fx: dict = {}
        rt: dict = {}
        for (m1, m2), c in P._pairs:
            cc = c * s1 ** m1 * s2 ** m2
            fx[(m1, m2)] = fx.get((m1, m2), 0) + X3 * cc
            rt[(m1, m2)] = rt.get((m1, m2), 0) + A3 * cc
        fx[(1, 0)] = fx.get((1, 0), 0) + X1 * s1
        fx[(0, 1)] = fx.get((0, 1), 0) + X2 * s2
        rt[(1, 0)] = rt.get((1, 0), 0) + A1 * s1
        rt[(0, 1)] = rt.get((0, 1), 0) + A2 * s2
        fx = {e: (sign * v) % MOD for e, v in fx.items() if (sign * v) % MOD}
        rt = {e: (sign * v) % q for e, v in rt.items() if (sign * v) % q}
        key = (tuple(sorted(fx.items())), tuple(sorted(rt.items())))
        merged[key] = merged.get(key, 0.0) + w
    return [(dict(k[0]), dict(k[1]), w) for k, w in merged.items() if w != 0.0]


def _degrees(groups) -> tuple[int, int]:
    d1 = d2 = 0
    for fx, rt, _ in groups:
        for (m1, m2) in list(fx) + list(rt):
            d1, d2 = max(d1, m1), max(d2, m2)
    return d1, d2


def _eval(coeffs: dict, u1: int, u2: int, mod: int) -> int:
    return sum(c * pow(u1, m1, mod) * pow(u2, m2, mod) for (m1, m2), c in coeffs.items()) % mod


def _diff_table(coeffs: dict, u1: int, u2: int, D1: int, D2: int, mod: int) -> list[list[int]]:
    """T[i][l] = Delta_1^i Delta_2^l G(u1, u2) mod `mod`."""
    V = [[_eval(coeffs, u1 + k, u2 + h, mod) for h in range(D2)] for k in range(D1)]
    for i in range(1, D1):
        for k in range(D1 - 1, i - 1, -1):
            V[k] = [(x - y) % mod for x, y in zip(V[k], V[k - 1])]
    for row in V:
        for l in range(1, D2):
            for h in range(D2 - 1, l - 1, -1):
                row[h] = (row[h] - row[h - 1]) % mod
    return V


# ------------------------------------------------------------------ stream

def _stripe_rows(n2: int) -> int:
    return max(32, -(-n2 // 4096))


_MASK64 = (1 << 64) - 1


def _stream(groups, q: int, ax1: _Axis, ax2: _Axis, kernel: bool, workers: int) -> tuple[complex, float]:
    d1, d2 = _degrees(groups)
    D1, D2 = d1 + 1, d2 + 1
    ng = len(groups)
    step = _stripe_rows(ax2.n)
    starts = list(range(ax2.a, ax2.b + 1, step))
    ns = len(starts)
    st_hi = np.zeros((ns, ng, D1, D2), np.uint64)
    st_lo = np.zeros((ns, ng, D1, D2), np.uint64)
    st_r = np.zeros((ns, ng, D1, D2), np.int64)
    for s, u2 in enumerate(starts):
        for g, (fx, rt, _) in enumerate(groups):
            T = _diff_table(fx, ax1.a, u2, D1, D2, MOD)
            st_hi[s, g] = np.array([[v >> 64 for v in row] for row in T], dtype=np.uint64)
            st_lo[s, g] = np.array([[v & _MASK64 for v in row] for row in T], dtype=np.uint64)
            if q > 1:
                st_r[s, g] = np.array(_diff_table(rt, ax1.a, u2, D1, D2, q), dtype=np.int64)
    weights = np.array([w for _, _, w in groups], dtype=np.float64)
    row0 = np.array(starts, dtype=np.int64)
    nrows = np.array([min(step, ax2.b - u + 1) for u in starts], dtype=np.int64)
    out = np.zeros((ns, 3))
    args = (st_hi, st_lo, st_r, weights, q, ax1.a, ax1.b, ax1.half,
            ax2.a, ax2.b, ax2.half, kernel, row0, nrows, out)
    workers = max(1, min(workers, ns))
    if workers == 1:
        _kernel.stripe_sums(0, ns, *args)
    else:
        bounds = [ns * k // workers for k in range(workers + 1)]
        with ThreadPoolExecutor(max_workers=workers) as ex:
            futs = [ex.submit(_kernel.stripe_sums, bounds[k], bounds[k + 1], *args)
                    for k in range(workers)]
            for f in futs:
                f.result()
    re = math.fsum(out[:, 0])
    im = math.fsum(out[:, 1])
    return complex(re, im), ERR_FACTOR * math.fsum(out[:, 2])


# ----------------------------------------------------------------- residue

def _class_weights(ax: _Axis, q: int, kernel: bool) -> np.ndarray:
    """W[r] = sum of point weights over u in [a, b] with u = r mod q."""
    W = np.zeros(q)
    with mpmath.workdps(30):
        for r in range(q):
            lo = -((r - ax.a) // q)          # ceil((a - r) / q)
            hi = (ax.b - r) // q
            if r == 0:
                lo = max(lo, 1)
            if hi < lo:
                continue
            if not kernel:
                w = mpmath.mpf(hi - lo + 1)
            elif hi - lo < 64:
                w = mpmath.fsum(mpmath.mpf(1) / (q * m + r) for m in range(lo, hi + 1))
            else:
                x = mpmath.mpf(r) / q
                w = (mpmath.digamma(hi + 1 + x) - mpmath.digamma(lo + x)) / q
            if ax.half:
                for e in {ax.a, ax.b}:
                    if e % q == r:
                        w -= mpmath.mpf(1) / (2 * e) if kernel else mpmath.mpf(1) / 2
            W[r] = float(w)
    return W


def _rational_groups(groups, q: int):
    """Rewrite every phase as R/Q with Q = q 2^k, or None if k would exceed 20."""
    k = 0
    for fx, _, _ in groups:
        for v in fx.values():
            tz = (v & -v).bit_length() - 1
            k = max(k, 128 - tz)
    if k > 20:
        return None
    Q = q << k
    out = []
    for fx, rt, w in groups:
        comb: dict = {}
        for e, v in rt.items():
            comb[e] = (comb.get(e, 0) + (v << k)) % Q
        for e, v in fx.items():
            comb[e] = (comb.get(e, 0) + (v >> (128 - k)) * q) % Q
        out.append((comb, w))
    return Q, out


def _residue(groups, q: int, ax1: _Axis, ax2: _Axis, kernel: bool) -> tuple[complex, float]:
    W1 = _class_weights(ax1, q, kernel)
    W2 = _class_weights(ax2, q, kernel)
    tab = roots_of_unity(q)
    r = np.arange(q, dtype=np.int64)
    total = 0j
    chunk = max(1, (1 << 22) // q)
    for rt, w in groups:
        G = Polynomial.from_dict(rt)
        acc = []
        for i0 in range(0, q, chunk):
            rows = r[i0:i0 + chunk]
            res = eval_mod_grid(G, rows[:, None], r[None, :], q)
            E = tab[(-res) % q]
            acc.append((E * W2[None, :]).sum(axis=1) * W1[i0:i0 + chunk])
        v = np.concatenate(acc)
        total += w * complex(math.fsum(v.real), math.fsum(v.imag))
    absw = sum(abs(w) for _, w in groups) * float(W1.sum()) * float(W2.sum())
    return total, ERR_FACTOR * absw * 4


# -------------------------------------------------------------- front ends

def _evaluate(P: Polynomial, ctx: PhaseContext, quads, ax1: _Axis, ax2: _Axis,
              kernel: bool, method: str, workers: int | None, sign: int = 1) -> SumResult:
    if ax1.n <= 0 or ax2.n <= 0:
        return SumResult(0j, 0.0, 0, method)
    cells = ax1.n * ax2.n
    terms = cells * len(quads)
    groups = _phase_groups(P, ctx, quads, sign)
    if not groups:
        return SumResult(0j, 0.0, terms, "folded")
    q = ctx.q
    rat = _rational_groups(groups, q)
    res_ok = rat is not None and rat[0] <= RESIDUE_MAX_Q
    if method == "auto":
        method = "residue" if res_ok and rat[0] ** 2 * 4 <= cells else "stream"
    if method == "residue":
        if not res_ok:
            raise ValueError("residue method needs a rational xi with small denominator")
        v, err = _residue(rat[1], rat[0], ax1, ax2, kernel)
        return SumResult(v, err, terms, "residue")
    if method != "stream":
        raise ValueError(f"unknown method {method!r}")
    if cells * len(groups) > STREAM_BUDGET:
        raise BudgetError(f"{cells} lattice points exceed the streaming budget")
    v, err = _stream(groups, q, ax1, ax2, kernel, workers or default_workers())
    return SumResult(v, err, terms, "stream")


def hilbert_sum(P: Polynomial, N1: int, N2: int, xi, *, quadrants: str = "all",
                method: str = "auto", workers: int | None = None) -> SumResult:
    if N1 < 1 or N2 < 1:
        raise ValueError("N1, N2 must be positive")
    return _evaluate(P, as_context(xi), QUADRANTS[quadrants], _Axis(1, N1), _Axis(1, N2),
                     True, method, workers)


def _dyadic_axis(j: int) -> _Axis:
    if j < 0:
        raise ValueError("j must be non-negative")
    return _Axis(1, 1) if j == 0 else _Axis((1 << (j - 1)) + 1, 1 << j)


def dyadic_piece(P: Polynomial, j: tuple[int, int], xi, *, quadrants: str = "all",
                 method: str = "auto", workers: int | None = None) -> SumResult:
    """Block t1 ~ 2^j1, t2 ~ 2^j2 with t in (2^(j-1), 2^j], t = 1 for j = 0."""
    return _evaluate(P, as_context(xi), QUADRANTS[quadrants], _dyadic_axis(j[0]),
                     _dyadic_axis(j[1]), True, method, workers)


def _sharp_axis(j: int) -> _Axis:
    if j == 0:
        return _Axis(1, 1, True)
    return _Axis(1 << (j - 1), 1 << j, True)


def sharp_block(P: Polynomial, j: tuple[int, int], xi, *, quadrants: str = "positive",
                method: str = "auto", workers: int | None = None) -> SumResult:
    """sum_t chi_j1(t1) chi_j2(t2) e(-xi.(t, P(t))) / (t1 t2) with the sharp cutoff.

    The sharp cutoff is 1 strictly inside [2^(j-1), 2^j] and 1/2 at both ends.
    """
    return _evaluate(P, as_context(xi), QUADRANTS[quadrants], _sharp_axis(j[0]),
                     _sharp_axis(j[1]), True, method, workers)


def weyl_sum(P: Polynomial, box, xi3, *, xi_linear=(0, 0), method: str = "auto",
             workers: int | None = None) -> SumResult:
    """sum over the box of e(xi3 P(t) + xi1 t1 + xi2 t2), unweighted."""
    (a1, b1), (a2, b2) = box
    if min(a1, a2) < 1:
        raise ValueError("box ranges must be positive integers")
    ctx = as_context((xi_linear[0], xi_linear[1], xi3))
    return _evaluate(P, ctx, QUADRANTS["positive"], _Axis(a1, b1), _Axis(a2, b2),
                     False, method, workers, sign=-1)


def box_terms(P: Polynomial, box, xi, sign: int = 1) -> np.ndarray:
    """Array [t2 - a2, t1 - a1] of e(-sign * (xi1 t1 + xi2 t2 + xi3 P(t))) over a positive box."""
    (a1, b1), (a2, b2) = box
    ctx = as_context(xi)
    groups = _phase_groups(P, ctx, QUADRANTS["positive"], sign)
    n1, n2 = b1 - a1 + 1, b2 - a2 + 1
    if n1 * n2 > 1 << 26:
        raise BudgetError("box too large to materialize")
    if not groups:
        return np.ones((n2, n1), dtype=np.complex128)
    fx, rt, _ = groups[0]
    D1, D2 = (d + 1 for d in _degrees(groups))
    T = _diff_table(fx, a1, a2, D1, D2, MOD)
    hi = np.array([[v >> 64 for v in row] for row in T], dtype=np.uint64)
    lo = np.array([[v & _MASK64 for v in row] for row in T], dtype=np.uint64)
    r = np.array(_diff_table(rt, a1, a2, D1, D2, ctx.q), dtype=np.int64) if ctx.q > 1 \
        else np.zeros((D1, D2), np.int64)
    out = np.empty((n2, n1), dtype=np.complex128)
    _kernel.box_terms(hi, lo, r, ctx.q, n1, n2, out)
    return out


# ------------------------------------------------------- differencing check

def _slice_residues(P: Polynomial, t1: int, num: int, den: int, t2s: range) -> list[int]:
    """num * P(t1, t2) mod den for t2 in t2s, by Horner in t2 on exact integers."""
    coeffs = [0] * (P.degrees[1] + 1)
    for (a, b), c in P.as_dict().items():
        coeffs[b] += c * t1 ** a
    coeffs = [num * c % den for c in reversed(coeffs)]
    out = []
    for t2 in t2s:
        v = 0
        for c in coeffs:
            v = (v * t2 + c) % den
        out.append(v)
    return out


def _e_residues(res: list[int], den: int) -> tuple[float, float]:
    f = np.array([r / den for r in res])
    ang = 2 * math.pi * f
    return math.fsum(np.cos(ang)), math.fsum(np.sin(ang))


def differencing_identity_check(P: Polynomial, xi3, t1: int, rng: tuple[int, int]) -> float:
    """| |sum_{t2} e(xi3 P)|^2 - sum_r sum_{t2} e(xi3 (P(t1, t2 + r) - P(t1, t2))) |."""
    from ..rational import to_fraction
    x = to_fraction(xi3) % 1
    num, den = x.numerator, x.denominator
    a, b = rng
    if b < a:
        raise ValueError("empty range")
    s_re, s_im = _e_residues(_slice_residues(P, t1, num, den, range(a, b + 1)), den)
    lhs = math.fsum([s_re * s_re, s_im * s_im])
    re_parts, im_parts = [], []
    for r in range(a - b, b - a + 1):
        D = P.shift_difference(r)
        res = _slice_residues(D, t1, num, den, range(max(a, a - r), min(b, b - r) + 1))
        c, s_ = _e_residues(res, den)
        re_parts.append(c)
        im_parts.append(s_)
    rhs = complex(math.fsum(re_parts), math.fsum(im_parts))
    return abs(lhs - rhs)


# ------------------------------------------------------------ sup scanning

def partial_sup_scan(P: Polynomial, xi3_grid, N_schedule, *, method: str = "auto",
                     workers: int | None = None) -> list[tuple[int, float]]:
    """Running max over N of max over the grid of |H_{N,N}(0, 0, xi3)|."""
    table = []
    best = 0.0
    for N in N_schedule:
        for x in xi3_grid:
            best = max(best, abs(hilbert_sum(P, N, N, (0, 0, x), method=method,
                                             workers=workers).value))
        table.append((int(N), best))
    return table
