"""Numerical checks of the identities behind the boundedness criterion.

Identity checks (major arc, Poisson) work with one-sided blocks t > 0 and
the sharp window, i.e. endpoint weights 1/2. Scans and the theorem
cross-check use the full four-quadrant sum.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import expsum
from .arcs import ArcClass, classify
from .newton import BoundednessVerdict, build, decide_boundedness, dual_face_of
from .numtheory import DecayFit, fit_decay, gauss_fiber, gauss_full
from .oscint import chi_sharp, osc_1d, osc_2d
from .polynomial import Polynomial
from .rational import to_fraction

DIVERGENT_SLOPE = 0.05
BOUNDED_SLOPE = 0.01
MIN_R2 = 0.9


class PreconditionError(ValueError):
    pass


@dataclass
class IdentityReport:
    lhs: complex
    rhs: complex
    residual: float
    tolerance: float
    passed: bool
    truncation: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = asdict(self)
        d["lhs"] = [self.lhs.real, self.lhs.imag]
        d["rhs"] = [self.rhs.real, self.rhs.imag]
        return d


def _report(lhs: complex, rhs: complex, tol: float, trunc: dict, info: dict) -> IdentityReport:
    res = abs(lhs - rhs)
    return IdentityReport(lhs, rhs, res, tol, bool(res <= tol), trunc, info)


def _vertex(P: Polynomial, j, vertex):
    return tuple(vertex) if vertex is not None else build(P).vertices[dual_face_of(build(P), j)]


def _arc_info(rep) -> dict:
    return {"class": rep.klass.value, "q": rep.q, "a": rep.a, "beta": str(rep.beta)}


# -------------------------------------------------------------- major arc

def major_arc_approx_check(P: Polynomial, j: tuple[int, int], xi3, vertex=None, *,
                           tol: float | None = None, quad_tol: float = 1e-12,
                           workers: int | None = None) -> IdentityReport:
    """Block sum vs sum_t2 chi(t2)/t2 S^{t2}(a/q) H_{j1}^{t2}(beta), one-sided."""
    j = tuple(j)
    m = _vertex(P, j, vertex)
    rep = classify(j, xi3, m)
    if rep.klass is ArcClass.MINOR:
        raise PreconditionError("major-arc check needs q < 2^(j1/10)")
    x3 = to_fraction(xi3)
    lhs = expsum.sharp_block(P, j, (0, 0, x3), quadrants="positive", workers=workers)
    j1, j2 = j
    lo, hi = (1, 1) if j2 == 0 else (1 << (j2 - 1), 1 << j2)
    parts = []
    qerr = 0.0
    for t2 in range(lo, hi + 1):
        w = float(chi_sharp(t2, j2)) / t2
        S = gauss_fiber(P, t2, -rep.a, rep.q).value
        I = osc_1d(P, t2, j1, rep.beta, sides="positive", cutoff="sharp", tol=quad_tol)
        if I.flagged:
            raise RuntimeError("oscillatory integral exceeded its panel budget")
        qerr += abs(w) * I.quadrature_error
        parts.append(w * S * I.value)
    rhs = complex(math.fsum(z.real for z in parts), math.fsum(z.imag for z in parts))
    tol = 2.0 ** (-j1 / 2) if tol is None else tol
    return _report(lhs.value, rhs, tol,
                   {"quad_tol": quad_tol, "quadrature_error": qerr,
                    "sum_error_bound": lhs.abs_error_bound, "sum_method": lhs.method},
                   {"j": list(j), "vertex": list(m), **_arc_info(rep)})


# ---------------------------------------------------------------- Poisson

def poisson_tail_estimate(W: int) -> float:
    """sum over |w|_inf > W of (|w|_inf + 1)^-5 in Z^2."""
    return sum(8 * k * (k + 1.0) ** -5 for k in range(W + 1, W + 20000))


def poisson_identity_check(P: Polynomial, j: tuple[int, int], xi3, vertex=None,
                           w_window: int = 16, *, tol: float = 1e-3,
                           require_flat: bool = True, quad_tol: float = 1e-11,
                           workers: int | None = None) -> IdentityReport:
    """Block sum vs sum_{|w| <= W} S_w(a/q) I(w/q, beta), one-sided.

    I(w/q, beta) = int e(-(w.y/q + beta P(y))) chi_j1(y1) chi_j2(y2) dy / (y1 y2).
    """
    j = tuple(j)
    m = _vertex(P, j, vertex)
    rep = classify(j, xi3, m, require_ordered=False)
    if require_flat and rep.klass is not ArcClass.MAJOR_FLAT:
        raise PreconditionError(f"Poisson check needs MajorFlat, got {rep.klass.value}")
    x3 = to_fraction(xi3)
    lhs = expsum.sharp_block(P, j, (0, 0, x3), quadrants="positive", workers=workers)
    q, a, beta = rep.q, rep.a, rep.beta
    parts = []
    qerr = 0.0
    for w1 in range(-w_window, w_window + 1):
        for w2 in range(-w_window, w_window + 1):
            S = gauss_full(P, a, q, (w1, w2)).value
            I = osc_2d(P, j, (Fraction(-w1, q), Fraction(-w2, q), -beta),
                       cutoff="sharp", sides="positive", tol=quad_tol)
            if I.flagged:
                raise RuntimeError("oscillatory integral exceeded its panel budget")
            qerr += abs(S) * I.quadrature_error
            parts.append(S * I.value)
    rhs = complex(math.fsum(z.real for z in parts), math.fsum(z.imag for z in parts))
    return _report(lhs.value, rhs, tol,
                   {"w_window": w_window, "quad_tol": quad_tol, "quadrature_error": qerr,
                    "tail_estimate": poisson_tail_estimate(w_window)},
                   {"j": list(j), "vertex": list(m), **_arc_info(rep)})


# -------------------------------------------------------------- minor arc

@dataclass
class MinorArcReport:
    j: tuple[int, int]
    arc_class: str
    q: int
    skipped: bool
    dyadic_abs: float = 0.0
    weyl_abs: float = 0.0
    weyl_ratio: float = 0.0          # |weyl sum| / 2^(j1 + j2)
    sup_partial: float = 0.0         # max |partial rectangle sums| over the block
    summation_bound: float = 0.0     # sup_partial / (min t1 * min t2)
    bound_holds: bool = True

    def to_json(self) -> dict:
        d = asdict(self)
        d["j"] = list(self.j)
        return d


def special_linear_form(P: Polynomial, vertex) -> bool:
    """P linear in t1 with a vertex (1, odd): the modified minor window applies."""
    return P.degrees[0] == 1 and vertex[0] == 1 and vertex[1] % 2 == 1


def minor_arc_bound_check(P: Polynomial, xi3, j: tuple[int, int], vertex=None,
                          workers: int | None = None) -> MinorArcReport:
    j = tuple(j)
    m = _vertex(P, j, vertex)
    rep = classify(j, xi3, m)
    if rep.klass is not ArcClass.MINOR:
        raise PreconditionError(f"minor-arc check needs the Minor class, got {rep.klass.value}")
    if special_linear_form(P, m):
        return MinorArcReport(j, rep.klass.value, rep.q, True)
    x3 = to_fraction(xi3)
    ax = [((1, 1) if k == 0 else ((1 << (k - 1)) + 1, 1 << k)) for k in j]
    T = expsum.box_terms(P, (ax[0], ax[1]), (0, 0, x3))   # shape (n2, n1)
    E = np.cumsum(np.cumsum(T, axis=0), axis=1)
    sup_e = float(np.abs(E).max())
    weyl = abs(complex(math.fsum(T.real.ravel()), math.fsum(T.imag.ravel())))
    blk = expsum.dyadic_piece(P, j, (0, 0, x3), quadrants="positive", workers=workers)
    bound = sup_e / (ax[0][0] * ax[1][0])
    d = abs(blk.value)
    return MinorArcReport(j, rep.klass.value, rep.q, False, d, weyl,
                          weyl / 2.0 ** (j[0] + j[1]), sup_e, bound,
                          bool(d <= bound * (1 + 1e-12) + blk.abs_error_bound))


def minor_arc_decay(P: Polynomial, xi3, j_ray, vertex=None) -> tuple[list[MinorArcReport], DecayFit]:
    """Weyl ratio along a ray of Minor-class j, fitted as C (2^j1)^-delta."""
    reps = [minor_arc_bound_check(P, xi3, j, vertex) for j in j_ray]
    pts = [(2.0 ** r.j[0], r.weyl_ratio) for r in reps if not r.skipped and r.weyl_ratio > 0]
    return reps, fit_decay(pts)


# ---------------------------------------------------------- arc partition

def arc_partition_sums(P: Polynomial, xi3, J1: int, J2: int, vertex=None, *,
                       quadrants: str = "all") -> tuple[dict, complex]:
    """Dyadic pieces over {j1 >= j2} grouped by arc class, and their total."""
    N = build(P)
    x3 = to_fraction(xi3)
    groups: dict = {k.value: [] for k in ArcClass}
    allv = []
    for j1 in range(J1 + 1):
        for j2 in range(min(j1, J2) + 1):
            m = tuple(vertex) if vertex is not None else N.vertices[dual_face_of(N, (j1, j2))]
            k = classify((j1, j2), x3, m).klass.value
            v = expsum.dyadic_piece(P, (j1, j2), (0, 0, x3), quadrants=quadrants).value
            groups[k].append(v)
            allv.append(v)

    def fs(zs):
        return complex(math.fsum(z.real for z in zs), math.fsum(z.imag for z in zs))

    return {k: fs(v) for k, v in groups.items()}, fs(allv)


# ------------------------------------------------------- theorem crosscheck

@dataclass
class Verdict:
    theorem_says: BoundednessVerdict
    empirics_say: str
    slope: float
    r_squared: float
    agree: bool
    contradiction: bool
    table: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "theorem_says": {"bounded": self.theorem_says.bounded,
                             "witness": list(self.theorem_says.witness)
                             if self.theorem_says.witness else None},
            "empirics_say": self.empirics_say,
            "slope": self.slope,
            "r_squared": self.r_squared,
            "agree": self.agree,
            "contradiction": self.contradiction,
            "table": [[n, v] for n, v in self.table],
        }


def default_xi_grid(N_max: int) -> list[Fraction]:
    """Geometric grid 2^(-k/2), reaching well below 1/N_max^2."""
    kmax = 4 * max(1, int(N_max).bit_length()) + 4
    out = []
    for k in range(1, kmax + 1):
        if k % 2 == 0:
            out.append(Fraction(1, 1 << (k // 2)))
        else:
            out.append(Fraction(round(2 ** (64 - k / 2)), 1 << 64))
    return out


def linear_fit(xs, ys) -> tuple[float, float, float]:
    """(slope, intercept, r^2) of ordinary least squares."""
    x = np.asarray(xs, float)
    y = np.asarray(ys, float)
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    slope = float(((x - xm) * (y - ym)).sum()) / sxx
    icpt = ym - slope * xm
    ss_tot = float(((y - ym) ** 2).sum())
    ss_res = float(((y - icpt - slope * x) ** 2).sum())
    r2 = 1.0 if ss_tot <= 1e-24 * (1.0 + float((y * y).sum())) else max(0.0, 1.0 - ss_res / ss_tot)
    return slope, float(icpt), r2


def classify_growth(slope: float, r2: float) -> str:
    if slope > DIVERGENT_SLOPE and r2 >= MIN_R2:
        return "divergent"
    if abs(slope) <= BOUNDED_SLOPE:
        return "bounded"
    return "inconclusive"


def theorem_crosscheck(P: Polynomial, xi3_grid=None, N_schedule=None, *,
                       workers: int | None = None) -> Verdict:
    if N_schedule is None:
        N_schedule = [1 << k for k in range(3, 9)]
    N_schedule = sorted(int(n) for n in N_schedule)
    if math.log2(N_schedule[-1] / N_schedule[0]) < 5:
        raise ValueError("the N schedule must span at least 5 doublings")
    grid = default_xi_grid(N_schedule[-1]) if xi3_grid is None else list(xi3_grid)
    theorem = decide_boundedness(build(P))
    table = expsum.partial_sup_scan(P, grid, N_schedule, workers=workers)
    slope, _, r2 = linear_fit([math.log2(n) for n, _ in table], [v for _, v in table])
    emp = classify_growth(slope, r2)
    agree = (emp == "divergent" and not theorem.bounded) or (emp == "bounded" and theorem.bounded)
    contradiction = emp != "inconclusive" and not agree
    return Verdict(theorem, emp, slope, r2, agree, contradiction, table)
