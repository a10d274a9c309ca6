"""Circle-method classification of dyadic indices j = (j1, j2).

Thresholds, for q = q(j, xi3) and beta the Dirichlet residual at N_j:

    Minor       q >= 2^(j1/10)
    MajorMinor  2^(j2/10) < q < 2^(j1/10)
    MajorSharp  q <= 2^(j2/10) and |beta| 2^(j.m) >= 2^(j2/10)
    MajorFlat   q <= 2^(j2/10) and |beta| 2^(j.m) <  2^(j2/10)

Every comparison is done on tenth powers of exact rationals.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from fractions import Fraction

from .rational import Real, q_of, to_fraction


class ArcClass(str, enum.Enum):
    MINOR = "Minor"
    MAJOR_MINOR = "MajorMinor"
    MAJOR_SHARP = "MajorSharp"
    MAJOR_FLAT = "MajorFlat"


@dataclass(frozen=True)
class ArcReport:
    j: tuple[int, int]
    klass: ArcClass
    q: int
    a: int
    beta: Fraction
    beta_scaled: Fraction   # |beta| 2^(j.m)


def classify(j: tuple[int, int], xi3: Real, vertex: tuple[int, int],
             require_ordered: bool = True) -> ArcReport:
    j1, j2 = j
    if require_ordered and not j1 >= j2 >= 0:
        raise ValueError("classify expects j1 >= j2 >= 0")
    r = q_of(j, xi3, vertex)
    q = r.q
    scaled = abs(r.beta) * (1 << (j1 * vertex[0] + j2 * vertex[1]))
    if q ** 10 >= 1 << j1:
        k = ArcClass.MINOR
    elif q ** 10 <= 1 << j2:
        k = ArcClass.MAJOR_SHARP if scaled ** 10 >= (1 << j2) else ArcClass.MAJOR_FLAT
    else:
        k = ArcClass.MAJOR_MINOR
    return ArcReport((j1, j2), k, q, r.a, r.beta, scaled)


def grid_reports(xi3: Real, vertex: tuple[int, int], J1: int, J2: int) -> list[ArcReport]:
    """Reports for {0..J1} x {0..J2} restricted to j1 >= j2, row-major."""
    x = to_fraction(xi3)
    return [classify((j1, j2), x, vertex)
            for j1 in range(J1 + 1) for j2 in range(min(j1, J2) + 1)]


def partition_grid(xi3: Real, vertex: tuple[int, int], J1: int, J2: int
                   ) -> dict[ArcClass, list[tuple[int, int]]]:
    out: dict[ArcClass, list[tuple[int, int]]] = {k: [] for k in ArcClass}
    for rep in grid_reports(xi3, vertex, J1, J2):
        out[rep.klass].append(rep.j)
    return out


CSV_HEADER = ["j1", "j2", "class", "q", "beta_scaled"]


def reports_to_csv(reports: list[ArcReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        w.writerow([r.j[0], r.j[1], r.klass.value, r.q, repr(float(r.beta_scaled))])
    return buf.getvalue()
