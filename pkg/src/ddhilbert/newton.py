"""Newton polyhedron of P for the global domain, B = {-e1, -e2}.

The polyhedron is Ch(Lambda(P) - R_+^2). Its boundary is a monotone
staircase, so the hull reduces to a Pareto filter plus a concave chain.
All arithmetic is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .polynomial import Exponent, Polynomial, coefficient_ratio_constant, eval_scaled


@dataclass(frozen=True)
class Facet:
    # half-space {x : normal . x >= offset}; normal primitive with entries <= 0
    normal: tuple[int, int]
    offset: int

    def contains(self, x: Exponent) -> bool:
        return self.normal[0] * x[0] + self.normal[1] * x[1] >= self.offset


@dataclass(frozen=True)
class NewtonPolyhedron:
    vertices: tuple[Exponent, ...]   # m1 ascending, m2 strictly descending
    facets: tuple[Facet, ...]        # (0,-1), edge normals, (-1,0)
    # vertex i is the meet of facets i and i+1; its dual cone is spanned by
    # -normal_i and -normal_{i+1}
    dual_vertex_cones: tuple[tuple[tuple[int, int], tuple[int, int]], ...]

    def to_json(self) -> dict:
        return {
            "vertices": [list(v) for v in self.vertices],
            "facets": [{"normal": list(f.normal), "offset": f.offset} for f in self.facets],
        }


@dataclass(frozen=True)
class BoundednessVerdict:
    bounded: bool
    witness: Exponent | None


def _cross(o: Exponent, a: Exponent, b: Exponent) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def hull_vertices(points) -> list[Exponent]:
    """Vertices of Ch(points - R_+^2), sorted by first coordinate."""
    pts = sorted(set(points), key=lambda p: (p[0], -p[1]))
    # Pareto-maximal: scanning x descending, keep points with y above all seen
    pareto = []
    best_y = None
    for p in sorted(pts, key=lambda p: (-p[0], -p[1])):
        if best_y is None or p[1] > best_y:
            pareto.append(p)
            best_y = p[1]
    pareto.reverse()
    chain: list[Exponent] = []
    for p in pareto:
        while len(chain) >= 2 and _cross(chain[-2], chain[-1], p) >= 0:
            chain.pop()
        chain.append(p)
    return chain


def build(P: Polynomial) -> NewtonPolyhedron:
    if P.is_zero():
        raise ValueError("Newton polyhedron of the zero polynomial")
    verts = hull_vertices(P.support)
    facets = [Facet((0, -1), -verts[0][1])]
    for a, b in zip(verts, verts[1:]):
        dx, dy = b[0] - a[0], b[1] - a[1]   # dx > 0, dy < 0
        g = math.gcd(dx, dy)
        n = (dy // g, -dx // g)
        facets.append(Facet(n, n[0] * a[0] + n[1] * a[1]))
    facets.append(Facet((-1, 0), -verts[-1][0]))
    cones = tuple(((-facets[i].normal[0], -facets[i].normal[1]),
                   (-facets[i + 1].normal[0], -facets[i + 1].normal[1]))
                  for i in range(len(verts)))
    return NewtonPolyhedron(tuple(verts), tuple(facets), cones)


def decide_boundedness(N: NewtonPolyhedron) -> BoundednessVerdict:
    for v in N.vertices:
        if v[0] % 2 == 1 and v[1] % 2 == 1:
            return BoundednessVerdict(False, v)
    return BoundednessVerdict(True, None)


def dual_face_of(N: NewtonPolyhedron, j: tuple[int, int]) -> int:
    """Index of the vertex whose (disjointified) dual cone holds j.

    j lies in the dual cone of m exactly when m maximizes j.m over the
    polyhedron; ties on shared rays go to the lower vertex index.
    """
    if j[0] < 0 or j[1] < 0:
        raise ValueError("j must be non-negative")
    best, arg = None, 0
    for i, (m1, m2) in enumerate(N.vertices):
        s = j[0] * m1 + j[1] * m2
        if best is None or s > best:
            best, arg = s, i
    return arg


def dominance_bracket(P: Polynomial) -> float:
    """The constant C of the bracket [1/C, C] used by dominant_vertex_check."""
    return float(sum(abs(c) * 2.0 ** (m1 + m2) for (m1, m2), c in P._pairs))


def dominant_vertex_ratio(P: Polynomial, N: NewtonPolyhedron, j: tuple[int, int],
                          samples: int = 32) -> float:
    m = N.vertices[dual_face_of(N, j)]
    x = np.linspace(1.0, 2.0, samples)
    x1, x2 = np.meshgrid(x, x, indexing="ij")
    return float(np.max(np.abs(eval_scaled(P, j, m, x1, x2))))


def dominant_vertex_check(P: Polynomial, N: NewtonPolyhedron, j: tuple[int, int],
                          samples: int = 32) -> bool:
    C = dominance_bracket(P)
    r = dominant_vertex_ratio(P, N, j, samples)
    return 1.0 / C <= r <= C


def min_scale(P: Polynomial) -> int:
    """Smallest dyadic scale k with 2^k >= C(P)."""
    return (coefficient_ratio_constant(P) - 1).bit_length()
