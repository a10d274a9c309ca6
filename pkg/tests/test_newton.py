from __future__ import annotations

import itertools
import json

import numpy as np
from hypothesis import given, settings, strategies as st

from ddhilbert.newton import (build, decide_boundedness, dominance_bracket, dominant_vertex_check,
                              dominant_vertex_ratio, dual_face_of, hull_vertices, min_scale)
from ddhilbert.polynomial import Polynomial, monomial, parse
from oracles import brute_vertices

support_st = st.lists(st.tuples(st.integers(0, 8), st.integers(0, 8)), min_size=1, max_size=8,
                      unique=True)


def test_build_examples():
    assert build(parse("t1^2+t1*t2+t2^2")).vertices == ((0, 2), (2, 0))
    assert set(build(parse("t1^3*t2^2+t1*t2^5")).vertices) == {(3, 2), (1, 5)}
    N = build(parse("-7*t1^4*t2^3"))
    assert N.vertices == ((4, 3),)
    assert {f.normal for f in N.facets} == {(-1, 0), (0, -1)}


def test_facets_staircase():
    N = build(parse("t1^3*t2^2+t1*t2^5"))
    assert N.vertices == ((1, 5), (3, 2))
    assert [(f.normal, f.offset) for f in N.facets] == [((0, -1), -5), ((-3, -2), -13),
                                                         ((-1, 0), -3)]
    rep = json.loads(json.dumps(N.to_json()))
    assert rep["vertices"] == [[1, 5], [3, 2]]


def test_decide_examples():
    v = decide_boundedness(build(parse("t1*t2")))
    assert not v.bounded and v.witness == (1, 1)
    assert decide_boundedness(build(parse("t1^2+t2^2"))).bounded
    v = decide_boundedness(build(parse("t1^3*t2^2+t1*t2^5")))
    assert not v.bounded and v.witness == (1, 5)


def test_dual_face_examples():
    N = build(parse("t1^2+t2^2"))
    assert N.vertices[dual_face_of(N, (10, 1))] == (2, 0)
    assert N.vertices[dual_face_of(N, (1, 10))] == (0, 2)
    assert dual_face_of(N, (5, 5)) == 0
    N1 = build(parse("3*t1^2*t2^5"))
    assert all(dual_face_of(N1, (a, b)) == 0 for a in range(20) for b in range(20))


def test_dual_face_partition_grid():
    N = build(parse("t1^6 + t1^4*t2 + t1*t2^3 + t2^7 + t1^2*t2^2"))
    js = np.arange(512)
    J1, J2 = np.meshgrid(js, js, indexing="ij")
    # vectorized reference: argmax of j.m with first-index tie break
    scores = np.stack([J1 * m1 + J2 * m2 for m1, m2 in N.vertices])
    ref = scores.argmax(axis=0)
    for a in range(0, 512, 7):
        for b in range(0, 512, 5):
            k = dual_face_of(N, (a, b))
            assert k == ref[a, b]
            m = N.vertices[k]
            # j lies in the cone spanned by the two facet normals around m
            assert all(a * m[0] + b * m[1] >= a * v[0] + b * v[1] for v in N.vertices)


def test_dominant_vertex_examples():
    N = build(parse("5*t1^3*t2"))
    r = dominant_vertex_ratio(parse("5*t1^3*t2"), N, (7, 2))
    assert 5 <= r <= 5 * 2 ** 4
    P = parse("t1^2+t2^2")
    N = build(P)
    # the listed values are evaluations at x = (1, 1)
    assert dominant_vertex_ratio(P, N, (10, 1), samples=1) <= 1 + 2 ** (2 - 20) * 4
    assert dominant_vertex_ratio(P, N, (0, 0), samples=1) <= 2
    assert dominant_vertex_check(P, N, (10, 1))
    assert dominance_bracket(P) == 8.0


@settings(max_examples=200, deadline=None)
@given(support_st)
def test_hull_matches_bruteforce(pts):
    assert sorted(hull_vertices(pts)) == brute_vertices(pts)


@settings(max_examples=150, deadline=None)
@given(support_st, st.lists(st.integers(-9, 9).filter(bool), min_size=8, max_size=8))
def test_hull_soundness_and_extremality(pts, cs):
    P = Polynomial.from_dict(dict(zip(pts, cs)))
    N = build(P)
    for m in P.support:
        assert all(f.contains(m) for f in N.facets)
    for f in N.facets:
        assert f.normal[0] <= 0 and f.normal[1] <= 0
        assert np.gcd(*f.normal) == 1
    vs = N.vertices
    assert all(a[0] < b[0] and a[1] > b[1] for a, b in zip(vs, vs[1:]))
    if len(pts) <= 8:
        for v in vs:
            rest = [p for p in pts if p != v]
            if rest:
                assert v not in hull_vertices(rest)
                assert set(brute_vertices(rest)) != set(vs)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 30), st.integers(0, 30))
def test_monomial_parity(m, n):
    v = decide_boundedness(build(monomial(1, m, n)))
    assert v.bounded == (m % 2 == 0 or n % 2 == 0)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=1, max_size=6, unique=True)
       .filter(lambda pts: all(a + b <= 6 for a, b in pts)),
       st.lists(st.integers(-5, 5).filter(bool), min_size=6, max_size=6),
       st.integers(0, 12), st.integers(0, 12))
def test_domination(pts, cs, d1, d2):
    P = Polynomial.from_dict(dict(zip(pts, cs)))
    N = build(P)
    k = min_scale(P) + 2
    j = (k + d1, k + d2)
    assert dominant_vertex_check(P, N, j, samples=8)


def test_bruteforce_oracle_sanity():
    # the oracle itself on known cases
    assert brute_vertices([(0, 2), (1, 1), (2, 0)]) == [(0, 2), (2, 0)]
    assert brute_vertices([(0, 2), (1, 2), (2, 0)]) == [(1, 2), (2, 0)]
    assert brute_vertices([(3, 2), (1, 5), (1, 1)]) == [(1, 5), (3, 2)]
    pts = list(itertools.product(range(3), range(3)))
    assert brute_vertices(pts) == [(2, 2)]
