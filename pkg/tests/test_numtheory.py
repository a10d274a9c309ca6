from __future__ import annotations

import cmath
import math
import os
import random

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIXTURES
from ddhilbert.numtheory import (count_congruence_roots, fit_decay, gauss_fiber, gauss_fiber_average,
                                 gauss_full, roots_of_unity, vanishing_leading_fibers)
from ddhilbert.polynomial import Polynomial, parse
from oracles import exact_eval


def naive_fiber(d, t2, a, q):
    return sum(cmath.exp(2j * math.pi * ((a * exact_eval(d, t1, t2)) % q) / q)
               for t1 in range(1, q + 1)) / q


def naive_full(d, a, q, w):
    s = 0j
    for l1 in range(1, q + 1):
        for l2 in range(1, q + 1):
            r = (a * exact_eval(d, l1, l2) - w[0] * l1 - w[1] * l2) % q
            s += cmath.exp(-2j * math.pi * r / q)
    return s / q ** 2


def test_fiber_examples():
    assert abs(gauss_fiber(parse("t1^2"), 5, 1, 2).value) < 1e-15
    v = gauss_fiber(parse("t1^2*t2"), 1, 1, 4)
    assert abs(v.value - (1 + 1j) / 2) < 1e-15
    assert v.magnitude == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    P = parse("t1^3*t2 + 2*t1*t2^2")
    assert gauss_fiber(P, 7, 3, 11).value == gauss_fiber(P, 7, 3 + 11 * 5, 11).value


def test_full_examples():
    assert gauss_full(parse("t1^2+t2"), 0, 1, (0, 0)).value == 1
    P = parse("t1*t2")
    assert abs(gauss_full(P, 1, 2, (0, 0)).value - 0.5) < 1e-15
    P = parse("t1^2*t2 + t2^3")
    assert gauss_full(P, 2, 9, (1, 4)).value == gauss_full(P, 2, 9, (10, -5)).value


def test_average_examples():
    P = parse("t1^2*t2")
    assert gauss_fiber_average(P, 7, 1, 1) == 1.0
    avg = gauss_fiber_average(P, 6, 1, 4)
    ref = math.fsum(abs(naive_fiber(P.as_dict(), t2, 1, 4)) for t2 in range(33, 65)) / 32
    assert avg < 1 and abs(avg - ref) < 1e-14


def test_vanishing_fibers():
    # leading coefficient in t1 is t2: vanishes mod q when q | t2
    assert vanishing_leading_fibers(parse("t1^2*t2"), 4, 4) == 2   # t2 in {12, 16}


def test_roots_table():
    for q in (1, 2, 3, 4, 8, 12, 97):
        tab = roots_of_unity(q)
        with mpmath.workdps(40):
            ref = [complex(mpmath.exp(2j * mpmath.pi * k / q)) for k in range(q)]
        assert np.max(np.abs(tab - np.array(ref))) <= 2 ** -53
    assert roots_of_unity(4)[1] == 1j and roots_of_unity(2)[1] == -1


def test_congruence_examples():
    assert count_congruence_roots([0, 1], 5, 2) == 1
    assert count_congruence_roots([0, 0, 1], 3, 2) == 3
    assert count_congruence_roots([-1, 0, 1], 2, 3) == 4
    with pytest.raises(ValueError):
        count_congruence_roots([0, 1], 7, 8)


def test_fit_examples():
    f = fit_decay([(q, q ** -0.5) for q in (2, 3, 5, 7, 11, 13)])
    assert abs(f.exponent - 0.5) < 1e-12 and f.r_squared == pytest.approx(1.0, abs=1e-12)
    assert abs(f.constant - 1) < 1e-12
    f = fit_decay([(q, 0.3) for q in (2, 3, 5, 7)])
    assert f.exponent == 0 and 0 <= f.r_squared <= 1
    with pytest.raises(ValueError):
        fit_decay([(3, 1.0), (3, 0.5), (3, 0.2)])


def test_gauss_table_fixture():
    from ddhilbert.cli import gauss_csv, gauss_table
    P = parse("t1^2*t2")
    rows = gauss_table(P, 10, 199)
    with open(os.path.join(FIXTURES, "gauss_t1sq_t2_j10.csv")) as fh:
        assert gauss_csv(rows) == fh.read()
    # spot values against the naive oracle
    d = P.as_dict()
    for q, a, avg, _ in rows[:6]:
        ref = math.fsum(abs(naive_fiber(d, t2, a, q)) for t2 in range(513, 1025)) / 512
        assert abs(avg - ref) < 1e-12
    assert fit_decay([(q, v) for q, _, v, _ in rows]).exponent > 0


poly_st = st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 4)),
                          st.integers(-9, 9).filter(bool), min_size=1, max_size=4)


@settings(max_examples=60, deadline=None)
@given(poly_st, st.integers(1, 40), st.integers(-60, 60), st.integers(-50, 50))
def test_fiber_against_oracle(d, q, a, t2):
    if math.gcd(a, q) != 1:
        return
    P = Polynomial.from_dict(d)
    v = gauss_fiber(P, t2, a, q).value
    assert abs(v - naive_fiber(d, t2, a, q)) < 1e-12
    assert abs(v) <= 1 + 1e-12
    assert abs(gauss_fiber(P, t2, -a, q).value - v.conjugate()) < 1e-13


@settings(max_examples=40, deadline=None)
@given(poly_st, st.integers(1, 17), st.integers(-40, 40), st.integers(-20, 20), st.integers(-20, 20))
def test_full_against_oracle(d, q, a, w1, w2):
    if math.gcd(a, q) != 1:
        return
    P = Polynomial.from_dict(d)
    v = gauss_full(P, a, q, (w1, w2)).value
    assert abs(v - naive_full(d, a, q, (w1, w2))) < 1e-12
    assert abs(v) <= 1 + 1e-12
    assert v == gauss_full(P, a + q, q, (w1 + q, w2 - q)).value


def test_lagrange_bound_exhaustive():
    rng = random.Random(3)
    for p in (2, 3, 5, 7, 11, 13):
        for _ in range(50):
            n = rng.randint(1, 4)
            g = [rng.randrange(p) for _ in range(n)] + [rng.randrange(1, p)]
            assert count_congruence_roots(g, p, 1) <= n
