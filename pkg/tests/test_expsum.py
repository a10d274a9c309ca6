from __future__ import annotations

import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ddhilbert import expsum
from ddhilbert.expsum import (BudgetError, PhaseContext, as_context, box_terms, describe,
                              differencing_identity_check, dyadic_piece, hilbert_sum,
                              partial_sup_scan, sharp_block, weyl_sum)
from ddhilbert.polynomial import Polynomial, parse
from oracles import naive_hilbert, naive_weyl

poly_st = st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 4)),
                          st.integers(-20, 20).filter(bool), min_size=1, max_size=4)
xi_st = st.fractions(min_value=-2, max_value=2, max_denominator=10 ** 9)


def rand_xi(rng):
    return tuple(Fraction(rng.randrange(-10 ** 9, 10 ** 9), rng.randrange(1, 10 ** 9))
                 for _ in range(3))


def test_zero_frequency_is_exact_zero():
    for text in ("t1*t2", "t1^3*t2^2+t1*t2^5", "t1^2+t2^2+7"):
        r = hilbert_sum(parse(text), 50, 37, (0, 0, 0))
        assert r.value == 0
    assert dyadic_piece(parse("t1*t2"), (3, 4), (0, 0, 0)).value == 0


def test_even_polynomial_folds_to_zero():
    r = hilbert_sum(parse("t1^2*t2^2"), 300, 300, (0, 0, Fraction(1, 7)))
    assert r.value == 0 and r.method == "folded"


def test_phase_context_exact_decimal():
    ctx = as_context(("0", "0", "0.123"))
    assert ctx.represented[2] == Fraction(123, 1000) and all(ctx.exact)
    assert describe(ctx)[2] == "123/1000 (exact)"
    ctx = as_context((0, 0, Fraction(1, 3 * 2 ** 70)))
    assert ctx.represented[2] == Fraction(1, 3 * 2 ** 70)
    big = Fraction(1, (1 << 61) - 1) + Fraction(1, (1 << 31) - 1)
    ctx = as_context((0, 0, big))
    assert not ctx.exact[2] and abs(ctx.represented[2] - big) <= Fraction(1, 1 << 128)
    assert as_context(ctx.negated()).represented[2] == (-ctx.represented[2]) % 1


def test_oracle_small_fixed():
    P = parse("t1^3*t2^2 + t1*t2^5 - 4*t1*t2")
    xi = (Fraction(1, 5), Fraction(-2, 9), Fraction(12345, 65536) + Fraction(1, 3))
    for method in ("stream", "auto"):
        r = hilbert_sum(P, 13, 11, xi, method=method)
        ref = naive_hilbert(P.as_dict(), xi, 13, 11)
        assert abs(r.value - ref) < 1e-12 and r.terms == 4 * 13 * 11


def test_oracle_positive_quadrant():
    P = parse("t1^2*t2 + t2^3")
    xi = (0, Fraction(1, 11), Fraction(3, 1024))
    r = hilbert_sum(P, 20, 9, xi, quadrants="positive")
    assert abs(r.value - naive_hilbert(P.as_dict(), xi, 20, 9, "positive")) < 1e-12


@settings(max_examples=40, deadline=None)
@given(poly_st, xi_st, xi_st, xi_st, st.integers(1, 24), st.integers(1, 24))
def test_oracle_property(d, x1, x2, x3, N1, N2):
    P = Polynomial.from_dict(d)
    r = hilbert_sum(P, N1, N2, (x1, x2, x3))
    assert abs(r.value - naive_hilbert(d, (x1, x2, x3), N1, N2)) < 1e-12
    assert r.abs_error_bound >= 0


@settings(max_examples=40, deadline=None)
@given(poly_st, xi_st, xi_st, xi_st, st.integers(1, 60), st.integers(1, 60))
def test_conjugation(d, x1, x2, x3, N1, N2):
    P = Polynomial.from_dict(d)
    a = hilbert_sum(P, N1, N2, (x1, x2, x3)).value
    b = hilbert_sum(P, N1, N2, (-x1, -x2, -x3)).value
    assert abs(a - b.conjugate()) < 1e-12


def test_vanishing_phase_term_folds():
    # 3 t1 t2^2 / 3 is an integer, leaving t1^2 t2 / 3, which is even in t1
    r = hilbert_sum(parse("t1^2*t2 + 3*t1*t2^2"), 50, 50, (0, 0, Fraction(1, 3)))
    assert r.value == 0 and r.method == "folded"


def test_stream_and_residue_agree():
    P = parse("t1^2*t2 + 2*t1*t2^2")
    for x3 in (Fraction(1, 3), Fraction(5, 12), Fraction(7, 1000)):
        a = hilbert_sum(P, 200, 150, (0, 0, x3), method="stream")
        b = hilbert_sum(P, 200, 150, (0, 0, x3), method="residue")
        assert b.method == "residue"
        assert abs(a.value - b.value) < 1e-11


def test_phase_exactness_rational():
    # xi3 = a/q and q | P(t) for all t: the phase part contributes nothing
    P = parse("6*t1^2*t2 + 12*t2^3")
    r = hilbert_sum(P, 40, 40, (0, Fraction(1, 8), Fraction(5, 6)), quadrants="positive",
                    method="stream")
    ref = hilbert_sum(parse("t1"), 40, 40, (0, Fraction(1, 8), 0), quadrants="positive",
                      method="stream")
    assert r.value == ref.value


def test_dyadic_additivity():
    rng = random.Random(11)
    P = parse("t1^2*t2 - t1*t2^3")
    for _ in range(3):
        xi = rand_xi(rng)
        J = 6
        parts = [dyadic_piece(P, (a, b), xi).value for a in range(J + 1) for b in range(J + 1)]
        total = complex(math.fsum(z.real for z in parts), math.fsum(z.imag for z in parts))
        assert abs(total - hilbert_sum(P, 1 << J, 1 << J, xi).value) < 1e-10


def test_dyadic_block_vs_oracle():
    rng = random.Random(5)
    P = parse("t1^3 + t1*t2^2")
    xi = rand_xi(rng)
    r = dyadic_piece(P, (5, 5), xi)
    ref = naive_hilbert(P.as_dict(), xi, 0, 0, box=((17, 32), (17, 32)))
    assert abs(r.value - ref) < 1e-12


def test_sharp_block_vs_oracle():
    P = parse("t1^2*t2")
    xi = (0, 0, Fraction(1, 3) + Fraction(1, 10 ** 6))
    r = sharp_block(P, (4, 3), xi)
    ref = naive_hilbert(P.as_dict(), xi, 0, 0, "positive", box=((8, 16), (4, 8)), half=True)
    assert abs(r.value - ref) < 1e-12


def test_weyl_examples():
    r = weyl_sum(parse("t1"), ((1, 4), (1, 1)), Fraction(1, 2))
    assert abs(r.value) < 1e-15
    r = weyl_sum(parse("t1^3*t2"), ((5, 5), (9, 9)), Fraction(1, 7))
    assert abs(abs(r.value) - 1) < 1e-15
    P = parse("t1^2*t2 + t2^2")
    x = Fraction(int(0.61803398875 * 2 ** 40), 2 ** 40)
    r = weyl_sum(P, ((3, 40), (2, 30)), x)
    assert abs(r.value - naive_weyl(P.as_dict(), x, ((3, 40), (2, 30)))) < 1e-12
    assert abs(r.value) <= 38 * 29


def test_box_terms_matches_weyl():
    P = parse("t1^2*t2 + 5*t1")
    x = Fraction(3, 7) + Fraction(1, 3000)
    T = box_terms(P, ((4, 20), (3, 9)), (0, 0, x), sign=-1)
    assert T.shape == (7, 17)
    w = weyl_sum(P, ((4, 20), (3, 9)), x).value
    assert abs(T.sum() - w) < 1e-12
    with pytest.raises(BudgetError):
        box_terms(P, ((1, 1 << 14), (1, 1 << 13)), (0, 0, x))


def test_differencing_examples():
    assert differencing_identity_check(parse("t1*t2^2"), Fraction(1, 3), 4, (5, 5)) <= 2 ** -52
    rng = random.Random(9)
    for _ in range(10):
        P = Polynomial.from_dict({(rng.randrange(3), 2): rng.randrange(1, 9),
                                  (1, 1): rng.randrange(-9, 9) or 1})
        x = Fraction(rng.randrange(1, 10 ** 9), 10 ** 9)
        assert differencing_identity_check(P, x, rng.randrange(1, 50), (3, 10)) < 1e-12
    D = parse("t1*t2^3 + t2^2").shift_difference(2)
    assert D.degrees[1] == 2


def test_worker_determinism():
    P = parse("t1^3*t2 + t1*t2^2")
    xi = (Fraction(1, 7), 0, Fraction(int(math.pi * 2 ** 50), 2 ** 52))
    vals = {hilbert_sum(P, 700, 650, xi, method="stream", workers=w).value for w in (1, 2, 3, 8)}
    assert len(vals) == 1


def test_budget_guard():
    with pytest.raises(BudgetError):
        hilbert_sum(parse("t1*t2"), 1 << 18, 1 << 18, (0, 0, Fraction(1, 10 ** 9 + 7)),
                    method="stream")


def test_sup_scan():
    assert partial_sup_scan(parse("t1*t2"), [0], [4, 8, 16]) == [(4, 0.0), (8, 0.0), (16, 0.0)]
    grid = [Fraction(1, 8), Fraction(1, 64)]
    table = partial_sup_scan(parse("t1*t2"), grid, [8, 16, 32])
    vals = [v for _, v in table]
    assert vals == sorted(vals)
    ref = max(abs(naive_hilbert({(1, 1): 1}, (0, 0, x), 8, 8)) for x in grid)
    assert abs(table[0][1] - ref) < 1e-12


def test_default_workers_env(monkeypatch):
    monkeypatch.setenv(expsum.WORKERS_ENV, "3")
    assert expsum.default_workers() == 3
