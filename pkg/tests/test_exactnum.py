from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from siegelrad.errors import ConsistencyViolation, DomainError, Terminated
from siegelrad.exactnum import (
    CheckedOracle,
    Dyadic,
    DyadicInterval,
    QuadraticSurd,
    RealOracle,
    icos,
    iexp,
    ilog,
    ipi,
    isin,
    oracle_query,
    surd_gauss_step,
    working_precision,
)



def _mpf(d: Dyadic):
    return mpmath.ldexp(d.numerator, -d.exponent)


fractions = st.fractions(min_value=-1000, max_value=1000, max_denominator=10**6)


def test_dyadic_parse_round_trip():
    d = Dyadic.parse("3/2^3")
    assert d.to_fraction() == Fraction(3, 8)
    assert Dyadic.parse(d.to_string()) == d
    assert Dyadic.parse("0.375") == d
    assert d.to_decimal() == "0.375"
    with pytest.raises(DomainError):
        Dyadic.parse("not a number")


def test_dyadic_rejects_non_dyadic_fraction():
    with pytest.raises(DomainError):
        Dyadic.from_fraction(Fraction(1, 3))


@given(fractions, st.integers(min_value=0, max_value=80))
def test_dyadic_approx_brackets(q, bits):
    lo = Dyadic.approx(q, bits, "floor").to_fraction()
    hi = Dyadic.approx(q, bits, "ceil").to_fraction()
    assert lo <= q <= hi
    assert hi - lo <= Fraction(1, 2**bits)


@given(fractions, fractions)
def test_interval_ops_enclose_exact_results(a, b):
    ia = DyadicInterval.from_fraction(a, 70)
    ib = DyadicInterval.from_fraction(b, 70)
    for got, exact in ((ia + ib, a + b), (ia - ib, a - b), (ia * ib, a * b)):
        assert got.lo.to_fraction() <= exact <= got.hi.to_fraction()
    if b != 0:
        got = ia.div(ib)
        assert got.lo.to_fraction() <= a / b <= got.hi.to_fraction()


def test_interval_sum_of_exact_endpoints():
    s = DyadicInterval(1, 2) + DyadicInterval(3, 4)
    assert s.lo == Dyadic(4) and s.hi == Dyadic(6)


def test_division_by_interval_containing_zero():
    with pytest.raises(DomainError):
        DyadicInterval(1, 2).div(DyadicInterval(-1, 1))


def test_log_of_one_is_tight():
    with working_precision(64):
        iv = ilog(1)
    assert iv.contains(0)
    assert iv.width.to_fraction() <= Fraction(2, 2**64)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=0.01, max_value=20))
def test_transcendentals_enclose_mpmath(x):
    xd = Dyadic.approx(x, 60, "nearest")
    with mpmath.workprec(300), working_precision(96):
        xf = _mpf(xd)
        for fn, ref in ((iexp, mpmath.exp), (ilog, mpmath.log), (isin, mpmath.sin), (icos, mpmath.cos)):
            iv = fn(xd)
            v = ref(xf)
            assert _mpf(iv.lo) <= v <= _mpf(iv.hi)


def test_pi_enclosure():
    iv = ipi(200)
    with mpmath.workprec(400):
        assert _mpf(iv.lo) <= mpmath.pi <= _mpf(iv.hi)
    assert iv.width.to_fraction() < Fraction(1, 2**190)


def test_oracle_answers_meet_contract():
    o = RealOracle.from_rational(Fraction(1, 3))
    for n in range(1, 30):
        assert abs(oracle_query(o, n).to_fraction() - Fraction(1, 3)) <= Fraction(1, 2**n)
    zero = RealOracle.from_rational(0)
    assert abs(oracle_query(zero, 10).to_fraction()) < Fraction(1, 2**10)


def test_checked_oracle_catches_inconsistent_answers():
    bad = RealOracle.from_callable(lambda n: Dyadic(0) if n == 4 else Dyadic(3, 4))
    checked = CheckedOracle(bad).as_oracle()
    checked(4)
    with pytest.raises(ConsistencyViolation):
        checked(5)


def test_surd_gauss_steps():
    g = QuadraticSurd.golden()
    assert surd_gauss_step(g) == (1, g)
    s = QuadraticSurd(-1, 1, 1, 2)
    assert surd_gauss_step(s) == (2, s)
    k, rest = surd_gauss_step(QuadraticSurd.rational(Fraction(1, 2)))
    assert k == 2 and rest == QuadraticSurd.rational(0)
    with pytest.raises(Terminated):
        surd_gauss_step(rest)


@given(st.integers(1, 50), st.integers(1, 50), st.integers(1, 30), st.sampled_from([2, 3, 5, 7, 13]))
def test_surd_arithmetic_matches_floats(a, b, c, d):
    s = QuadraticSurd(a, b, c, d)
    assert s * s.reciprocal() == QuadraticSurd.rational(1)
    assert float(s) == pytest.approx((a + b * d**0.5) / c, rel=1e-12)
    iv = s.to_interval(128)
    assert iv.width.to_fraction() < Fraction(1, 2**120)
    assert s.floor() == int((a + b * d**0.5) // c)
