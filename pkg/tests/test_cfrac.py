from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from siegelrad.cfrac import (
    CFracPrefix,
    cfrac_digits_of,
    convergents,
    eval_prefix,
    gauss_orbit,
    noble_value,
    parse_prefix,
)
from siegelrad.errors import DomainError, EmptyPrefix, PrecisionExhausted, Terminated
from siegelrad.exactnum import QuadraticSurd, RealOracle, working_precision

GOLDEN = (math.sqrt(5) - 1) / 2
prefixes = st.lists(st.integers(1, 12), min_size=1, max_size=12)


def _fraction_of(terms):
    """Direct bottom-up evaluation, independent of the convergent recurrence."""
    x = Fraction(0)
    for r in reversed(terms):
        x = 1 / (r + x)
    return x


def test_prefix_validation_and_parsing():
    with pytest.raises(DomainError):
        CFracPrefix((0,))
    assert parse_prefix("[2,3]") == (CFracPrefix((2, 3)), False)
    p, noble = parse_prefix("[1,2;1*]")
    assert p == CFracPrefix((1, 2)) and noble
    assert p.to_string(noble=True) == "[1,2;1*]"
    assert CFracPrefix((1,)).is_prefix_of(p)
    assert p.extend([4]).terms == (1, 2, 4)
    assert CFracPrefix((3,)).padded(3).terms == (3, 1, 1)


def test_eval_small_prefixes():
    assert eval_prefix([2]).contains(Fraction(1, 2))
    assert eval_prefix([1, 1]).contains(Fraction(1, 2))
    with pytest.raises(EmptyPrefix):
        eval_prefix([])


def test_eval_golden_truncation():
    iv = eval_prefix([1] * 20, prec=40)
    assert float(iv.width) < 1e-7
    assert abs(float(iv.mid) - GOLDEN) < 1e-7


@given(prefixes)
def test_eval_matches_direct_evaluation(terms):
    iv = eval_prefix(terms, prec=80)
    assert iv.contains(_fraction_of(terms))


def test_convergent_denominators():
    assert [q for _, q in convergents([1] * 5)] == [1, 2, 3, 5, 8]
    assert [q for _, q in convergents([2] * 4)] == [2, 5, 12, 29]


@given(prefixes)
def test_convergents_are_reduced_truncations(terms):
    conv = convergents(terms)
    for n, (p, q) in enumerate(conv, start=1):
        assert math.gcd(p, q) == 1
        assert Fraction(p, q) == _fraction_of(terms[:n])
    qs = [q for _, q in conv]
    assert all(a < b for a, b in zip(qs[1:], qs[2:]))


@given(prefixes)
def test_convergent_gap_bound(terms):
    # the noble continuation is irrational, so the classical bound is strict
    conv = convergents(list(terms) + [1])
    with working_precision(300):
        x = noble_value(terms).value.to_interval()
        gaps = [abs(x - Fraction(p, q)) for p, q in conv]
    for gap, (_, q), (_, q_next) in zip(gaps, conv, conv[1:]):
        assert gap.hi.to_fraction() < Fraction(1, q * q_next)


def test_gauss_orbits():
    g = QuadraticSurd.golden()
    assert gauss_orbit(g, 5) == [g] * 5
    s = QuadraticSurd(-1, 1, 1, 2)
    assert gauss_orbit(s, 3) == [s] * 3
    x = noble_value([2]).value
    assert gauss_orbit(x, 2)[1] == g


def test_gauss_orbit_from_oracle_encloses_exact():
    x = noble_value([3]).value
    exact = gauss_orbit(x, 3)
    approx = gauss_orbit(RealOracle.from_surd(x), 3)
    for iv, s in zip(approx, exact):
        assert iv.overlaps(s.to_interval(80))


def test_digits_of_oracles():
    assert cfrac_digits_of(RealOracle.from_surd(QuadraticSurd.golden()), 5).terms == (1,) * 5
    with pytest.raises(Terminated):
        cfrac_digits_of(RealOracle.from_rational(Fraction(1, 2)), 3)
    coarse = RealOracle.from_surd(QuadraticSurd.golden(), budget=8)
    with pytest.raises(PrecisionExhausted):
        cfrac_digits_of(coarse, 20)


def test_noble_values():
    g = QuadraticSurd.golden()
    assert noble_value([]).value == g
    assert noble_value([1]).value == g
    v = noble_value([2]).value
    assert v == g * g
    assert float(v) == pytest.approx(0.3819660112501051)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(1, 9), max_size=8))
def test_noble_round_trip(terms):
    nob = noble_value(terms)
    assert 0 < float(nob.value) < 1
    digits = cfrac_digits_of(RealOracle.from_surd(nob.value), len(terms) + 5)
    assert digits.terms == tuple(terms) + (1,) * 5
