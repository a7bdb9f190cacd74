from __future__ import annotations

import json
import warnings
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from siegelrad.brjuno import phi_extensions_exceed, phi_noble
from siegelrad.cfrac import CFracPrefix, noble_value
from siegelrad.errors import (
    BudgetExceeded,
    DomainError,
    InfeasibleDrop,
    PredicateViolation,
    SequenceViolation,
)
from siegelrad.synthesis import (
    HaltingPredicate,
    RegisterMachine,
    RightComputableSeq,
    SynthesisConfig,
    SynthesisState,
    cylinder_interval,
    halting_sequence,
    smlchgr_step,
    synthesize,
    verify_properties,
)
from siegelrad.synthesis import _diagonal, guard_length

RHO = "73/256"


def _closed_form(facts, k):
    """(1/16)(1 - sum 4^-x over facts (x, t) with x, t <= k)."""
    return Fraction(1, 16) * (1 - sum(Fraction(1, 4**x) for x, t in facts if x <= k and t <= k))


@pytest.fixture(scope="module")
def stage_one():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        seq = RightComputableSeq.parse(f"const:{RHO}")
        return synthesize(seq, 1, SynthesisConfig(seed=0))


# -- sequences and the halting encoding -------------------------------------


def test_sequence_monotonicity():
    seq = RightComputableSeq.from_values(["1/2^4", "1/2^5", "1/2^3"])
    assert seq[1] == Fraction(1, 32)
    with pytest.raises(SequenceViolation):
        seq[2]


def test_sequence_range_warns_only():
    seq = RightComputableSeq.constant(Fraction(1, 2))
    with pytest.warns(UserWarning):
        assert seq[0] == Fraction(1, 2)


def test_sequence_file(tmp_path):
    path = tmp_path / "seq.txt"
    path.write_text("# r_k\n1/2^4\n3/2^6\n")
    seq = RightComputableSeq.parse(f"file:{path}")
    assert seq.prefix(4) == [Fraction(1, 16), Fraction(3, 64), Fraction(3, 64), Fraction(3, 64)]
    with pytest.raises(DomainError):
        RightComputableSeq.parse("bogus:1")


def test_halting_closed_forms():
    a = HaltingPredicate.from_text("halts 1 1\n")
    assert [halting_sequence(a, k) for k in range(4)] == [Fraction(1, 16), Fraction(3, 64), Fraction(3, 64), Fraction(3, 64)]
    b = HaltingPredicate.from_text("halts 1 1\nhalts 2 3\n")
    assert [halting_sequence(b, k) for k in range(5)] == [
        Fraction(1, 16),
        Fraction(3, 64),
        Fraction(3, 64),
        Fraction(11, 256),
        Fraction(11, 256),
    ]


@given(st.lists(st.tuples(st.integers(1, 8), st.integers(1, 12)), max_size=6, unique_by=lambda p: p[0]))
def test_halting_sequence_matches_formula(facts):
    pred = HaltingPredicate(tuple(facts))
    values = [halting_sequence(pred, k) for k in range(14)]
    assert values == [_closed_form(facts, k) for k in range(14)]
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert all(0 < v <= Fraction(1, 16) for v in values)


def test_predicate_firing_twice_rejected():
    pred = HaltingPredicate.from_text("halts 1 1\nhalts 1 2\n")
    with pytest.raises(PredicateViolation):
        halting_sequence(pred, 3)


def test_register_machines():
    assert RegisterMachine.parse("HALT").halting_time(10) == 1
    # r0 := 3, then count it down: 3 INC, then 3 x (DEC, JMP), a final DEC that jumps, HALT
    m = RegisterMachine.parse("INC 0; INC 0; INC 0; DEC 0 6; JMP 3; HALT; HALT")
    assert m.halting_time(100) == 3 + 3 * 2 + 1 + 1
    assert RegisterMachine.parse("JMP 0").halting_time(1000) is None
    pred = HaltingPredicate.from_text("machine 1 HALT\nmachine 2 INC 0; INC 0; HALT\nmachine 3 JMP 0\n")
    assert pred.firing(5) == [(1, 1), (2, 3)]
    assert halting_sequence(pred, 5) == _closed_form([(1, 1), (2, 3)], 5)


# -- search helpers ---------------------------------------------------------


def test_diagonal_order():
    first = [next(g) for g in [iter(_diagonal(0))] for _ in range(8)]
    keys = [m + (N - 1).bit_length() for m, N in first]
    assert keys == sorted(keys)
    assert all(m >= 1 and N >= 2 for m, N in first)


def test_cylinder_interval():
    assert cylinder_interval([]) == (Fraction(0), Fraction(1))
    lo, hi = cylinder_interval([2])
    assert (lo, hi) == (Fraction(1, 3), Fraction(1, 2))
    x = float(noble_value([2, 5]).value)
    lo, hi = cylinder_interval([2, 5])
    assert lo < x < hi


def test_guard_length_certifies_extensions():
    cand = CFracPrefix((1, 6))
    thr = phi_noble([]).value.lo.to_fraction() - 1
    t = guard_length(cand, thr)
    assert t >= 0
    assert phi_extensions_exceed(cand.extend([1] * t), thr)


def test_infeasible_drop():
    with pytest.raises(InfeasibleDrop):
        smlchgr_step([], 5.0)


def test_candidate_budget_and_cursor():
    with pytest.raises(BudgetExceeded) as info:
        smlchgr_step([], 0.005, budget_candidates=1)
    cursor = info.value.cursor
    assert cursor["index"] == 1 and cursor["m0"] == 0


# -- synthesis --------------------------------------------------------------


def test_zero_sequence_is_parabolic():
    res = synthesize(RightComputableSeq.constant(0), 1)
    assert res.state.parabolic
    assert res.theta == (Fraction(0), Fraction(0))
    assert res.state.to_json()["parabolic"] is True


def test_increasing_sequence_rejected():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        seq = RightComputableSeq.from_values([Fraction(1, 16), Fraction(1, 8)])
        with pytest.raises(SequenceViolation):
            seq.prefix(2)


def test_stage_one_properties(stage_one):
    state = stage_one.state
    assert state.stage == 1
    assert state.prefixes[0].terms == ()
    assert len(state.prefix) >= 1
    lo, hi = state.window(1)
    assert lo < state.radius.lo and state.radius.hi < hi
    report = verify_properties(state)
    for key in "123456":
        assert report[key]["status"] == "pass", (key, report[key])


def test_stage_one_phi_increases(stage_one):
    state = stage_one.state
    assert phi_noble(state.prefix).value.lo > phi_noble([]).value.hi


def test_doctored_state_fails_property_3(stage_one, tmp_path):
    path = tmp_path / "state.json"
    stage_one.state.save(path)
    data = json.loads(path.read_text())
    data["prefixes"][1] = "[7]" if data["prefixes"][1] != "[7]" else "[8]"
    data["prefixes"].append("[1,1]")
    data["prefixes"][0] = "[]"
    path.write_text(json.dumps(data))
    doctored = SynthesisState.load(path)
    report = verify_properties(doctored)
    assert report["3"]["status"] == "fail"


def test_state_round_trip_and_resume(stage_one, tmp_path):
    path = tmp_path / "state.json"
    stage_one.state.save(path)
    loaded = SynthesisState.load(path)
    assert loaded.to_json() == stage_one.state.to_json()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        again = synthesize(RightComputableSeq.parse(f"const:{RHO}"), 1, state=loaded)
    assert again.state.to_json() == stage_one.state.to_json()
    assert again.theta == stage_one.theta
