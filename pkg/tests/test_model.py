import json
from fractions import Fraction as F

import pytest

from ctbisim import gadgets
from ctbisim.model import (
    Ctmdp,
    Distribution,
    ModelError,
    Partition,
    State,
    Transition,
    as_ratio,
    dump_model,
    is_ctmc,
    load_model,
    reachable,
    silent_states,
    successors,
    validate,
)


def two_state_chain():
    states = (State(0, ("a",)), State(1, ("b",)))
    transitions = (
        Transition(0, F(2), Distribution.dirac(1)),
        Transition(1, F(1), Distribution.dirac(1)),
    )
    return Ctmdp(states, ("a", "b"), transitions, initial=0)


def test_as_ratio_decimal_and_fraction_agree():
    assert as_ratio("0.3") == as_ratio("3/10") == F(3, 10)
    assert as_ratio(2) == F(2)
    with pytest.raises(ModelError):
        as_ratio(0.3)
    with pytest.raises(ModelError):
        as_ratio("three tenths")


def test_validate_well_formed_model():
    assert validate(two_state_chain()) == []
    assert validate(gadgets.fig1_pair()) == []


def test_validate_reports_bad_probability_sum():
    m = two_state_chain()
    broken = Ctmdp(
        m.states,
        m.ap,
        (
            Transition(0, F(2), Distribution(((1, F(9, 10)),))),
            m.transitions[1],
        ),
        initial=0,
    )
    problems = validate(broken)
    assert len(problems) == 1
    assert "transition 0" in problems[0] and "9/10" in problems[0]


def test_validate_reports_deadlock():
    states = (State(0, ("a",)), State(1, ("a",)))
    transitions = (Transition(0, F(1), Distribution.dirac(1)),)
    problems = validate(Ctmdp(states, ("a",), transitions, initial=0))
    assert any("state 1" in p and "no outgoing" in p for p in problems)


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        (lambda m: Ctmdp(m.states, ("a",), m.transitions, 0), "not in AP"),
        (lambda m: Ctmdp(m.states, m.ap, m.transitions, 7), "initial state 7"),
        (
            lambda m: Ctmdp(
                m.states,
                m.ap,
                m.transitions + (Transition(0, F(-1), Distribution.dirac(1)),),
                0,
            ),
            "strictly positive",
        ),
        (
            lambda m: Ctmdp(
                m.states,
                m.ap,
                m.transitions + (Transition(0, F(1), Distribution(((1, F(0)), (0, F(1))))),),
                0,
            ),
            "zero-probability",
        ),
        (
            lambda m: Ctmdp(m.states, m.ap, m.transitions + (m.transitions[0],), 0),
            "duplicate",
        ),
        (
            lambda m: Ctmdp(
                m.states,
                m.ap,
                m.transitions + (Transition(0, F(1), Distribution.dirac(9)),),
                0,
            ),
            "unknown target",
        ),
    ],
)
def test_validate_flags_each_broken_invariant(mutate, fragment):
    broken = mutate(two_state_chain())
    assert any(fragment in p for p in validate(broken))


def test_successors_fig1(fig1):
    assert successors(fig1, 0) == {2, 3, 4}
    assert successors(fig1, 2) == {2}


def test_successors_example2_both_transitions_hit_one_state(example2):
    assert successors(example2, 0) == {2}
    with pytest.raises(ModelError):
        successors(example2, 99)


def test_reachable_chain_and_absorbing():
    states = (State(0, ("a",)), State(1, ("b",)), State(2, ("c",)))
    transitions = (
        Transition(0, F(1), Distribution.dirac(1)),
        Transition(1, F(1), Distribution.dirac(2)),
        Transition(2, F(1), Distribution.dirac(2)),
    )
    m = Ctmdp(states, ("a", "b", "c"), transitions, 0)
    assert reachable(m, 0) == {0, 1, 2}
    assert reachable(m, 2) == {2}


def test_reachable_example4_from_root(example4):
    assert reachable(example4, 0) == {0, 2, 3, 4, 5}


def test_silent_states_fig1_sinks(fig1):
    assert silent_states(fig1) == {2, 3, 4}


def test_silent_states_example4_breaks_silence(example4):
    # The sink that gained an escape to a differently-labelled state is no
    # longer silent; the fresh absorbing state is.
    assert 4 not in silent_states(example4)
    assert 5 in silent_states(example4)


def test_silent_closed_under_successors(fig1, example4):
    for m in (fig1, example4):
        silent = silent_states(m)
        for s in silent:
            assert reachable(m, s) <= silent


def test_successors_subset_of_reachable(fig1, example2, example4):
    for m in (fig1, example2, example4):
        for s in m.state_ids:
            assert successors(m, s) <= reachable(m, s)


def test_is_ctmc(fig1, example2):
    assert not is_ctmc(fig1)
    assert not is_ctmc(example2)
    assert is_ctmc(two_state_chain())


def test_partition_canonical_form_and_refines():
    p = Partition.from_blocks([[3, 1], [0, 2]])
    assert p.blocks == (frozenset({0, 2}), frozenset({1, 3}))
    q = Partition.from_blocks([[0, 1, 2, 3]])
    assert p.refines(q)
    assert not q.refines(p)
    assert p.refines(p)
    with pytest.raises(ModelError):
        Partition.from_blocks([[0, 1], [1, 2]])


def test_model_json_round_trip(fig1):
    text = dump_model(fig1)
    again = load_model(text)
    assert again == fig1
    # decimal and fraction spellings parse to identical rationals
    data = json.loads(text)
    data["transitions"][0]["to"] = {"2": "0.3", "3": "3/10", "4": "0.4"}
    reparsed = load_model(json.dumps(data))
    assert reparsed.transitions[0].target == Distribution.of(
        {2: F(3, 10), 3: F(3, 10), 4: F(2, 5)}
    )
