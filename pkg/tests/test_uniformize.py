from fractions import Fraction as F

import pytest

from ctbisim import gadgets
from ctbisim.model import Ctmdp, Distribution, ModelError, State, Transition, validate
from ctbisim.uniformize import uniformization_rate, uniformize


def mixed_rate_ctmc():
    states = (State(0, ("a",)), State(1, ("b",)))
    transitions = (
        Transition(0, F(1), Distribution.dirac(1)),
        Transition(1, F(3), Distribution.of({0: F(1, 2), 1: F(1, 2)})),
    )
    return Ctmdp(states, ("a", "b"), transitions, 0)


def test_default_rate_is_maximum(example2):
    assert uniformization_rate(example2) == F(4)
    assert uniformization_rate(mixed_rate_ctmc()) == F(3)


def test_rate_override_accepted_and_validated():
    m = mixed_rate_ctmc()
    assert uniformize(m, 7).max_rate() == F(7)
    assert validate(uniformize(m, 7)) == []
    with pytest.raises(ModelError):
        uniformize(m, 2)


def test_dirac_transition_gains_self_loop():
    m = mixed_rate_ctmc()
    u = uniformize(m, 4)
    tr = u.steps(0)[0]
    assert tr.rate == F(4)
    assert tr.target.to_dict() == {0: F(3, 4), 1: F(1, 4)}


def test_rate1_state_gains_two_thirds_self_loop():
    m = mixed_rate_ctmc()
    u = uniformize(m, 3)
    assert u.steps(0)[0].target.to_dict() == {0: F(2, 3), 1: F(1, 3)}
    # the rate-3 transition is unchanged
    assert u.steps(1)[0].target == m.steps(1)[0].target


def test_all_exit_rates_equal_and_valid(fig1, example2, example4):
    for m in (fig1, example2, example4):
        for e in (None, 2 * m.max_rate()):
            u = uniformize(m, e)
            want = e if e is not None else m.max_rate()
            assert all(tr.rate == want for tr in u.transitions)
            assert validate(u) == []
            assert u.provenance == {s: s for s in m.state_ids}


def test_uniform_model_unchanged_at_its_own_rate(fig1):
    u = uniformize(fig1, 1)
    assert u.transitions == fig1.transitions


def test_idempotence(example2):
    e = F(4)
    once = uniformize(example2, e)
    twice = uniformize(once, e)
    assert twice.transitions == once.transitions
    assert twice.states == once.states


def test_labels_preserved(example4):
    u = uniformize(example4)
    assert u.states == example4.states
