import random
from fractions import Fraction as F

import pytest

from conftest import make_random_ctmc, make_random_ctmdp
from ctbisim import gadgets, logic
from ctbisim.bisim import (
    BisimilarStatesError,
    ctmc_strong,
    ctmc_weak,
    distinguish,
    is_strong_bisimulation,
    quotient,
    strong_bisimilarity,
    weak_bisimilarity,
)
from ctbisim.expcalc import TimeInterval
from ctbisim.model import (
    Ctmdp,
    Distribution,
    ModelError,
    Partition,
    State,
    Transition,
    is_ctmc,
    partition_by_labels,
    validate,
)
from ctbisim.uniformize import uniformize


def twin_absorbing():
    """Two identical absorbing states plus a distinct third one."""
    states = (State(0, ("a",)), State(1, ("a",)), State(2, ("b",)))
    transitions = tuple(
        Transition(s, F(1), Distribution.dirac(s)) for s in range(3)
    )
    return Ctmdp(states, ("a", "b"), transitions, 0)


def test_strong_separates_fig1_roots(fig1):
    part = strong_bisimilarity(fig1)
    assert not part.same_block(0, 1)


def test_strong_merges_example3_inside_segment():
    for x in (F(1, 4), F(1, 3), F(3, 8), F(1, 2)):
        part = strong_bisimilarity(gadgets.example3(x))
        assert part.same_block(0, 1), f"x={x}"


def test_strong_separates_example3_outside_segment():
    for x in (F(1, 5), F(3, 5)):
        part = strong_bisimilarity(gadgets.example3(x))
        assert not part.same_block(0, 1), f"x={x}"


def test_identical_absorbing_states_merge():
    part = strong_bisimilarity(twin_absorbing())
    assert part.same_block(0, 1)
    assert len(part) == 2


def test_strong_partition_is_stable_and_label_uniform(fig1, example2, example4):
    for m in (fig1, example2, example4, twin_absorbing()):
        part = strong_bisimilarity(m)
        assert is_strong_bisimulation(m, part)
        assert part.refines(partition_by_labels(m))
        # one further refinement pass changes nothing
        q = quotient(m, part)
        assert len(strong_bisimilarity(q)) == len(part)


def test_weak_is_coarser_or_equal_and_matches_on_uniform(fig1):
    rng = random.Random(991)
    for _ in range(30):
        m = make_random_ctmdp(rng)
        strong = strong_bisimilarity(m)
        weak = weak_bisimilarity(m)
        assert strong.refines(weak)
        u = uniformize(m)
        assert strong_bisimilarity(u) == weak_bisimilarity(u)
    assert strong_bisimilarity(fig1) == weak_bisimilarity(fig1)


def test_weak_merges_example2_roots(example2):
    # After uniformization the middle rate is a convex mix of the outer two.
    assert weak_bisimilarity(example2).same_block(0, 1)
    assert not strong_bisimilarity(example2).same_block(0, 1)


def test_weak_independent_of_uniformization_rate(example2):
    base = weak_bisimilarity(example2)
    for e in (F(4), F(5), F(8), F(100)):
        assert weak_bisimilarity(example2, e) == base


def test_ctmc_chain_with_distinct_labels_is_discrete():
    states = (State(0, ("a",)), State(1, ("b",)), State(2, ("c",)))
    transitions = (
        Transition(0, F(1), Distribution.dirac(1)),
        Transition(1, F(2), Distribution.dirac(2)),
        Transition(2, F(1), Distribution.dirac(2)),
    )
    m = Ctmdp(states, ("a", "b", "c"), transitions, 0)
    assert len(weak_bisimilarity(m)) == 3
    assert ctmc_strong(m) == strong_bisimilarity(m)


def test_quotient_identity_partition_is_isomorphic(fig1):
    part = Partition.discrete(fig1.state_ids)
    q = quotient(fig1, part)
    assert len(q.states) == len(fig1.states)
    assert validate(q) == []


def test_quotient_merges_three_absorbing_states():
    states = tuple(State(i, ("a",)) for i in range(3))
    transitions = tuple(Transition(s, F(1), Distribution.dirac(s)) for s in range(3))
    m = Ctmdp(states, ("a",), transitions, 0)
    q = quotient(m, strong_bisimilarity(m))
    assert len(q.states) == 1
    assert validate(q) == []


def test_quotient_rejects_non_bisimulations(fig1):
    with pytest.raises(ModelError):
        quotient(fig1, Partition.from_blocks([[0, 1], [2], [3], [4]]))
    with pytest.raises(ModelError):
        quotient(fig1, Partition.from_blocks([[0, 2], [1], [3], [4]]))


def test_quotient_example3_preserves_next_bounds():
    m = gadgets.example3(F(3, 8))
    part = strong_bisimilarity(m)
    q = quotient(m, part)
    interval = TimeInterval(0.0, float("inf"))
    orig = logic.next_bounds(m, 1, interval, {2})
    mapped = logic.next_bounds(q, part.block_of(1), interval, {part.block_of(2)})
    assert mapped.upper == pytest.approx(orig.upper, abs=1e-12)
    assert mapped.lower == pytest.approx(orig.lower, abs=1e-12)
    assert orig.upper == pytest.approx(0.5, abs=1e-12)


def test_ctmc_specializations_match_general_algorithms():
    rng = random.Random(5150)
    for i in range(100):
        m = make_random_ctmc(rng)
        assert is_ctmc(m)
        assert ctmc_strong(m) == strong_bisimilarity(m), f"model {i}"
        assert ctmc_weak(m) == weak_bisimilarity(m), f"model {i}"


def test_ctmc_ops_reject_nondeterministic_models(fig1):
    with pytest.raises(ModelError):
        ctmc_strong(fig1)
    with pytest.raises(ModelError):
        ctmc_weak(fig1)


def test_single_state_ctmc_single_block():
    m = Ctmdp((State(0, ("a",)),), ("a",), (Transition(0, F(2), Distribution.dirac(0)),), 0)
    assert len(ctmc_strong(m)) == 1
    assert len(ctmc_weak(m)) == 1


# ---------------------------------------------------------------------------
# distinguishing formulas


def _assert_separates(model, result):
    sat_set = logic.sat(model, result.formula)
    assert result.satisfied_by in sat_set
    assert result.refuted_by not in sat_set


def test_distinguish_label_difference(fig1):
    res = distinguish(fig1, 2, 3)
    assert isinstance(res.formula, (logic.Atom, logic.Not))
    _assert_separates(fig1, res)


def test_distinguish_rate_mismatch_example2(example2):
    res = distinguish(example2, 0, 1)
    _assert_separates(example2, res)
    logic.check_dialect(res.formula, "cslor")
    # threshold sits strictly between the best outer-rate value and the
    # middle-rate value
    assert isinstance(res.formula, logic.Prob)


def test_distinguish_hull_failure_fig1(fig1):
    res = distinguish(fig1, 0, 1)
    _assert_separates(fig1, res)
    logic.check_dialect(res.formula, "cslor")


def test_distinguish_example3_outside_segment():
    for x in (F(1, 5), F(3, 5)):
        m = gadgets.example3(x)
        res = distinguish(m, 0, 1)
        _assert_separates(m, res)
        logic.check_dialect(res.formula, "cslor")


def test_distinguish_rejects_bisimilar_pair():
    m = gadgets.example3(F(3, 8))
    with pytest.raises(BisimilarStatesError):
        distinguish(m, 0, 1)


def test_distinguish_random_same_rate_models():
    """Models with one common rate keep the synthesis in the hull case."""
    rng = random.Random(77)
    checked = 0
    for _ in range(60):
        m = make_random_ctmdp(rng, max_states=6, max_choices=2)
        # force a single rate so other-rate interference cannot mask the gap
        transitions = tuple(
            Transition(tr.source, F(2), tr.target) for tr in m.transitions
        )
        seen = set()
        dedup = []
        for tr in transitions:
            key = (tr.source, tr.rate, tr.target.items)
            if key not in seen:
                seen.add(key)
                dedup.append(tr)
        m = Ctmdp(m.states, m.ap, tuple(dedup), m.initial)
        part = strong_bisimilarity(m)
        for s in m.state_ids:
            for r in m.state_ids:
                if s < r and not part.same_block(s, r):
                    res = distinguish(m, s, r, part)
                    _assert_separates(m, res)
                    checked += 1
    assert checked > 20
