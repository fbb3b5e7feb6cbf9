import random
from fractions import Fraction as F

import pytest

from ctbisim import gadgets
from ctbisim.model import Ctmdp, Distribution, State, Transition


@pytest.fixture
def fig1():
    return gadgets.fig1_pair()


@pytest.fixture
def example2():
    return gadgets.example2_rates()


@pytest.fixture
def example4():
    return gadgets.example4_modified()


@pytest.fixture
def fig3():
    return gadgets.fig3_ttp()


def make_random_ctmdp(rng: random.Random, max_states=8, max_choices=3, n_labels=2) -> Ctmdp:
    """Small random CTMDP with rationals of denominator <= 20.

    Few labels and a small rate pool keep label blocks non-trivial, so the
    refinement loops actually have work to do.
    """
    n = rng.randint(2, max_states)
    ap = tuple(f"a{i}" for i in range(n_labels))
    states = tuple(State(i, (rng.choice(ap),)) for i in range(n))
    transitions = []
    seen = set()
    for s in range(n):
        for _ in range(rng.randint(1, max_choices)):
            rate = F(rng.choice((1, 2, 3)))
            support = rng.sample(range(n), rng.randint(1, min(3, n)))
            weights = [rng.randint(1, 6) for _ in support]
            total = sum(weights)
            dist = Distribution.of({t: F(w, total) for t, w in zip(support, weights)})
            key = (s, rate, dist.items)
            if key in seen:
                continue
            seen.add(key)
            transitions.append(Transition(s, rate, dist))
    return Ctmdp(states, ap, tuple(transitions), initial=0)


def make_random_ctmc(rng: random.Random, max_states=8, n_labels=2) -> Ctmdp:
    n = rng.randint(2, max_states)
    ap = tuple(f"a{i}" for i in range(n_labels))
    states = tuple(State(i, (rng.choice(ap),)) for i in range(n))
    transitions = []
    for s in range(n):
        rate = F(rng.choice((1, 2, 3)))
        support = rng.sample(range(n), rng.randint(1, min(3, n)))
        weights = [rng.randint(1, 6) for _ in support]
        total = sum(weights)
        dist = Distribution.of({t: F(w, total) for t, w in zip(support, weights)})
        transitions.append(Transition(s, rate, dist))
    return Ctmdp(states, ap, tuple(transitions), initial=0)


def make_random_weights(rng: random.Random, n: int, plant_zero_subset: bool):
    """Weights in [-1/(4n), 1/(4n)] on a grid coarse enough for the gadget's
    epsilon argument; optionally force a non-empty zero-sum subset."""
    denom = 4 * n * rng.randint(2, 25)
    step = denom // (4 * n)
    weights = [F(rng.randint(-step, step), denom) for _ in range(n)]
    if plant_zero_subset and n >= 2:
        size = rng.randint(2, n)
        idx = rng.sample(range(n), size)
        head, last = idx[:-1], idx[-1]
        total = sum(weights[i] for i in head)
        if abs(total) <= F(1, 4 * n):
            weights[last] = -total
    return tuple(weights)
