"""Exact convex-hull membership, cross-validated against dense grid search.

The grid search over the weight simplex is the independent oracle: a grid
point reproducing the target witnesses feasibility, and on infeasibility
the returned certificate must strictly separate every grid point.
"""

import random
from fractions import Fraction as F

import numpy as np
import pytest

from ctbisim.bisim import combined_match, lift
from ctbisim.model import Distribution, Partition
from ctbisim.rational_lp import convex_combination, separating_certificate


def test_target_equal_to_candidate_gets_unit_weight():
    cands = [(F(1, 4), F(3, 4)), (F(1, 2), F(1, 2))]
    res = combined_match(cands, (F(1, 2), F(1, 2)))
    assert res.feasible
    assert res.weights == {0: F(0), 1: F(1)}


def test_hull_counterexample_pair_is_infeasible():
    cands = [(F(3, 10), F(3, 10), F(4, 10)), (F(5, 10), F(4, 10), F(1, 10))]
    target = (F(4, 10), F(3, 10), F(3, 10))
    res = combined_match(cands, target)
    assert not res.feasible
    rho = res.certificate
    assert rho is not None
    t_val = sum(a * b for a, b in zip(rho, target))
    for c in cands:
        assert t_val > sum(a * b for a, b in zip(rho, c))


@pytest.mark.parametrize("x, expected", [(F(1, 4), (F(1), F(0))), (F(3, 8), (F(1, 2), F(1, 2))), (F(1, 2), (F(0), F(1)))])
def test_two_point_interpolation_weights(x, expected):
    cands = [(F(1, 4), F(3, 4)), (F(1, 2), F(1, 2))]
    res = combined_match(cands, (x, 1 - x))
    assert res.feasible
    assert (res.weights[0], res.weights[1]) == expected


@pytest.mark.parametrize("x", [F(1, 5), F(3, 5)])
def test_outside_segment_is_infeasible(x):
    cands = [(F(1, 4), F(3, 4)), (F(1, 2), F(1, 2))]
    res = combined_match(cands, (x, 1 - x))
    assert not res.feasible


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        combined_match([(F(1), F(0))], (F(1), F(0), F(0)))
    with pytest.raises(ValueError):
        combined_match([], (F(1),))


def test_lift_sums_block_masses():
    part = Partition.from_blocks([[0, 1], [2], [3]])
    dist = Distribution.of({0: F(1, 4), 1: F(1, 4), 3: F(1, 2)})
    assert lift(dist, part).masses == (F(1, 2), F(0), F(1, 2))


def test_lift_single_block_partition():
    part = Partition.from_blocks([[0, 1, 2]])
    dist = Distribution.of({0: F(1, 3), 2: F(2, 3)})
    assert lift(dist, part).masses == (F(1),)


def _simplex_grid(n_weights: int, step: int):
    if n_weights == 2:
        for i in range(step + 1):
            yield (i, step - i)
    else:
        for i in range(step + 1):
            for j in range(step + 1 - i):
                yield (i, j, step - i - j)


def _random_instance(rng: random.Random):
    dim = rng.randint(2, 3)
    n_cands = rng.randint(2, 3)

    def vec():
        cuts = sorted(rng.randint(0, 8) for _ in range(dim - 1))
        parts = [a - b for a, b in zip(cuts + [8], [0] + cuts)]
        return tuple(F(p, 8) for p in parts)

    return [vec() for _ in range(n_cands)], vec()


def test_grid_cross_validation():
    """Exact feasibility agrees with a step-1/1000 grid search on small instances."""
    rng = random.Random(20240901)
    instances = [
        ([(F(3, 10), F(3, 10), F(4, 10)), (F(5, 10), F(4, 10), F(1, 10))], (F(4, 10), F(3, 10), F(3, 10))),
        ([(F(1, 4), F(3, 4)), (F(1, 2), F(1, 2))], (F(3, 8), F(5, 8))),
        ([(F(1, 4), F(3, 4)), (F(1, 2), F(1, 2))], (F(3, 5), F(2, 5))),
    ] + [_random_instance(rng) for _ in range(9)]
    step = 1000
    for cands, target in instances:
        solved = convex_combination(cands, target)
        C = np.array([[float(v) for v in c] for c in cands])
        t = np.array([float(v) for v in target])
        grid = np.array(list(_simplex_grid(len(cands), step)), dtype=float) / step
        points = grid @ C
        errs = np.abs(points - t).max(axis=1)
        near = np.nonzero(errs < 1e-9)[0]
        exact_hits = []
        for idx in near:
            w = [F(int(round(g * step)), step) for g in grid[idx]]
            combo = tuple(sum(wj * c[d] for wj, c in zip(w, cands)) for d in range(len(target)))
            if combo == tuple(target):
                exact_hits.append(w)
        if exact_hits:
            assert solved is not None, "grid found an exact combination but solver said infeasible"
        if solved is None:
            rho = separating_certificate(cands, target)
            rho_f = np.array([float(v) for v in rho])
            t_val = float(rho_f @ t)
            assert (points @ rho_f < t_val - 1e-12).all(), "certificate fails on a grid point"
