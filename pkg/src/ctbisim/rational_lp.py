"""Exact-rational feasibility of convex-combination membership.

Decides whether a target vector lies in the convex hull of finitely many
candidate vectors, entirely in Fraction arithmetic.  Instances here are
tiny (a handful of candidates over a handful of partition blocks), so a
dense phase-1 simplex with Bland's rule is both simple and fast, and the
verdict is exact by construction.

On infeasibility the phase-1 dual multipliers are a Farkas certificate:
a vector rho with rho . target > rho . candidate for every candidate.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Vector = tuple[Fraction, ...]

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _phase_one(columns: list[list[Fraction]], rhs: list[Fraction]):
    """min sum(artificials) s.t. [columns | I] x = rhs, x >= 0 (rhs >= 0).

    Returns (optimum, x_real, duals).
    """
    m = len(rhs)
    n = len(columns)
    # Tableau rows: n real columns, m artificial columns, rhs.
    rows = [
        [columns[j][i] for j in range(n)]
        + [(_ONE if k == i else _ZERO) for k in range(m)]
        + [rhs[i]]
        for i in range(m)
    ]
    basis = [n + i for i in range(m)]
    cost = [_ZERO] * n + [_ONE] * m

    def objective_row():
        # reduced profit z_j - c_j for the minimization problem
        obj = []
        for j in range(n + m):
            z = sum(cost[basis[i]] * rows[i][j] for i in range(m))
            obj.append(z - cost[j])
        return obj

    while True:
        obj = objective_row()
        entering = next((j for j in range(n + m) if obj[j] > 0), None)
        if entering is None:
            break
        best = None
        for i in range(m):
            coeff = rows[i][entering]
            if coeff > 0:
                ratio = rows[i][-1] / coeff
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise ArithmeticError("phase-1 objective unbounded; inconsistent tableau")
        _, leaving = best
        pivot = rows[leaving][entering]
        rows[leaving] = [v / pivot for v in rows[leaving]]
        for i in range(m):
            if i != leaving and rows[i][entering] != 0:
                factor = rows[i][entering]
                rows[i] = [v - factor * w for v, w in zip(rows[i], rows[leaving])]
        basis[leaving] = entering

    optimum = sum(cost[basis[i]] * rows[i][-1] for i in range(m))
    x = [_ZERO] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = rows[i][-1]
    # Dual multiplier for row i: objective-row entry under artificial column i
    # plus its cost (z_j - c_j with c_j = 1 and column e_i, so z_j = y_i).
    obj = objective_row()
    duals = [obj[n + i] + _ONE for i in range(m)]
    return optimum, x, duals


def convex_combination(candidates: Sequence[Sequence[Fraction]], target: Sequence[Fraction]):
    """Weights w >= 0 with sum(w) = 1 and sum(w_j * candidate_j) = target, or None.

    Raises ValueError on dimension mismatch or an empty candidate list.
    """
    if not candidates:
        raise ValueError("need at least one candidate vector")
    dim = len(target)
    if any(len(c) != dim for c in candidates):
        raise ValueError("candidate/target dimension mismatch")
    columns = [[Fraction(v) for v in cand] + [_ONE] for cand in candidates]
    rhs = [Fraction(v) for v in target] + [_ONE]
    if any(v < 0 for v in rhs):
        raise ValueError("vectors must be componentwise non-negative")
    optimum, x, _ = _phase_one(columns, rhs)
    if optimum != 0:
        return None
    return tuple(x)


def separating_certificate(candidates: Sequence[Sequence[Fraction]], target: Sequence[Fraction]) -> Vector:
    """Farkas vector rho with rho . target > rho . candidate_j for all j.

    Only valid when :func:`convex_combination` is infeasible; the returned
    certificate is re-checked and an AssertionError means a solver bug.
    """
    dim = len(target)
    columns = [[Fraction(v) for v in cand] + [_ONE] for cand in candidates]
    rhs = [Fraction(v) for v in target] + [_ONE]
    optimum, _, duals = _phase_one(columns, rhs)
    if optimum == 0:
        raise ValueError("system is feasible; no separating certificate exists")
    rho = tuple(duals[:dim])
    offset = duals[dim]
    target_value = sum(r * t for r, t in zip(rho, target)) + offset
    assert target_value > 0, "phase-1 duals do not witness infeasibility"
    for cand in candidates:
        cand_value = sum(r * c for r, c in zip(rho, cand)) + offset
        assert cand_value <= 0, "certificate fails to separate a candidate"
    return rho
