"""Programmatic builders for the counterexample models and the subset-sum
reduction gadget; these double as the package's fixture corpus.

Labels are synthesized as distinct atoms "l0", "l1", ... with the
prescribed coincidences (the two root states of a pair share "l0").
Everything is exact-rational and re-derivable bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import Ctmdp, Distribution, ModelError, State, Transition, as_ratio

F = Fraction

VARIANTS = (
    "fig1-pair",
    "example2-rates",
    "example3-x",
    "example4-modified",
    "fig2-successors",
    "fig3-ttp",
    "subset-sum",
)


@dataclass(frozen=True)
class GadgetParams:
    variant: str
    x: Fraction | None = None
    weights: tuple[Fraction, ...] | None = None
    rates: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ModelError(f"unknown gadget variant {self.variant!r}")


def _model(states, ap, transitions, initial=0) -> Ctmdp:
    return Ctmdp(tuple(states), tuple(ap), tuple(transitions), initial)


def _self_loop(state: int, rate=F(1)) -> Transition:
    return Transition(state, F(rate), Distribution.dirac(state))


def fig1_pair() -> Ctmdp:
    """Two roots over three silent sinks; the middle transition of the second
    root lies componentwise between, but outside the hull of, the other two."""
    states = [
        State(0, ("l0",)),  # s0
        State(1, ("l0",)),  # r0
        State(2, ("l1",)),  # u1
        State(3, ("l2",)),  # u2
        State(4, ("l3",)),  # u3
    ]
    left = Distribution.of({2: F(3, 10), 3: F(3, 10), 4: F(4, 10)})
    middle = Distribution.of({2: F(4, 10), 3: F(3, 10), 4: F(3, 10)})
    right = Distribution.of({2: F(5, 10), 3: F(4, 10), 4: F(1, 10)})
    transitions = [
        Transition(0, F(1), left),
        Transition(0, F(1), right),
        Transition(1, F(1), left),
        Transition(1, F(1), middle),
        Transition(1, F(1), right),
        _self_loop(2),
        _self_loop(3),
        _self_loop(4),
    ]
    return _model(states, ("l0", "l1", "l2", "l3"), transitions)


def example2_rates(rates=(F(1), F(2), F(4))) -> Ctmdp:
    """Dirac moves to one silent sink: the first root offers the outer rates,
    the second additionally the middle one."""
    lo, mid, hi = (as_ratio(r) for r in rates)
    if not 0 < lo < mid < hi:
        raise ModelError("rates must be three increasing positive values")
    states = [State(0, ("l0",)), State(1, ("l0",)), State(2, ("l1",))]
    to_u = Distribution.dirac(2)
    transitions = [
        Transition(0, lo, to_u),
        Transition(0, hi, to_u),
        Transition(1, lo, to_u),
        Transition(1, mid, to_u),
        Transition(1, hi, to_u),
        _self_loop(2),
    ]
    return _model(states, ("l0", "l1"), transitions)


def example3(x=F(3, 8)) -> Ctmdp:
    """Two-successor pair: the second root's extra transition (x, 1-x) is a
    convex combination of (1/4, 3/4) and (1/2, 1/2) exactly when x is in
    [1/4, 1/2]."""
    x = as_ratio(x)
    if not 0 <= x <= 1:
        raise ModelError(f"x must lie in [0,1], got {x}")
    states = [State(0, ("l0",)), State(1, ("l0",)), State(2, ("l1",)), State(3, ("l2",))]
    mu1 = Distribution.of({2: F(1, 4), 3: F(3, 4)})
    mu2 = Distribution.of({2: x, 3: 1 - x})
    mu3 = Distribution.of({2: F(1, 2), 3: F(1, 2)})
    transitions = [
        Transition(0, F(1), mu1),
        Transition(0, F(1), mu3),
        Transition(1, F(1), mu1),
        Transition(1, F(1), mu2),
        Transition(1, F(1), mu3),
        _self_loop(2),
        _self_loop(3),
    ]
    # x = 1/4 or 1/2 duplicates an existing transition of the second root.
    deduped = []
    seen = set()
    for tr in transitions:
        key = (tr.source, tr.rate, tr.target.items)
        if key not in seen:
            seen.add(key)
            deduped.append(tr)
    return _model(states, ("l0", "l1", "l2"), deduped)


def example4_modified() -> Ctmdp:
    """fig1-pair with the third sink no longer silent: it now moves with
    rate 1 into a freshly-labelled absorbing state."""
    base = fig1_pair()
    states = list(base.states) + [State(5, ("l4",))]
    transitions = [tr for tr in base.transitions if tr.source != 4]
    transitions.append(Transition(4, F(1), Distribution.dirac(5)))
    transitions.append(_self_loop(5))
    return _model(states, ("l0", "l1", "l2", "l3", "l4"), transitions)


def fig2_successors() -> Ctmdp:
    """The two-successor family at its midpoint parameter x = 3/8."""
    return example3(F(3, 8))


def fig3_ttp() -> Ctmdp:
    """Diamond whose optimal resolution at the reconvergence state depends on
    the branch taken earlier, not on elapsed time."""
    states = [
        State(0, ("a",)),  # branch root
        State(1, ("b",)),
        State(2, ("c",)),
        State(3, ("a",)),  # reconvergence
        State(4, ("d",)),
        State(5, ("e",)),
    ]
    transitions = [
        Transition(0, F(1), Distribution.of({1: F(1, 2), 2: F(1, 2)})),
        Transition(1, F(1), Distribution.dirac(3)),
        Transition(2, F(1), Distribution.dirac(3)),
        Transition(3, F(1), Distribution.dirac(4)),
        Transition(3, F(1), Distribution.dirac(5)),
        _self_loop(4),
        _self_loop(5),
    ]
    return _model(states, ("a", "b", "c", "d", "e"), transitions)


def subset_sum_gadget(weights) -> Ctmdp:
    """Reduction gadget: deciding whether the single transition of the first
    root can be separated from the hull of the second root's two transitions
    is deciding whether some non-empty subset of ``weights`` sums to zero.

    States: 0, 1 are the roots (shared label), 2 is the remainder sink,
    3..n+2 carry one weight each.  epsilon = 10^(-2n) exactly.
    """
    w = tuple(as_ratio(v) for v in weights)
    n = len(w)
    if n == 0:
        raise ModelError("need at least one weight")
    bound = F(1, 4 * n)
    for v in w:
        if abs(v) > bound:
            raise ModelError(f"weight {v} outside [-1/(4n), 1/(4n)] = [-{bound}, {bound}]")
    eps = F(1, 10 ** (2 * n))
    states = [State(0, ("l0",)), State(1, ("l0",)), State(2, ("lr",))]
    states += [State(3 + i, (f"w{i}",)) for i in range(n)]
    mu = {3 + i: abs(w[i]) + eps for i in range(n)}
    nu1 = {3 + i: w[i] + abs(w[i]) for i in range(n)}
    nu2 = {3 + i: -w[i] + abs(w[i]) for i in range(n)}
    for dist in (mu, nu1, nu2):
        dist[2] = 1 - sum(dist.values())
        if dist[2] < 0:
            raise ModelError("weights leave no probability mass for the remainder state")
    transitions = [Transition(0, F(1), Distribution.of(mu))]
    d1, d2 = Distribution.of(nu1), Distribution.of(nu2)
    transitions.append(Transition(1, F(1), d1))
    if d2.items != d1.items:
        transitions.append(Transition(1, F(1), d2))
    transitions += [_self_loop(2)] + [_self_loop(3 + i) for i in range(n)]
    ap = ("l0", "lr") + tuple(f"w{i}" for i in range(n))
    return _model(states, ap, transitions)


def build(params: GadgetParams) -> Ctmdp:
    """Instantiate a gadget variant from its parameters."""
    v = params.variant
    if v == "fig1-pair":
        return fig1_pair()
    if v == "example2-rates":
        return example2_rates(params.rates or (F(1), F(2), F(4)))
    if v == "example3-x":
        return example3(params.x if params.x is not None else F(3, 8))
    if v == "example4-modified":
        return example4_modified()
    if v == "fig2-successors":
        return fig2_successors()
    if v == "fig3-ttp":
        return fig3_ttp()
    if v == "subset-sum":
        if not params.weights:
            raise ModelError("subset-sum gadget needs a weight vector")
        return subset_sum_gadget(params.weights)
    raise ModelError(f"unknown gadget variant {v!r}")


def subset_sum_verdict(weights) -> bool:
    """True iff some non-empty subset of the weights sums to zero (brute force).

    The oracle the gadget's distinguishability is checked against.
    """
    w = [as_ratio(v) for v in weights]
    if len(w) > 20:
        raise ModelError("brute-force subset enumeration is capped at 20 weights")
    achievable: set[Fraction] = set()  # sums of non-empty subsets
    for v in w:
        achievable |= {v} | {acc + v for acc in achievable}
    return F(0) in achievable
