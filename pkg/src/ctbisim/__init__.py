"""Bisimulation equivalences, stochastic temporal logics, and counterexample
gadgets for continuous-time Markov decision processes."""

from .bisim import (
    DistinguishResult,
    FeasibilityResult,
    LiftedDistribution,
    combined_match,
    ctmc_strong,
    ctmc_weak,
    distinguish,
    lift,
    quotient,
    strong_bisimilarity,
    weak_bisimilarity,
)
from .expcalc import ExpPoly, TimeInterval, ep_add, ep_integrate, ep_mul_exp, interval_mass
from .model import (
    Ctmdp,
    Distribution,
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
from .recurrence import RecurrenceVerdict, classify, label_relation, preorder_relation, two_step_recurrent_wrt
from .uniformize import uniformization_rate, uniformize

__all__ = [
    "Ctmdp",
    "Distribution",
    "DistinguishResult",
    "ExpPoly",
    "FeasibilityResult",
    "LiftedDistribution",
    "Partition",
    "RecurrenceVerdict",
    "State",
    "TimeInterval",
    "Transition",
    "as_ratio",
    "classify",
    "combined_match",
    "ctmc_strong",
    "ctmc_weak",
    "distinguish",
    "dump_model",
    "ep_add",
    "ep_integrate",
    "ep_mul_exp",
    "interval_mass",
    "is_ctmc",
    "label_relation",
    "lift",
    "load_model",
    "preorder_relation",
    "quotient",
    "reachable",
    "silent_states",
    "strong_bisimilarity",
    "successors",
    "two_step_recurrent_wrt",
    "uniformization_rate",
    "uniformize",
    "validate",
    "weak_bisimilarity",
]
