"""Silentness-aware 2-step-recurrence classification.

A state is 2-step recurrent with respect to an equivalence relation R when
it is not silent, has more than two successors, and owns a transition all
of whose out-of-class successor states can only move back into the union
of the two classes involved.  Such states are the obstacle to logical
completeness of strong bisimilarity, so the classifier runs a ladder of
relations ordered by computation cost: recurrence is monotone in R, which
makes coarse relations sound for the negative answer and the (finer)
strong bisimilarity sound for the positive one.  Between the two the
honest verdict is "unknown".
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .bisim import strong_bisimilarity
from .model import (
    Ctmdp,
    Partition,
    Transition,
    partition_by_labels,
    silent_states,
    successors,
)

STATUS_NON_RECURRENT = "non-recurrent"
STATUS_RECURRENT = "recurrent"
STATUS_UNKNOWN = "unknown"


@dataclass(frozen=True)
class RecurrenceVerdict:
    status: str
    witness: tuple[int, Transition] | None
    relation_used: str

    def __post_init__(self):
        if (self.witness is not None) != (self.status == STATUS_RECURRENT):
            raise ValueError("witness present iff status is recurrent")


def label_relation(model: Ctmdp) -> Partition:
    """The label-equality relation, the coarsest sound relation of the ladder."""
    return partition_by_labels(model)


def _covers(model: Ctmdp, part: Partition, refiner: int, coarser: int) -> bool:
    """For each class C and refiner-transition, some same-rate transition of
    ``coarser`` puts at least as much mass on C (choice may differ per C)."""
    for tr in model.steps(refiner):
        same_rate = [t for t in model.steps(coarser) if t.rate == tr.rate]
        if not same_rate:
            return False
        for block in part.blocks:
            need = tr.target.mass(block)
            if need == 0:
                continue
            if all(t.target.mass(block) < need for t in same_rate):
                return False
    return True


def preorder_relation(model: Ctmdp) -> Partition:
    """Greatest fixpoint from the label relation of mutual per-class dominance.

    Coarser than strong bisimilarity (a combined match yields a dominating
    pure transition per class) yet cheap to compute; the middle rung of
    the classification ladder.
    """
    blocks = [sorted(b) for b in label_relation(model).blocks]
    while True:
        part = Partition.from_blocks(blocks)
        new_blocks: list[list[int]] = []
        changed = False
        for members in blocks:
            groups: list[list[int]] = []
            for s in members:
                for group in groups:
                    rep = group[0]
                    if _covers(model, part, s, rep) and _covers(model, part, rep, s):
                        group.append(s)
                        break
                else:
                    groups.append([s])
            if len(groups) > 1:
                changed = True
            new_blocks.extend(groups)
        blocks = new_blocks
        if not changed:
            return Partition.from_blocks(blocks)


def two_step_recurrent_wrt(model: Ctmdp, part: Partition, s: int) -> Transition | None:
    """Witness transition making ``s`` 2-step recurrent w.r.t. ``part``, if any.

    Some(transition) iff s is not silent, has more than two distinct
    successor states, and every out-of-class support state of the
    transition can only move into [s] union its own class.
    """
    if s in silent_states(model):
        return None
    if len(successors(model, s)) <= 2:
        return None
    own = part.block_states(part.block_of(s))
    for tr in model.steps(s):
        ok = True
        for succ in sorted(tr.target.support):
            if succ in own:
                continue
            allowed = own | part.block_states(part.block_of(succ))
            if any(t.target.mass(allowed) != 1 for t in model.steps(succ)):
                ok = False
                break
        if ok:
            return tr
    return None


def _first_witness(model: Ctmdp, part: Partition) -> tuple[int, Transition] | None:
    for s in sorted(model.state_ids):
        tr = two_step_recurrent_wrt(model, part, s)
        if tr is not None:
            return (s, tr)
    return None


def classify(model: Ctmdp) -> RecurrenceVerdict:
    """Decision ladder: coarse relations certify non-recurrence, strong
    bisimilarity certifies recurrence, anything in between is unknown."""
    for name, relation in (("label", label_relation), ("pre-order", preorder_relation)):
        if _first_witness(model, relation(model)) is None:
            return RecurrenceVerdict(STATUS_NON_RECURRENT, None, name)
    witness = _first_witness(model, strong_bisimilarity(model))
    if witness is not None:
        return RecurrenceVerdict(STATUS_RECURRENT, witness, "strong-bisim")
    return RecurrenceVerdict(STATUS_UNKNOWN, None, "strong-bisim")
