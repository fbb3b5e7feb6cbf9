"""Core CTMDP data model: states, rate-tagged probabilistic transitions,
validation, reachability, and silent-state analysis.

All model-level quantities (probabilities, rates) are exact rationals so
that equivalence verdicts never depend on floating-point rounding.
Model values are immutable after construction and safe to share.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

ZERO = Fraction(0)
ONE = Fraction(1)


class ModelError(ValueError):
    """Raised for structurally unusable model inputs (unknown state ids etc.)."""


def as_ratio(value) -> Fraction:
    """Parse an exact rational from a string ("0.3", "3/10"), int, or Fraction.

    Floats are rejected: binary doubles silently misrepresent decimal
    literals and every downstream equivalence check is exact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ModelError(f"cannot parse rational from {value!r}") from exc
    raise ModelError(f"expected exact rational, got {type(value).__name__}")


@dataclass(frozen=True)
class Distribution:
    """Probability distribution over state ids with exact rational masses.

    ``items`` is stored exactly as given (sorted by state id); use
    :meth:`of` to build a canonical distribution with zero entries dropped.
    Invariants (masses in [0,1], total exactly 1, no stored zeros) are
    checked by :func:`validate`, not at construction, so that malformed
    input files can be loaded and reported on.
    """

    items: tuple[tuple[int, Fraction], ...]

    @classmethod
    def of(cls, mapping: Mapping[int, Fraction | int | str]) -> "Distribution":
        entries = [(int(s), as_ratio(p)) for s, p in mapping.items()]
        return cls(tuple(sorted((s, p) for s, p in entries if p != 0)))

    @classmethod
    def dirac(cls, state: int) -> "Distribution":
        return cls(((state, ONE),))

    def __getitem__(self, state: int) -> Fraction:
        for s, p in self.items:
            if s == state:
                return p
        return ZERO

    @property
    def support(self) -> frozenset[int]:
        return frozenset(s for s, _ in self.items)

    def mass(self, states: Iterable[int]) -> Fraction:
        wanted = set(states)
        return sum((p for s, p in self.items if s in wanted), ZERO)

    def total(self) -> Fraction:
        return sum((p for _, p in self.items), ZERO)

    def to_dict(self) -> dict[int, Fraction]:
        return dict(self.items)


@dataclass(frozen=True)
class Transition:
    source: int
    rate: Fraction
    target: Distribution


@dataclass(frozen=True)
class State:
    id: int
    labels: tuple[str, ...]  # sorted for canonical comparison

    @classmethod
    def of(cls, id: int, labels: Iterable[str]) -> "State":
        return cls(int(id), tuple(sorted(set(labels))))


@dataclass(frozen=True)
class Ctmdp:
    """A continuous-time Markov decision process.

    ``provenance`` optionally maps this model's state ids back to the state
    ids of the model it was derived from (set by uniformization and
    quotienting), so analysis results can be pulled back.
    """

    states: tuple[State, ...]
    ap: tuple[str, ...]
    transitions: tuple[Transition, ...]
    initial: int
    provenance: dict[int, int] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        steps: dict[int, list[Transition]] = {s.id: [] for s in self.states}
        for tr in self.transitions:
            steps.setdefault(tr.source, []).append(tr)
        object.__setattr__(self, "_steps", {s: tuple(ts) for s, ts in steps.items()})
        object.__setattr__(self, "_labels", {s.id: frozenset(s.labels) for s in self.states})

    @property
    def state_ids(self) -> tuple[int, ...]:
        return tuple(s.id for s in self.states)

    def labels_of(self, state: int) -> frozenset[str]:
        try:
            return self._labels[state]
        except KeyError:
            raise ModelError(f"unknown state id {state}") from None

    def steps(self, state: int) -> tuple[Transition, ...]:
        """All available transitions of ``state`` (the nondeterministic choices)."""
        try:
            return self._steps[state]
        except KeyError:
            raise ModelError(f"unknown state id {state}") from None

    def max_rate(self) -> Fraction:
        return max(tr.rate for tr in self.transitions)


def validate(model: Ctmdp) -> list[str]:
    """Return a list of invariant violations (empty iff the model is well formed).

    Violations are data, not failures: each message names the offending
    state or transition.
    """
    violations: list[str] = []
    ids = [s.id for s in model.states]
    known = set(ids)
    if len(ids) != len(known):
        violations.append("duplicate state ids")
    if not ids:
        violations.append("model has no states")
    ap = set(model.ap)
    for s in model.states:
        extra = set(s.labels) - ap
        if extra:
            violations.append(f"state {s.id}: labels {sorted(extra)} not in AP universe")
    if model.initial not in known:
        violations.append(f"initial state {model.initial} unknown")
    for s in model.states:
        if not model.steps(s.id):
            violations.append(f"state {s.id}: no outgoing transition (deadlock is not allowed)")
    seen: set[tuple[int, Fraction, tuple]] = set()
    for i, tr in enumerate(model.transitions):
        name = f"transition {i} (from {tr.source}, rate {tr.rate})"
        if tr.source not in known:
            violations.append(f"{name}: unknown source state")
        if tr.rate <= 0:
            violations.append(f"{name}: rate must be strictly positive")
        for target, p in tr.target.items:
            if target not in known:
                violations.append(f"{name}: unknown target state {target}")
            if p == 0:
                violations.append(f"{name}: stored zero-probability entry for state {target}")
            elif not (0 < p <= 1):
                violations.append(f"{name}: probability {p} for state {target} outside (0,1]")
        total = tr.target.total()
        if total != 1:
            violations.append(f"{name}: probabilities sum to {total}, expected 1")
        key = (tr.source, tr.rate, tr.target.items)
        if key in seen:
            violations.append(f"{name}: duplicate (source, rate, target) triple")
        seen.add(key)
    return violations


def successors(model: Ctmdp, state: int) -> frozenset[int]:
    """Union of the supports of all of ``state``'s transition targets."""
    out: set[int] = set()
    for tr in model.steps(state):
        out.update(tr.target.support)
    return frozenset(out)


def reachable(model: Ctmdp, state: int) -> frozenset[int]:
    """Transitive closure of :func:`successors`; includes ``state`` itself."""
    seen = {state}
    frontier = [state]
    while frontier:
        nxt = frontier.pop()
        for r in successors(model, nxt):
            if r not in seen:
                seen.add(r)
                frontier.append(r)
    return frozenset(seen)


def exit_rates(model: Ctmdp, state: int) -> frozenset[Fraction]:
    return frozenset(tr.rate for tr in model.steps(state))


def silent_states(model: Ctmdp) -> frozenset[int]:
    """States whose whole reachable set shares their labels and exit-rate sets.

    Such a state is indistinguishable from all of its successors by labels
    or sojourn-time behaviour.
    """
    silent: set[int] = set()
    for s in model.state_ids:
        closure = reachable(model, s)
        labels = model.labels_of(s)
        rates = exit_rates(model, s)
        if all(model.labels_of(r) == labels and exit_rates(model, r) == rates for r in closure):
            silent.add(s)
    return frozenset(silent)


def is_ctmc(model: Ctmdp) -> bool:
    """True iff the model is deterministic: exactly one transition per state."""
    return all(len(model.steps(s)) == 1 for s in model.state_ids)


@dataclass(frozen=True)
class Partition:
    """Equivalence relation on state ids as a canonical block list.

    Blocks are sorted by their minimum member, so two partitions are equal
    iff they induce the same relation.
    """

    blocks: tuple[frozenset[int], ...]

    def __post_init__(self):
        index: dict[int, int] = {}
        for i, block in enumerate(self.blocks):
            for s in block:
                if s in index:
                    raise ModelError(f"state {s} appears in two blocks")
                index[s] = i
        object.__setattr__(self, "index", index)

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]]) -> "Partition":
        normalized = [frozenset(b) for b in blocks if frozenset(b)]
        return cls(tuple(sorted(normalized, key=min)))

    @classmethod
    def discrete(cls, states: Iterable[int]) -> "Partition":
        return cls.from_blocks([s] for s in states)

    def block_of(self, state: int) -> int:
        try:
            return self.index[state]
        except KeyError:
            raise ModelError(f"state {state} not covered by partition") from None

    def block_states(self, block_id: int) -> frozenset[int]:
        return self.blocks[block_id]

    def same_block(self, s: int, r: int) -> bool:
        return self.block_of(s) == self.block_of(r)

    def refines(self, coarser: "Partition") -> bool:
        """True iff every block of self is contained in some block of ``coarser``."""
        return all(any(b <= c for c in coarser.blocks) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def covered_states(self) -> frozenset[int]:
        return frozenset(self.index)


def partition_by_labels(model: Ctmdp) -> Partition:
    groups: dict[frozenset[str], list[int]] = {}
    for s in model.states:
        groups.setdefault(frozenset(s.labels), []).append(s.id)
    return Partition.from_blocks(groups.values())


# ---------------------------------------------------------------------------
# Model file format (JSON, UTF-8)

def model_to_dict(model: Ctmdp) -> dict:
    return {
        "ap": list(model.ap),
        "states": [{"id": s.id, "labels": list(s.labels)} for s in model.states],
        "initial": model.initial,
        "transitions": [
            {
                "from": tr.source,
                "rate": str(tr.rate),
                "to": {str(s): str(p) for s, p in tr.target.items},
            }
            for tr in model.transitions
        ],
    }


def model_from_dict(data: Mapping) -> Ctmdp:
    try:
        states = tuple(State.of(s["id"], s["labels"]) for s in data["states"])
        transitions = tuple(
            Transition(
                source=int(t["from"]),
                rate=as_ratio(t["rate"]),
                target=Distribution.of({int(s): as_ratio(p) for s, p in t["to"].items()}),
            )
            for t in data["transitions"]
        )
        return Ctmdp(
            states=states,
            ap=tuple(sorted(set(data["ap"]))),
            transitions=transitions,
            initial=int(data["initial"]),
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise ModelError(f"malformed model object: {exc}") from exc


def dump_model(model: Ctmdp) -> str:
    return json.dumps(model_to_dict(model), indent=2)


def load_model(text: str) -> Ctmdp:
    return model_from_dict(json.loads(text))
