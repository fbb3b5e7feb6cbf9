"""Seeded Monte Carlo path sampler and pointwise-semantics estimator.

Every analytic bound in the package can be cross-checked here: paths are
sampled under an explicit scheduler by drawing a transition, an
exponential sojourn, and a successor per jump, and a path formula is then
checked literally on the sampled prefix.

Reproducibility: the generator is counter based.  Draw ``k`` of the run is

    u = ((mix(seed + (k+1) * 0x9E3779B97F4A7C15) >> 11) + 1) * 2**-53

where ``mix`` is the splitmix64 finalizer; ``u`` lies in the half-open
interval (0, 1] and sojourns come from the inverse CDF -ln(u)/rate.  Path
``i`` owns the counter block [i * 2**20, (i+1) * 2**20), so results are
bit-identical across runs, platforms, and any parallel split of the path
range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .expcalc import TimeInterval
from .logic import (
    GroundAnd,
    GroundNext,
    GroundNot,
    GroundOr,
    GroundPath,
    GroundState,
    GroundUntil,
)
from .model import Ctmdp, ModelError

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_PATH_STRIDE = 1 << 20


class SchedulerError(ValueError):
    pass


def _mix(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _uniform(seed: int, counter: int) -> float:
    """Counter-indexed uniform draw in (0, 1]."""
    z = _mix((seed + (counter + 1) * _GOLDEN) & _MASK)
    return ((z >> 11) + 1) * 2.0**-53


@dataclass(frozen=True)
class SchedulerSpec:
    """Explicit scheduler: positional-deterministic or total-time piecewise.

    positional-deterministic: ``choice[state]`` is a transition index.
    ttp-piecewise: ``choice[state]`` is a list of (bin upper bound,
    weight list over transition indices); bins are strictly increasing
    with an unbounded last bin, and the active bin is the first whose
    upper bound exceeds the total elapsed time.
    """

    kind: str
    choice: Mapping

    def __post_init__(self):
        if self.kind not in ("positional-deterministic", "ttp-piecewise"):
            raise SchedulerError(f"unknown scheduler kind {self.kind!r}")

    def validate(self, model: Ctmdp) -> None:
        for state, entry in self.choice.items():
            n = len(model.steps(state))
            if self.kind == "positional-deterministic":
                if not (0 <= entry < n):
                    raise SchedulerError(f"state {state}: transition index {entry} out of range")
                continue
            uppers = [upper for upper, _ in entry]
            if any(b <= a for a, b in zip(uppers, uppers[1:])):
                raise SchedulerError(f"state {state}: time bins must be strictly increasing")
            if not uppers or not math.isinf(uppers[-1]):
                raise SchedulerError(f"state {state}: last time bin must be unbounded")
            for _, weights in entry:
                if any(not (0 <= idx < n) for idx, _ in weights):
                    raise SchedulerError(f"state {state}: transition index out of range")
                if sum((Fraction(w) for _, w in weights), Fraction(0)) != 1:
                    raise SchedulerError(f"state {state}: bin weights must sum to 1")

    @classmethod
    def positional(cls, choice: Mapping[int, int]) -> "SchedulerSpec":
        return cls("positional-deterministic", dict(choice))

    def to_dict(self) -> dict:
        if self.kind == "positional-deterministic":
            return {"kind": self.kind, "choice": {str(s): i for s, i in self.choice.items()}}
        return {
            "kind": self.kind,
            "choice": {
                str(s): [
                    {
                        "until": "inf" if math.isinf(upper) else repr(upper),
                        "weights": {str(i): str(Fraction(w)) for i, w in weights},
                    }
                    for upper, weights in entry
                ]
                for s, entry in self.choice.items()
            },
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SchedulerSpec":
        kind = data["kind"]
        if kind == "positional-deterministic":
            return cls(kind, {int(s): int(i) for s, i in data["choice"].items()})
        choice = {}
        for s, entry in data["choice"].items():
            bins = []
            for item in entry:
                upper = math.inf if item["until"] == "inf" else float(Fraction(item["until"]))
                weights = [(int(i), Fraction(w)) for i, w in item["weights"].items()]
                bins.append((upper, weights))
            choice[int(s)] = bins
        return cls(kind, choice)


@dataclass(frozen=True)
class SampledPath:
    """Prefix s0, t0, s1, ..., sn of a sampled trajectory, truncated at ``horizon``.

    ``sojourns[i]`` is the time spent in ``states[i]``; the sojourn in the
    final state is only known to extend past the horizon.
    """

    states: tuple[int, ...]
    sojourns: tuple[float, ...]
    horizon: float

    @property
    def total_time(self) -> float:
        return sum(self.sojourns)

    @property
    def arrival_times(self) -> tuple[float, ...]:
        acc = 0.0
        out = [0.0]
        for t in self.sojourns:
            acc += t
            out.append(acc)
        return tuple(out)


def sample_paths(
    model: Ctmdp,
    s: int,
    sched: SchedulerSpec,
    horizon: float,
    n: int,
    seed: int,
) -> list[SampledPath]:
    """Draw ``n`` independent truncated paths from ``s`` under ``sched``."""
    if n < 1:
        raise ValueError("need at least one path")
    if not (horizon > 0):
        raise ValueError("horizon must be positive")
    sched.validate(model)
    if s not in set(model.state_ids):
        raise ModelError(f"unknown start state {s}")
    # Per-state sampling tables: (rate float, cumulative (prob, target)).
    tables = {}
    for state in model.state_ids:
        entries = []
        for tr in model.steps(state):
            acc = 0.0
            cum = []
            for target, p in tr.target.items:
                acc += float(p)
                cum.append((acc, target))
            cum[-1] = (1.0, cum[-1][1])  # absorb float round-off
            entries.append((float(tr.rate), cum))
        tables[state] = entries
    positional = sched.kind == "positional-deterministic"
    paths = []
    for i in range(n):
        counter = i * _PATH_STRIDE
        budget = (i + 1) * _PATH_STRIDE
        state = s
        tt = 0.0
        states = [s]
        sojourns: list[float] = []
        while True:
            if positional:
                try:
                    idx = sched.choice[state]
                except KeyError:
                    raise SchedulerError(f"scheduler has no choice for state {state}") from None
            else:
                try:
                    bins = sched.choice[state]
                except KeyError:
                    raise SchedulerError(f"scheduler has no choice for state {state}") from None
                weights = next(w for upper, w in bins if tt < upper)
                u = _uniform(seed, counter)
                counter += 1
                idx = weights[-1][0]
                acc = 0.0
                for j, w in weights:
                    acc += float(w)
                    if u <= acc:
                        idx = j
                        break
            rate, cum = tables[state][idx]
            u = _uniform(seed, counter)
            counter += 1
            sojourn = -math.log(u) / rate
            if tt + sojourn > horizon:
                break
            u = _uniform(seed, counter)
            counter += 1
            target = next(t for bound, t in cum if u <= bound)
            sojourns.append(sojourn)
            states.append(target)
            state = target
            tt += sojourn
            if counter >= budget:
                raise RuntimeError(
                    f"path {i} exhausted its draw budget before the horizon; "
                    "lower the horizon"
                )
        paths.append(SampledPath(tuple(states), tuple(sojourns), horizon))
    return paths


# ---------------------------------------------------------------------------
# Pointwise-semantics checking on sampled prefixes


def _and3(a, b):
    if a is False or b is False:
        return False
    if a is True and b is True:
        return True
    return None


def _or3(a, b):
    if a is True or b is True:
        return True
    if a is False and b is False:
        return False
    return None


def _check(psi: GroundPath, path: SampledPath, i: int, arrivals: tuple[float, ...]):
    """Three-valued truth of ``psi`` on the suffix starting at arrival ``i``.

    None means the truncated prefix cannot resolve the formula: every
    unobserved continuation is consistent with both verdicts.
    """
    n_jumps = len(path.sojourns)
    if isinstance(psi, GroundState):
        return path.states[i] in psi.states
    if isinstance(psi, GroundNot):
        v = _check(psi.sub, path, i, arrivals)
        return None if v is None else not v
    if isinstance(psi, GroundAnd):
        return _and3(
            _check(psi.lhs, path, i, arrivals), _check(psi.rhs, path, i, arrivals)
        )
    if isinstance(psi, GroundOr):
        return _or3(
            _check(psi.lhs, path, i, arrivals), _check(psi.rhs, path, i, arrivals)
        )
    if isinstance(psi, GroundNext):
        if i < n_jumps:
            if not psi.interval.contains(path.sojourns[i]):
                return False
            return _check(psi.sub, path, i + 1, arrivals)
        # Unobserved sojourn, but already longer than horizon - arrival.
        if path.horizon - arrivals[i] > psi.interval.upper:
            return False
        return None
    if isinstance(psi, GroundUntil):
        interval = psi.interval
        prefix = True  # conjunction of lhs at indices before the current one
        maybe = False
        for k in range(i, n_jumps + 1):
            tau = arrivals[k] - arrivals[i]
            if tau > interval.upper:
                return None if maybe else False
            if interval.lower <= tau:
                rv = _check(psi.rhs, path, k, arrivals)
                if rv is True and prefix is True:
                    return True
                if rv is not False and prefix is not False:
                    maybe = True
            lv = _check(psi.lhs, path, k, arrivals)
            prefix = _and3(prefix, lv)
            if prefix is False:
                return None if maybe else False
        if path.horizon - arrivals[i] > interval.upper:
            return None if maybe else False
        return None  # future arrivals inside the interval are still possible
    raise TypeError(f"unknown ground path node {psi!r}")


def path_satisfies(psi: GroundPath, path: SampledPath):
    """True/False/None (unresolved) pointwise verdict for one sampled path."""
    return _check(psi, path, 0, path.arrival_times)


@dataclass(frozen=True)
class EstimateResult:
    """Estimated satisfaction probability with truncation accounted for twice.

    Unresolved paths count as failures in the pessimistic reading and as
    successes in the optimistic one; both are reported.  The standard
    error is the z=1 Wilson-interval half width, which stays positive at
    the boundaries.
    """

    n: int
    satisfied: int
    violated: int
    unresolved: int

    def successes(self, mode: str = "pessimistic") -> int:
        if mode == "pessimistic":
            return self.satisfied
        if mode == "optimistic":
            return self.satisfied + self.unresolved
        raise ValueError(f"unknown mode {mode!r}")

    def value(self, mode: str = "pessimistic") -> float:
        return self.successes(mode) / self.n

    def std_error(self, mode: str = "pessimistic") -> float:
        x = self.successes(mode)
        n = self.n
        return math.sqrt(x * (n - x) / n + 0.25) / (n + 1)

    @property
    def estimate(self) -> float:
        return self.value()


def estimate(paths: Sequence[SampledPath], psi: GroundPath) -> EstimateResult:
    """Fraction of paths satisfying ``psi`` by direct pointwise checking."""
    satisfied = violated = unresolved = 0
    for path in paths:
        v = path_satisfies(psi, path)
        if v is True:
            satisfied += 1
        elif v is False:
            violated += 1
        else:
            unresolved += 1
    return EstimateResult(len(paths), satisfied, violated, unresolved)


def default_horizon(psi: GroundPath) -> float:
    """10x the largest finite interval bound in ``psi`` (at least 10)."""
    bounds = [10.0]

    def walk(p: GroundPath):
        if isinstance(p, (GroundNext, GroundUntil)):
            for v in (p.interval.lower, p.interval.upper):
                if not math.isinf(v):
                    bounds.append(10.0 * v)
        for attr in ("sub", "lhs", "rhs"):
            child = getattr(p, attr, None)
            if isinstance(child, GroundPath):
                walk(child)

    walk(psi)
    return max(bounds)
