"""Stochastic temporal logic: syntax, parser, printer, and a desk-scale
probability-bound evaluator.

Four dialects share one AST:

* ``csl``     - path formulas are exactly X[I] phi or phi U[I] phi
* ``cslx``    - the next-free fragment (until only)
* ``cslor``   - disjunctions of next operators over state formulas
* ``cslstar`` - free nesting of path operators

Atoms are double-quoted: ``P<=0.46 (X[0.2,1] "u1")``.  Thresholds are
exact rationals; interval endpoints are floats (``inf`` allowed as the
upper bound).

The evaluator reports sup/inf of the satisfaction probability over a
documented scheduler class per operator (single-transition vertices for
next-style formulas, deterministic positional schedulers for until), with
all numeric comparisons at tolerance 1e-9.
"""

from __future__ import annotations

import itertools
import math
import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .expcalc import ExpPoly, TimeInterval, ep_convolve_exp, ep_integrate, interval_mass
from .model import Ctmdp

TOLERANCE = 1e-9

DIALECTS = ("csl", "cslx", "cslstar", "cslor")

COMPARISONS = ("<", "<=", ">=", ">")


class FormulaError(ValueError):
    pass


class ParseError(FormulaError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class DialectError(FormulaError):
    pass


class EvaluationError(RuntimeError):
    pass


class UnsupportedPathFormula(EvaluationError):
    pass


class UnsupportedRegionError(EvaluationError):
    pass


class SchedulerBlowupError(EvaluationError):
    pass


class PrecisionWarning(UserWarning):
    """A probability bound sits within 1e-9 of its threshold."""


# ---------------------------------------------------------------------------
# Abstract syntax


@dataclass(frozen=True)
class StateFormula:
    pass


@dataclass(frozen=True)
class Atom(StateFormula):
    name: str


@dataclass(frozen=True)
class Not(StateFormula):
    sub: StateFormula


@dataclass(frozen=True)
class And(StateFormula):
    lhs: StateFormula
    rhs: StateFormula


@dataclass(frozen=True)
class PathFormula:
    pass


@dataclass(frozen=True)
class Prob(StateFormula):
    op: str  # one of COMPARISONS
    bound: Fraction
    path: PathFormula

    def __post_init__(self):
        if self.op not in COMPARISONS:
            raise FormulaError(f"unknown comparison {self.op!r}")
        if not 0 <= self.bound <= 1:
            raise FormulaError(f"probability threshold {self.bound} outside [0,1]")


@dataclass(frozen=True)
class StateP(PathFormula):
    """A state formula in path position (evaluated at the current state)."""

    state: StateFormula


@dataclass(frozen=True)
class Next(PathFormula):
    interval: TimeInterval
    sub: PathFormula


@dataclass(frozen=True)
class Until(PathFormula):
    interval: TimeInterval
    lhs: PathFormula
    rhs: PathFormula


@dataclass(frozen=True)
class NotP(PathFormula):
    sub: PathFormula


@dataclass(frozen=True)
class AndP(PathFormula):
    lhs: PathFormula
    rhs: PathFormula


@dataclass(frozen=True)
class OrP(PathFormula):
    lhs: PathFormula
    rhs: PathFormula


# ---------------------------------------------------------------------------
# Printer


def _fmt_number(value: Fraction | float) -> str:
    if isinstance(value, Fraction):
        return str(value)
    if math.isinf(value):
        return "inf"
    return repr(float(value))


def _fmt_interval(interval: TimeInterval) -> str:
    return f"[{_fmt_number(interval.lower)},{_fmt_number(interval.upper)}]"


def format_state(f: StateFormula) -> str:
    if isinstance(f, Atom):
        return f'"{f.name}"'
    if isinstance(f, Not):
        return "!" + format_state(f.sub)
    if isinstance(f, And):
        return f"({format_state(f.lhs)} & {format_state(f.rhs)})"
    if isinstance(f, Prob):
        return f"P{f.op}{_fmt_number(f.bound)} ({format_path(f.path)})"
    raise FormulaError(f"not a state formula: {f!r}")


def format_path(p: PathFormula) -> str:
    if isinstance(p, StateP):
        return format_state(p.state)
    if isinstance(p, Next):
        return f"X{_fmt_interval(p.interval)} {format_path(p.sub)}"
    if isinstance(p, Until):
        return f"({format_path(p.lhs)} U{_fmt_interval(p.interval)} {format_path(p.rhs)})"
    if isinstance(p, NotP):
        return "!" + format_path(p.sub)
    if isinstance(p, AndP):
        return f"({format_path(p.lhs)} & {format_path(p.rhs)})"
    if isinstance(p, OrP):
        return f"({format_path(p.lhs)} | {format_path(p.rhs)})"
    raise FormulaError(f"not a path formula: {p!r}")


# ---------------------------------------------------------------------------
# Parser

_TOKEN_RE = re.compile(
    r"""\s*(?:
        (?P<string>"[^"]*")
      | (?P<number>\d+/\d+|\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
      | (?P<cmp><=|>=|<|>)
      | (?P<word>[A-Za-z_]+)
      | (?P<punct>[()\[\],!&|])
    )""",
    re.VERBOSE,
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent over the shared path grammar.

    Precedence, loosest first: ``|``, ``&``, ``U``, unary (``!``, ``X``).
    Every node is tagged 'state' or 'path'; purely boolean combinations of
    state formulas stay at the state level (with ``|`` desugared through
    De Morgan, since the state grammar has no native disjunction).
    """

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.advance()
        if tok[0] != kind or (value is not None and tok[1] != value):
            wanted = value if value is not None else kind
            raise ParseError(f"expected {wanted!r}, found {tok[1]!r}", tok[2])
        return tok

    # -- tagged helpers ----------------------------------------------------

    @staticmethod
    def _pathify(tagged):
        tag, node = tagged
        return node if tag == "path" else StateP(node)

    def parse_or(self):
        left = self.parse_and()
        while self.peek()[:2] == ("punct", "|"):
            self.advance()
            right = self.parse_and()
            if left[0] == "state" and right[0] == "state":
                left = ("state", Not(And(Not(left[1]), Not(right[1]))))
            else:
                left = ("path", OrP(self._pathify(left), self._pathify(right)))
        return left

    def parse_and(self):
        left = self.parse_until()
        while self.peek()[:2] == ("punct", "&"):
            self.advance()
            right = self.parse_until()
            if left[0] == "state" and right[0] == "state":
                left = ("state", And(left[1], right[1]))
            else:
                left = ("path", AndP(self._pathify(left), self._pathify(right)))
        return left

    def parse_until(self):
        left = self.parse_unary()
        if self.peek()[:2] == ("word", "U"):
            self.advance()
            interval = self.parse_interval()
            right = self.parse_until()  # right associative
            return ("path", Until(interval, self._pathify(left), self._pathify(right)))
        return left

    def parse_unary(self):
        kind, value, pos = self.peek()
        if (kind, value) == ("punct", "!"):
            self.advance()
            tag, node = self.parse_unary()
            if tag == "state":
                return ("state", Not(node))
            return ("path", NotP(node))
        if (kind, value) == ("word", "X"):
            self.advance()
            interval = self.parse_interval()
            sub = self.parse_unary()
            return ("path", Next(interval, self._pathify(sub)))
        return self.parse_primary()

    def parse_primary(self):
        kind, value, pos = self.advance()
        if kind == "string":
            return ("state", Atom(value[1:-1]))
        if (kind, value) == ("punct", "("):
            inner = self.parse_or()
            self.expect("punct", ")")
            return inner
        if (kind, value) == ("word", "P"):
            op = self.expect("cmp")[1]
            num = self.expect("number")[1]
            self.expect("punct", "(")
            path = self.parse_or()
            self.expect("punct", ")")
            return ("state", Prob(op, Fraction(num), self._pathify(path)))
        raise ParseError(f"unexpected token {value!r}", pos)

    def parse_interval(self) -> TimeInterval:
        self.expect("punct", "[")
        lower = self.parse_bound(allow_inf=False)
        self.expect("punct", ",")
        upper = self.parse_bound(allow_inf=True)
        self.expect("punct", "]")
        try:
            return TimeInterval(lower, upper)
        except ValueError as exc:
            raise ParseError(str(exc), self.peek()[2]) from exc

    def parse_bound(self, allow_inf: bool) -> float:
        kind, value, pos = self.advance()
        if kind == "word" and value == "inf":
            if not allow_inf:
                raise ParseError("interval lower bound must be finite", pos)
            return math.inf
        if kind == "number":
            return float(Fraction(value))
        raise ParseError(f"expected interval bound, found {value!r}", pos)


def parse(text: str, dialect: str = "cslstar") -> StateFormula:
    """Parse a state formula and enforce the dialect's path-shape restrictions."""
    parser = _Parser(text)
    tag, node = parser.parse_or()
    end = parser.peek()
    if end[0] != "end":
        raise ParseError(f"trailing input {end[1]!r}", end[2])
    if tag != "state":
        raise ParseError("top-level formula must be a state formula", 0)
    check_dialect(node, dialect)
    return node


def parse_path(text: str, dialect: str = "cslstar") -> PathFormula:
    """Parse a bare path formula (state formulas are wrapped, per the dialect)."""
    parser = _Parser(text)
    tagged = parser.parse_or()
    end = parser.peek()
    if end[0] != "end":
        raise ParseError(f"trailing input {end[1]!r}", end[2])
    path = _Parser._pathify(tagged)
    if dialect not in DIALECTS:
        raise FormulaError(f"unknown dialect {dialect!r}; expected one of {DIALECTS}")
    _check_path(path, dialect)
    return path


def check_dialect(formula: StateFormula, dialect: str) -> None:
    if dialect not in DIALECTS:
        raise FormulaError(f"unknown dialect {dialect!r}; expected one of {DIALECTS}")
    _check_state(formula, dialect)


def _check_state(f: StateFormula, dialect: str) -> None:
    if isinstance(f, Atom):
        return
    if isinstance(f, Not):
        _check_state(f.sub, dialect)
        return
    if isinstance(f, And):
        _check_state(f.lhs, dialect)
        _check_state(f.rhs, dialect)
        return
    if isinstance(f, Prob):
        _check_path(f.path, dialect)
        return
    raise FormulaError(f"unknown state formula node {f!r}")


def _is_state_leaf(p: PathFormula) -> bool:
    return isinstance(p, StateP)


def _check_path(p: PathFormula, dialect: str) -> None:
    if dialect == "cslstar":
        if isinstance(p, StateP):
            _check_state(p.state, dialect)
        elif isinstance(p, (NotP,)):
            _check_path(p.sub, dialect)
        elif isinstance(p, (AndP, OrP)):
            _check_path(p.lhs, dialect)
            _check_path(p.rhs, dialect)
        elif isinstance(p, Next):
            _check_path(p.sub, dialect)
        elif isinstance(p, Until):
            _check_path(p.lhs, dialect)
            _check_path(p.rhs, dialect)
        else:
            raise FormulaError(f"unknown path formula node {p!r}")
        return
    if dialect == "csl":
        if isinstance(p, Next) and _is_state_leaf(p.sub):
            _check_state(p.sub.state, dialect)
            return
        if isinstance(p, Until) and _is_state_leaf(p.lhs) and _is_state_leaf(p.rhs):
            _check_state(p.lhs.state, dialect)
            _check_state(p.rhs.state, dialect)
            return
        raise DialectError(f"dialect csl allows only X[I] phi or phi U[I] phi, got {format_path(p)}")
    if dialect == "cslx":
        if isinstance(p, Until) and _is_state_leaf(p.lhs) and _is_state_leaf(p.rhs):
            _check_state(p.lhs.state, dialect)
            _check_state(p.rhs.state, dialect)
            return
        raise DialectError(f"dialect cslx forbids this path formula: {format_path(p)}")
    if dialect == "cslor":
        if isinstance(p, OrP):
            _check_path(p.lhs, dialect)
            _check_path(p.rhs, dialect)
            return
        if isinstance(p, Next) and _is_state_leaf(p.sub):
            _check_state(p.sub.state, dialect)
            return
        raise DialectError(
            f"dialect cslor allows only disjunctions of next operators, got {format_path(p)}"
        )


# ---------------------------------------------------------------------------
# Grounded path formulas (state leaves resolved to state-id sets)


@dataclass(frozen=True)
class GroundPath:
    pass


@dataclass(frozen=True)
class GroundState(GroundPath):
    states: frozenset[int]


@dataclass(frozen=True)
class GroundNext(GroundPath):
    interval: TimeInterval
    sub: GroundPath


@dataclass(frozen=True)
class GroundUntil(GroundPath):
    interval: TimeInterval
    lhs: GroundPath
    rhs: GroundPath


@dataclass(frozen=True)
class GroundNot(GroundPath):
    sub: GroundPath


@dataclass(frozen=True)
class GroundAnd(GroundPath):
    lhs: GroundPath
    rhs: GroundPath


@dataclass(frozen=True)
class GroundOr(GroundPath):
    lhs: GroundPath
    rhs: GroundPath


def resolve_path(model: Ctmdp, p: PathFormula) -> GroundPath:
    """Replace every state-formula leaf by its satisfaction set."""
    if isinstance(p, StateP):
        return GroundState(sat(model, p.state))
    if isinstance(p, Next):
        return GroundNext(p.interval, resolve_path(model, p.sub))
    if isinstance(p, Until):
        return GroundUntil(p.interval, resolve_path(model, p.lhs), resolve_path(model, p.rhs))
    if isinstance(p, NotP):
        return GroundNot(resolve_path(model, p.sub))
    if isinstance(p, AndP):
        return GroundAnd(resolve_path(model, p.lhs), resolve_path(model, p.rhs))
    if isinstance(p, OrP):
        return GroundOr(resolve_path(model, p.lhs), resolve_path(model, p.rhs))
    raise FormulaError(f"unknown path formula node {p!r}")


def _flatten_or(p: GroundPath) -> list[GroundPath]:
    if isinstance(p, GroundOr):
        return _flatten_or(p.lhs) + _flatten_or(p.rhs)
    return [p]


# ---------------------------------------------------------------------------
# Probability bounds


@dataclass(frozen=True)
class ProbBounds:
    """sup/inf of the satisfaction probability over the recorded scheduler class."""

    lower: float
    upper: float
    scheduler_class: str
    exact: bool

    def __post_init__(self):
        if not (-TOLERANCE <= self.lower <= self.upper <= 1 + TOLERANCE):
            raise EvaluationError(f"inconsistent bounds [{self.lower}, {self.upper}]")


def next_values(model: Ctmdp, s: int, interval: TimeInterval, target: Iterable[int]) -> tuple[float, ...]:
    """Per-transition value of X[I] target: mu(target) * P(sojourn in I)."""
    wanted = frozenset(target)
    return tuple(
        float(tr.target.mass(wanted)) * interval_mass(tr.rate, interval)
        for tr in model.steps(s)
    )


def next_bounds(model: Ctmdp, s: int, interval: TimeInterval, target: Iterable[int]) -> ProbBounds:
    """Exact sup/inf over all schedulers of the next-step probability.

    The objective is linear over the convex set of combined transitions,
    so the optimum is attained at a single transition (vertex).
    """
    values = next_values(model, s, interval, target)
    return ProbBounds(min(values), max(values), "vertex", True)


def disjunctive_next_bounds(
    model: Ctmdp, s: int, clauses: Sequence[tuple[TimeInterval, Iterable[int]]]
) -> ProbBounds:
    """Bounds for a disjunction of next operators with pairwise disjoint targets."""
    grounded = [(interval, frozenset(target)) for interval, target in clauses]
    for (_, a), (_, b) in itertools.combinations(grounded, 2):
        if a & b:
            raise EvaluationError(
                "disjunctive next clauses must have pairwise disjoint targets "
                f"(overlap {sorted(a & b)})"
            )
    values = []
    for tr in model.steps(s):
        values.append(
            sum(
                float(tr.target.mass(target)) * interval_mass(tr.rate, interval)
                for interval, target in grounded
            )
        )
    return ProbBounds(min(values), max(values), "vertex", True)


def until_bounds_acyclic(
    model: Ctmdp, s: int, interval: TimeInterval, lhs: Iterable[int], rhs: Iterable[int]
) -> ProbBounds:
    """Exact until bounds over deterministic positional schedulers.

    The probability per scheduler is a sum over jump sequences of iterated
    exponential convolutions integrated over the interval.  Self-loop mass
    on a region state is collapsed exactly (a geometric number of
    exponential sojourns is again exponential), so only cycles through two
    or more live region states are rejected.  The first arrival in ``rhs``
    decides satisfaction; the ambiguous case of a too-early arrival at a
    state lying in both ``lhs`` and ``rhs`` is rejected rather than
    approximated.
    """
    lhs = frozenset(lhs)
    rhs = frozenset(rhs)
    cls = "positional-deterministic"
    if s in rhs:
        if interval.lower == 0:
            return ProbBounds(1.0, 1.0, cls, True)
        if s in lhs:
            raise UnsupportedRegionError(
                "start state lies in both sides of the until and the interval "
                "excludes time zero"
            )
        return ProbBounds(0.0, 0.0, cls, True)
    if s not in lhs:
        return ProbBounds(0.0, 0.0, cls, True)

    region = lhs - rhs
    forward = {s}
    stack = [s]
    while stack:
        u = stack.pop()
        for tr in model.steps(u):
            for t in tr.target.support:
                if t in region and t not in forward:
                    forward.add(t)
                    stack.append(t)
    live: set[int] = set()
    changed = True
    while changed:
        changed = False
        for u in region:
            if u in live:
                continue
            for tr in model.steps(u):
                if any(t in rhs or (t != u and t in live) for t in tr.target.support):
                    live.add(u)
                    changed = True
                    break
    relevant = sorted(forward & live)
    if s not in live:
        return ProbBounds(0.0, 0.0, cls, True)

    if interval.lower > 0:
        hits = set()
        for u in relevant:
            for tr in model.steps(u):
                hits |= tr.target.support & rhs
        if hits & lhs:
            raise UnsupportedRegionError(
                "a reachable target state also satisfies the left-hand side; "
                "arrivals before the interval cannot be resolved exactly"
            )

    # Static acyclicity check over live region states, self-loops excluded.
    order: list[int] = []
    marks: dict[int, int] = {}
    relevant_set = set(relevant)

    def visit(u: int):
        if marks.get(u) == 2:
            return
        if marks.get(u) == 1:
            raise UnsupportedRegionError("cyclic until region (beyond self-loops)")
        marks[u] = 1
        for tr in model.steps(u):
            for t in tr.target.support:
                if t in relevant_set and t != u:
                    visit(t)
        marks[u] = 2
        order.append(u)

    for u in relevant:
        visit(u)

    choice_counts = [len(model.steps(u)) for u in relevant]
    total_schedulers = math.prod(choice_counts)
    if total_schedulers > 10**6:
        raise SchedulerBlowupError(
            f"{total_schedulers} positional schedulers exceed the enumeration cap"
        )

    index = {u: i for i, u in enumerate(relevant)}
    values = []
    for choice in itertools.product(*(range(c) for c in choice_counts)):
        total = 0.0

        def walk(u: int, density: ExpPoly | None, weight: float):
            nonlocal total
            tr = model.steps(u)[choice[index[u]]]
            self_mass = tr.target[u]
            if self_mass == 1:
                return  # pure self-loop: this choice never leaves u
            exit_rate = float(tr.rate * (1 - self_mass))
            if density is None:
                arrived = ExpPoly.exponential_density(exit_rate)
            else:
                arrived = ep_convolve_exp(density, exit_rate)
            for t, p in tr.target.items:
                if t == u:
                    continue
                w = weight * float(p / (1 - self_mass))
                if t in rhs:
                    total += w * ep_integrate(arrived, interval)
                elif t in index:
                    walk(t, arrived, w)

        walk(s, None, 1.0)
        values.append(total)
    return ProbBounds(min(values), max(values), cls, True)


def csl_star_one_jump(
    model: Ctmdp,
    s: int,
    disjuncts: Sequence[tuple[TimeInterval, Iterable[int], Iterable[int]]],
) -> ProbBounds:
    """Bounds for a disjunction of untils that can only resolve on the first jump.

    Per transition (lam, mu) the value is the sum over disjuncts of
    mu(rhs_i) * P(sojourn in I_i): the first jump must land in ``rhs_i``
    inside ``I_i``.  Preconditions reject every shape where a later jump
    could still satisfy the formula.
    """
    grounded = [(interval, frozenset(l), frozenset(r)) for interval, l, r in disjuncts]
    if not grounded:
        return ProbBounds(0.0, 0.0, "vertex", True)
    for (_, _, a), (_, _, b) in itertools.combinations(grounded, 2):
        if a & b:
            raise EvaluationError("one-jump disjuncts need pairwise disjoint targets")
    all_lhs = frozenset().union(*(l for _, l, _ in grounded))
    all_rhs = frozenset().union(*(r for _, _, r in grounded))
    if all_lhs & all_rhs:
        raise UnsupportedRegionError("one-jump evaluation needs disjoint lhs and rhs sets")
    for interval, _, rset in grounded:
        if s in rset and interval.lower == 0:
            return ProbBounds(1.0, 1.0, "vertex", True)
    active = [(interval, rset) for interval, lset, rset in grounded if s in lset]
    succ = frozenset().union(*(tr.target.support for tr in model.steps(s)))
    for interval, lset, rset in grounded:
        if s in lset and succ & lset:
            raise UnsupportedRegionError(
                "a successor also satisfies the left-hand side; satisfaction is "
                "not confined to the first jump"
            )
    values = []
    for tr in model.steps(s):
        values.append(
            sum(
                float(tr.target.mass(rset)) * interval_mass(tr.rate, interval)
                for interval, rset in active
            )
        )
    return ProbBounds(min(values), max(values), "vertex", True)


def ground_bounds(model: Ctmdp, s: int, psi: GroundPath) -> ProbBounds:
    """Dispatch a grounded path formula to the matching bound computation."""
    if isinstance(psi, GroundState):
        v = 1.0 if s in psi.states else 0.0
        return ProbBounds(v, v, "vertex", True)
    if isinstance(psi, GroundNext) and isinstance(psi.sub, GroundState):
        return next_bounds(model, s, psi.interval, psi.sub.states)
    if isinstance(psi, GroundUntil) and isinstance(psi.lhs, GroundState) and isinstance(
        psi.rhs, GroundState
    ):
        return until_bounds_acyclic(model, s, psi.interval, psi.lhs.states, psi.rhs.states)
    if isinstance(psi, GroundOr):
        leaves = _flatten_or(psi)
        if all(isinstance(l, GroundNext) and isinstance(l.sub, GroundState) for l in leaves):
            return disjunctive_next_bounds(
                model, s, [(l.interval, l.sub.states) for l in leaves]
            )
        if all(
            isinstance(l, GroundUntil)
            and isinstance(l.lhs, GroundState)
            and isinstance(l.rhs, GroundState)
            for l in leaves
        ):
            return csl_star_one_jump(
                model, s, [(l.interval, l.lhs.states, l.rhs.states) for l in leaves]
            )
    raise UnsupportedPathFormula(
        "no closed-form evaluation for this path formula shape; "
        "use the Monte Carlo estimator instead"
    )


def path_bounds(model: Ctmdp, s: int, psi: PathFormula) -> ProbBounds:
    return ground_bounds(model, s, resolve_path(model, psi))


def _verdict(op: str, bounds: ProbBounds, threshold: Fraction) -> bool:
    p = float(threshold)
    value = bounds.upper if op in ("<", "<=") else bounds.lower
    if abs(value - p) < TOLERANCE and value != p:
        warnings.warn(
            f"bound {value!r} within 1e-9 of threshold {p!r}; verdict may be "
            "numerically fragile",
            PrecisionWarning,
            stacklevel=3,
        )
    if op == "<=":
        return value <= p
    if op == "<":
        return value < p
    if op == ">=":
        return value >= p
    return value > p


_SAT_CACHE: dict[tuple[int, StateFormula], tuple[Ctmdp, frozenset[int]]] = {}
_SAT_CACHE_LIMIT = 16384


def sat(model: Ctmdp, phi: StateFormula) -> frozenset[int]:
    """The set of states satisfying ``phi`` (recursive evaluation, memoized).

    Models are immutable and synthesized formulas re-evaluate the same
    sub-formulas heavily, so results are cached per model identity (the
    stored model reference guards against id reuse).
    """
    key = (id(model), phi)
    hit = _SAT_CACHE.get(key)
    if hit is not None and hit[0] is model:
        return hit[1]
    all_states = frozenset(model.state_ids)
    if isinstance(phi, Atom):
        result = frozenset(s for s in all_states if phi.name in model.labels_of(s))
    elif isinstance(phi, Not):
        result = all_states - sat(model, phi.sub)
    elif isinstance(phi, And):
        result = sat(model, phi.lhs) & sat(model, phi.rhs)
    elif isinstance(phi, Prob):
        ground = resolve_path(model, phi.path)
        result = frozenset(
            s for s in all_states if _verdict(phi.op, ground_bounds(model, s, ground), phi.bound)
        )
    else:
        raise FormulaError(f"unknown state formula node {phi!r}")
    if len(_SAT_CACHE) >= _SAT_CACHE_LIMIT:
        _SAT_CACHE.clear()
    _SAT_CACHE[key] = (model, result)
    return result


@dataclass(frozen=True)
class VerdictDifference:
    formula: StateFormula
    s_satisfies: bool
    r_satisfies: bool


def logical_equiv_check(
    model: Ctmdp, s: int, r: int, corpus: Sequence[StateFormula]
) -> list[VerdictDifference]:
    """Formulas from the corpus on which s and r disagree.

    An empty result is evidence (not proof) of logical equivalence over
    the corpus's fragment.
    """
    diffs = []
    for phi in corpus:
        sat_set = sat(model, phi)
        sv, rv = s in sat_set, r in sat_set
        if sv != rv:
            diffs.append(VerdictDifference(phi, sv, rv))
    return diffs
