"""Strong and weak bisimilarity for CTMDPs via partition refinement.

The transfer condition matches each transition of a state against the
convex hull of the same-rate transitions of its partner (a combined
transition = randomized choice among equal-rate transitions), decided in
exact rational arithmetic.  Weak bisimilarity is strong bisimilarity on
the uniformized model, pulled back to the original state ids.

Also provides the quotient construction, the dedicated CTMC
specializations, and synthesis of distinguishing formulas for
non-bisimilar state pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import logic
from .expcalc import TimeInterval
from .model import (
    Ctmdp,
    Distribution,
    ModelError,
    Partition,
    Transition,
    is_ctmc,
    partition_by_labels,
)
from .rational_lp import convex_combination, separating_certificate
from .uniformize import uniformize


class BisimilarStatesError(ValueError):
    """distinguish() was asked to separate states that are bisimilar."""


class DistinguishError(RuntimeError):
    """No synthesized candidate formula survived evaluator verification."""


@dataclass(frozen=True)
class LiftedDistribution:
    """A distribution aggregated to partition blocks: masses[i] = mu(block i)."""

    masses: tuple[Fraction, ...]

    def __post_init__(self):
        if sum(self.masses, Fraction(0)) != 1:
            raise ModelError("lifted distribution must sum to 1")


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of a convex-combination membership query.

    ``weights`` maps candidate index -> weight of an exact convex
    combination reproducing the target (present iff feasible).
    ``certificate`` is a Farkas vector over blocks strictly separating the
    target from every candidate (present iff infeasible).
    """

    feasible: bool
    weights: dict[int, Fraction] | None = None
    certificate: tuple[Fraction, ...] | None = None


def lift(dist: Distribution, part: Partition) -> LiftedDistribution:
    masses = [Fraction(0)] * len(part)
    for s, p in dist.items:
        masses[part.block_of(s)] += p
    return LiftedDistribution(tuple(masses))


def _vec(v) -> tuple[Fraction, ...]:
    return v.masses if isinstance(v, LiftedDistribution) else tuple(Fraction(x) for x in v)


def combined_match(candidates, target) -> FeasibilityResult:
    """Is the target lifted distribution a convex combination of the candidates?

    Candidates must all be lifted over the same partition and (by the
    caller) restricted to a single rate.  Exact verdict; on infeasibility
    the certificate rho satisfies rho.target > rho.candidate for every
    candidate.
    """
    cand_vecs = [_vec(c) for c in candidates]
    tgt = _vec(target)
    if not cand_vecs:
        raise ValueError("need at least one candidate")
    if any(len(c) != len(tgt) for c in cand_vecs):
        raise ValueError("lifted distributions have mismatched dimensions")
    if tgt in cand_vecs:
        weights = {i: Fraction(0) for i in range(len(cand_vecs))}
        weights[cand_vecs.index(tgt)] = Fraction(1)
        return FeasibilityResult(True, weights=weights)
    weights = convex_combination(cand_vecs, tgt)
    if weights is not None:
        return FeasibilityResult(True, weights={i: w for i, w in enumerate(weights)})
    return FeasibilityResult(False, certificate=separating_certificate(cand_vecs, tgt))


# ---------------------------------------------------------------------------
# Partition refinement


def _lift_vec(dist: Distribution, block_of: dict[int, int], pos: dict[int, int], dim: int):
    masses = [Fraction(0)] * dim
    for s, p in dist.items:
        masses[pos[block_of[s]]] += p
    return tuple(masses)


def _matches(model: Ctmdp, block_of, pos, dim, challenger: int, defender: int) -> bool:
    """Every transition of challenger has a same-rate combined match from defender."""
    by_rate: dict[Fraction, list[Transition]] = {}
    for tr in model.steps(defender):
        by_rate.setdefault(tr.rate, []).append(tr)
    for tr in model.steps(challenger):
        cands = by_rate.get(tr.rate)
        if not cands:
            return False
        tgt = _lift_vec(tr.target, block_of, pos, dim)
        cand_vecs = [_lift_vec(c.target, block_of, pos, dim) for c in cands]
        if tgt in cand_vecs:
            continue
        if convex_combination(cand_vecs, tgt) is None:
            return False
    return True


def strong_bisimilarity(model: Ctmdp) -> Partition:
    """Coarsest strong bisimulation: label-uniform blocks, stable under the
    combined-transition transfer condition in both directions.

    Refinement starts from the label partition; a block is re-checked only
    when a block holding successors of its members was split (dirty flag).
    Blocks are processed in ascending minimum-state-id order, so the result
    is deterministic.
    """
    pred: dict[int, set[int]] = {s: set() for s in model.state_ids}
    for tr in model.transitions:
        for t in tr.target.support:
            pred[t].add(tr.source)

    blocks: dict[int, list[int]] = {}
    block_of: dict[int, int] = {}
    for i, block in enumerate(partition_by_labels(model).blocks):
        blocks[i] = sorted(block)
        for s in block:
            block_of[s] = i
    next_bid = len(blocks)
    dirty = set(blocks)

    while dirty:
        bid = min(dirty, key=lambda b: blocks[b][0])
        dirty.discard(bid)
        members = blocks[bid]
        if len(members) == 1:
            continue
        pos = {b: j for j, b in enumerate(sorted(blocks))}
        dim = len(blocks)
        # Group members by mutual matching against earlier representatives;
        # directional matching is transitive for a fixed partition, so this
        # grouping is well defined.
        groups: list[list[int]] = []
        for s in members:
            for group in groups:
                rep = group[0]
                if _matches(model, block_of, pos, dim, s, rep) and _matches(
                    model, block_of, pos, dim, rep, s
                ):
                    group.append(s)
                    break
            else:
                groups.append([s])
        if len(groups) == 1:
            continue
        del blocks[bid]
        new_ids = []
        for group in groups:
            blocks[next_bid] = group
            for s in group:
                block_of[s] = next_bid
            new_ids.append(next_bid)
            next_bid += 1
        dirty.update(new_ids)
        for s in members:
            for p in pred[s]:
                dirty.add(block_of[p])
    return Partition.from_blocks(blocks.values())


def is_strong_bisimulation(model: Ctmdp, part: Partition) -> bool:
    """Check that ``part`` is label-uniform and satisfies the transfer condition."""
    if part.covered_states() != frozenset(model.state_ids):
        return False
    pos = {b: b for b in range(len(part))}
    block_of = dict(part.index)
    dim = len(part)
    for block in part.blocks:
        members = sorted(block)
        rep = members[0]
        if any(model.labels_of(s) != model.labels_of(rep) for s in members):
            return False
        for s in members[1:]:
            if not _matches(model, block_of, pos, dim, s, rep):
                return False
            if not _matches(model, block_of, pos, dim, rep, s):
                return False
    return True


def weak_bisimilarity(model: Ctmdp, rate=None) -> Partition:
    """Strong bisimilarity of the uniformized model, pulled back to source ids."""
    uni = uniformize(model, rate)
    part = strong_bisimilarity(uni)
    prov = uni.provenance or {s: s for s in uni.state_ids}
    return Partition.from_blocks([{prov[s] for s in block} for block in part.blocks])


def quotient(model: Ctmdp, part: Partition) -> Ctmdp:
    """Model with one state per block (representative transitions, lifted targets).

    ``part`` must be a strong bisimulation refining the label partition;
    otherwise the quotient would not preserve behaviour and this raises.
    """
    if not is_strong_bisimulation(model, part):
        raise ModelError("partition is not a label-uniform strong bisimulation")
    from .model import State  # local import keeps module top uncluttered

    states = []
    for i, block in enumerate(part.blocks):
        rep = min(block)
        states.append(State(i, tuple(sorted(model.labels_of(rep)))))
    transitions: list[Transition] = []
    seen = set()
    for i, block in enumerate(part.blocks):
        rep = min(block)
        for tr in model.steps(rep):
            lifted = lift(tr.target, part)
            target = Distribution.of(
                {j: m for j, m in enumerate(lifted.masses) if m != 0}
            )
            key = (i, tr.rate, target.items)
            if key in seen:
                continue
            seen.add(key)
            transitions.append(Transition(i, tr.rate, target))
    return Ctmdp(
        states=tuple(states),
        ap=model.ap,
        transitions=tuple(transitions),
        initial=part.block_of(model.initial),
        provenance={i: min(block) for i, block in enumerate(part.blocks)},
    )


# ---------------------------------------------------------------------------
# CTMC specializations


def _ctmc_refine(model: Ctmdp, include_own_block: bool) -> Partition:
    if not is_ctmc(model):
        raise ModelError("model is not a CTMC (some state has several transitions)")
    blocks = [sorted(b) for b in partition_by_labels(model).blocks]
    while True:
        index = {}
        for i, b in enumerate(blocks):
            for s in b:
                index[s] = i
        new_blocks: list[list[int]] = []
        changed = False
        for i, members in enumerate(blocks):
            sigs: dict[tuple, list[int]] = {}
            for s in members:
                tr = model.steps(s)[0]
                sig = tuple(
                    tr.rate * tr.target.mass(blocks[j])
                    for j in range(len(blocks))
                    if include_own_block or j != i
                )
                sigs.setdefault(sig, []).append(s)
            parts = [sigs[k] for k in sorted(sigs, key=lambda k: sigs[k][0])]
            if len(parts) > 1:
                changed = True
            new_blocks.extend(parts)
        blocks = new_blocks
        if not changed:
            return Partition.from_blocks(blocks)


def ctmc_strong(model: Ctmdp) -> Partition:
    """Coarsest label-uniform partition with lam_s*mu_s(C) = lam_r*mu_r(C) for all C."""
    return _ctmc_refine(model, include_own_block=True)


def ctmc_weak(model: Ctmdp) -> Partition:
    """As :func:`ctmc_strong` but the condition is waived on the states' own block."""
    return _ctmc_refine(model, include_own_block=False)


# ---------------------------------------------------------------------------
# Distinguishing-formula synthesis


@dataclass(frozen=True)
class DistinguishResult:
    formula: "logic.StateFormula"
    satisfied_by: int
    refuted_by: int


class _CharacterizationCycle(Exception):
    """Recursive block characterization revisited a pair still in progress."""


class _Synthesis:
    """Shared state for formula synthesis over one (model, partition) pair.

    Distinguishing results (including definitive failures) and
    block-characterizing formulas are memoized here, so repeated and
    recursive queries against the same partition stay polynomial.
    """

    def __init__(self, model: Ctmdp, part: Partition):
        self.model = model
        self.part = part
        self.pairs: dict[tuple[int, int], DistinguishResult | DistinguishError] = {}
        self.block_formulas: dict[int, "logic.StateFormula"] = {}
        self.stack: set[tuple[int, int]] = set()


_SYNTH_CACHE: dict[tuple[int, int], _Synthesis] = {}
_SYNTH_CACHE_LIMIT = 64


def _synthesis_for(model: Ctmdp, part: Partition) -> _Synthesis:
    key = (id(model), id(part))
    hit = _SYNTH_CACHE.get(key)
    if hit is not None and hit.model is model and hit.part is part:
        return hit
    if len(_SYNTH_CACHE) >= _SYNTH_CACHE_LIMIT:
        _SYNTH_CACHE.clear()
    ctx = _Synthesis(model, part)
    _SYNTH_CACHE[key] = ctx
    return ctx


def _exact_label_formula(model: Ctmdp, labels: frozenset[str]):
    """State formula satisfied exactly by the states carrying this label set."""
    parts = [logic.Atom(a) for a in sorted(labels)]
    parts += [logic.Not(logic.Atom(a)) for a in sorted(set(model.ap) - labels)]
    if not parts:
        raise ModelError("empty atomic-proposition universe")
    formula = parts[0]
    for p in parts[1:]:
        formula = logic.And(formula, p)
    return formula


def _or_state(formulas):
    out = formulas[0]
    for f in formulas[1:]:
        out = logic.Not(logic.And(logic.Not(out), logic.Not(f)))
    return out


def _block_formula(ctx: _Synthesis, bid: int):
    """State formula whose satisfaction set is exactly block ``bid``.

    The label formula isolates the block among differently-labelled states;
    same-label sibling blocks are excluded by recursively synthesized
    distinguishing formulas (bisimilar states share verdicts, so excluding
    a sibling's representative excludes the whole sibling block).
    """
    cached = ctx.block_formulas.get(bid)
    if cached is not None:
        return cached
    model, part = ctx.model, ctx.part
    rep = min(part.block_states(bid))
    labels = model.labels_of(rep)
    formula = _exact_label_formula(model, labels)
    for other in range(len(part)):
        if other == bid:
            continue
        other_rep = min(part.block_states(other))
        if model.labels_of(other_rep) != labels:
            continue
        separated = _distinguish(ctx, rep, other_rep)
        piece = separated.formula
        if separated.satisfied_by != rep:
            piece = logic.Not(piece)
        formula = logic.And(formula, piece)
    ctx.block_formulas[bid] = formula
    return formula


def _blocks_formula(ctx: _Synthesis, bids):
    return _or_state([_block_formula(ctx, b) for b in sorted(bids)])


def _as_threshold(value: float) -> Fraction:
    frac = Fraction(value).limit_denominator(10**9)
    return min(max(frac, Fraction(0)), Fraction(1))


def _try_candidate(model: Ctmdp, psi, x: int, y: int) -> DistinguishResult | None:
    """Turn a path formula into a threshold formula separating x and y, if any."""
    try:
        ground = logic.resolve_path(model, psi)
        bx = logic.ground_bounds(model, x, ground)
        by = logic.ground_bounds(model, y, ground)
    except logic.EvaluationError:
        return None
    for attr, op in (("upper", "<="), ("lower", ">=")):
        vx, vy = getattr(bx, attr), getattr(by, attr)
        if abs(vx - vy) <= 1e-9:
            continue
        p = _as_threshold((vx + vy) / 2.0)
        formula = logic.Prob(op, p, psi)
        sat_set = logic.sat(model, formula)
        if (x in sat_set) != (y in sat_set):
            good = x if x in sat_set else y
            bad = y if good == x else x
            return DistinguishResult(formula, satisfied_by=good, refuted_by=bad)
    return None


def _candidate_certificates(cand_vecs, tgt_vec):
    """Separating vectors to try, sparsest first (lazily).

    Single-coordinate certificates keep the disjunction small and avoid
    recursive block characterizations; the LP's Farkas certificate is the
    complete fallback and is only computed when needed.
    """
    dim = len(tgt_vec)
    for i in range(dim):
        for sign in (Fraction(1), Fraction(-1)):
            t_val = sign * tgt_vec[i]
            if all(t_val > sign * c[i] for c in cand_vecs):
                yield tuple(sign if j == i else Fraction(0) for j in range(dim))
    yield separating_certificate(cand_vecs, tgt_vec)


def _rate_case_intervals(rate: Fraction, other_rates) -> list[TimeInterval]:
    """Candidate intervals making ``rate`` the most likely to land inside.

    Cases: above all competitors -> prefixes [0,b]; below all -> tails
    [a,inf); in between -> [a,b] tuned so that rate = ln(b/a)/(b-a), the
    unique maximizer of e^(-ra) - e^(-rb) over r.
    """
    import math

    lam = float(rate)
    if not other_rates:
        return [TimeInterval(0.0, math.inf), TimeInterval(0.0, 1.0 / lam)]
    lo, hi = min(other_rates), max(other_rates)
    if rate > hi:
        return [TimeInterval(0.0, c / lam) for c in (1, 2, 4, 8, 16, 32, 64)]
    if rate < lo:
        return [TimeInterval(c / lam, math.inf) for c in (1.0, 0.5, 0.25, 0.1, 0.05, 0.01)]
    out = []
    for k in (2.0, 3.0, 5.0, 10.0):
        a = math.log(k) / (lam * (k - 1.0))
        out.append(TimeInterval(a, k * a))
    return out


def _certificate_clauses(ctx: _Synthesis, rate, blocks_used, weights):
    """Disjunction of nexts whose interval masses realize ``weights`` at ``rate``."""
    import math

    lam = float(rate)
    clauses = []
    for bid, w in zip(blocks_used, weights):
        if w <= 0:
            continue
        phi = _block_formula(ctx, bid)
        b = -math.log(1.0 - w) / lam
        clauses.append(logic.Next(TimeInterval(0.0, b), logic.StateP(phi)))
    if not clauses:
        return None
    psi = clauses[0]
    for c in clauses[1:]:
        psi = logic.OrP(psi, c)
    return psi


def _distinguish(ctx: _Synthesis, s: int, r: int) -> DistinguishResult:
    key = (min(s, r), max(s, r))
    cached = ctx.pairs.get(key)
    if isinstance(cached, DistinguishResult):
        return cached
    if cached is not None:
        raise cached
    if key in ctx.stack:
        raise _CharacterizationCycle(key)
    ctx.stack.add(key)
    try:
        try:
            result = _distinguish_impl(ctx, s, r)
        except DistinguishError as exc:
            if not getattr(exc, "provisional", False):
                ctx.pairs[key] = exc  # definitive failure, do not retry
            raise
        ctx.pairs[key] = result
        return result
    finally:
        ctx.stack.discard(key)


def _distinguish_impl(ctx: _Synthesis, s: int, r: int) -> DistinguishResult:
    model, part = ctx.model, ctx.part
    ls, lr = model.labels_of(s), model.labels_of(r)
    if ls != lr:
        atom = sorted(ls ^ lr)[0]
        # Chosen so that s satisfies it: the bare atom if s carries it,
        # its negation if only r does.
        formula = logic.Atom(atom) if atom in ls else logic.Not(logic.Atom(atom))
        return DistinguishResult(formula, satisfied_by=s, refuted_by=r)

    provisional = False
    for x, y in ((s, r), (r, s)):
        for tr in model.steps(x):
            cands = [t for t in model.steps(y) if t.rate == tr.rate]
            if cands:
                tgt = lift(tr.target, part)
                cand_lifted = [lift(c.target, part) for c in cands]
                result = combined_match(cand_lifted, tgt)
                if result.feasible:
                    continue
                support = set(tr.target.support)
                for c in cands:
                    support |= c.target.support
                blocks_used = sorted({part.block_of(st) for st in support})

                def proj(v):
                    return tuple(v.masses[b] for b in blocks_used)

                for rho in _candidate_certificates([proj(c) for c in cand_lifted], proj(tgt)):
                    shifted = [v - min(rho) for v in rho]
                    top = max(shifted)
                    if top == 0:
                        continue
                    for sigma in (0.5, 0.9, 0.25, 0.05):
                        weights = [float(v) * sigma / float(top) for v in shifted]
                        try:
                            psi = _certificate_clauses(ctx, tr.rate, blocks_used, weights)
                        except _CharacterizationCycle:
                            provisional = True
                            break  # this certificate's blocks are out of reach now
                        except DistinguishError as exc:
                            provisional |= bool(getattr(exc, "provisional", False))
                            break
                        if psi is None:
                            continue
                        found = _try_candidate(model, psi, x, y)
                        if found:
                            return found
            else:
                closed_blocks = {part.block_of(st) for st in tr.target.support}
                closed = set()
                for b in closed_blocks:
                    closed |= part.block_states(b)
                other_rates = sorted(
                    {float(t.rate) for t in model.steps(y) if t.target.mass(closed) == 1}
                )
                try:
                    phi = _blocks_formula(ctx, closed_blocks)
                except _CharacterizationCycle:
                    provisional = True
                    continue
                except DistinguishError as exc:
                    provisional |= bool(getattr(exc, "provisional", False))
                    continue
                for interval in _rate_case_intervals(tr.rate, other_rates):
                    psi = logic.Next(interval, logic.StateP(phi))
                    found = _try_candidate(model, psi, x, y)
                    if found:
                        return found
    error = DistinguishError(
        f"no verified distinguishing formula found for states {s} and {r}"
    )
    error.provisional = provisional
    raise error


def distinguish(model: Ctmdp, s: int, r: int, part: Partition | None = None) -> DistinguishResult:
    """Synthesize a disjunctive-next formula separating two non-bisimilar states.

    Construction: (i) a label difference yields an atomic formula; (ii) a
    rate mismatch toward a block-closed target set yields a single next
    with a rate-separating interval; (iii) a same-rate convex-hull failure
    yields a disjunction of nexts realizing a separating certificate as
    interval masses.  Target sets are expressed by block-characterizing
    state formulas (label constraints plus recursively synthesized
    probability operators), and every candidate is verified by the
    evaluator before being returned.
    """
    part = part if part is not None else strong_bisimilarity(model)
    if part.same_block(s, r):
        raise BisimilarStatesError(f"states {s} and {r} are strong bisimilar")
    ctx = _synthesis_for(model, part)
    try:
        return _distinguish(ctx, s, r)
    except _CharacterizationCycle as exc:  # pragma: no cover - defensive
        raise DistinguishError(
            f"block characterization cycled while separating {s} and {r}"
        ) from exc
