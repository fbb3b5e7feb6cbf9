"""Uniformization: give every transition a common exit rate by adding self-loop mass."""

from __future__ import annotations

from fractions import Fraction

from .model import Ctmdp, Distribution, ModelError, Transition


def uniformization_rate(model: Ctmdp) -> Fraction:
    """Default common rate: the maximum rate appearing in the model.

    Any override greater or equal to this maximum is acceptable; the default
    minimizes the added self-loop mass.
    """
    return model.max_rate()


def uniformize(model: Ctmdp, rate: Fraction | int | str | None = None) -> Ctmdp:
    """Bijective state copy in which every transition has exit rate ``rate``.

    A source transition (s, lam, mu) becomes (s, rate, mu') with
    mu'(r) = (lam/rate) * mu(r) for r != s and the remaining mass
    (1 - lam/rate) + (lam/rate) * mu(s) kept on s.  Labels are preserved.
    The result carries provenance back to the source state ids.
    """
    max_rate = uniformization_rate(model)
    e = max_rate if rate is None else Fraction(rate)
    if e < max_rate:
        raise ModelError(f"uniformization rate {e} is below the maximum model rate {max_rate}")
    out: list[Transition] = []
    seen: set[tuple[int, Fraction, tuple]] = set()
    for tr in model.transitions:
        scale = tr.rate / e
        masses = {s: scale * p for s, p in tr.target.items}
        masses[tr.source] = masses.get(tr.source, Fraction(0)) + (1 - scale)
        target = Distribution.of(masses)
        key = (tr.source, e, target.items)
        if key in seen:
            continue  # distinct source transitions can uniformize identically
        seen.add(key)
        out.append(Transition(tr.source, e, target))
    return Ctmdp(
        states=model.states,
        ap=model.ap,
        transitions=tuple(out),
        initial=model.initial,
        provenance={s.id: s.id for s in model.states},
    )
