"""Calculus of exponential polynomials sum(c * t^k * exp(-decay*t)).

This closed family carries every jump-time integral the evaluator needs:
exponential sojourn densities, their convolutions (Erlang-like terms with
polynomial factors), and definite integrals over closed time intervals.

Coefficients and decays are binary floats by design; exactness lives in the
model layer, the analysis layer documents a 1e-9 tolerance.  Terms with
bit-identical (power, decay) are merged; decays originate from rational
rates converted once, so bit equality is the right merge criterion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable


class DivergentIntegralError(ArithmeticError):
    """Integral over an unbounded interval of a non-decaying term."""


@dataclass(frozen=True)
class TimeInterval:
    """Closed, non-empty time interval [lower, upper]; upper may be math.inf."""

    lower: float
    upper: float

    def __post_init__(self):
        if math.isinf(self.lower) or self.lower < 0:
            raise ValueError(f"interval lower bound must be finite and >= 0, got {self.lower}")
        if self.upper < self.lower:
            raise ValueError(f"empty interval [{self.lower}, {self.upper}]")

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.upper)

    def contains(self, t: float) -> bool:
        return self.lower <= t <= self.upper

    def shifted(self, dt: float) -> "TimeInterval":
        return TimeInterval(max(0.0, self.lower - dt), self.upper - dt)


@dataclass(frozen=True)
class ExpPoly:
    """Canonical term list ((coeff, power, decay), ...): sum c * t^power * e^(-decay*t)."""

    terms: tuple[tuple[float, int, float], ...]

    @classmethod
    def of(cls, terms: Iterable[tuple[float, int, float]]) -> "ExpPoly":
        merged: dict[tuple[int, float], float] = {}
        for coeff, power, decay in terms:
            if power < 0:
                raise ValueError("powers must be non-negative integers")
            if decay < 0:
                raise ValueError("decays must be non-negative")
            key = (int(power), float(decay))
            merged[key] = merged.get(key, 0.0) + float(coeff)
        canon = tuple(
            (c, k, d)
            for (k, d), c in sorted(merged.items(), key=lambda kv: (kv[0][1], kv[0][0]))
            if c != 0.0
        )
        return cls(canon)

    @classmethod
    def zero(cls) -> "ExpPoly":
        return cls(())

    @classmethod
    def constant(cls, value: float) -> "ExpPoly":
        return cls.of([(value, 0, 0.0)])

    @classmethod
    def exponential_density(cls, rate) -> "ExpPoly":
        """Density rate * e^(-rate*t) of an exponential sojourn time."""
        r = float(rate)
        if r <= 0:
            raise ValueError("rate must be positive")
        return cls.of([(r, 0, r)])

    def __call__(self, t: float) -> float:
        return sum(c * t**k * math.exp(-d * t) for c, k, d in self.terms)


def ep_add(a: ExpPoly, b: ExpPoly) -> ExpPoly:
    return ExpPoly.of(a.terms + b.terms)


def ep_scale(a: ExpPoly, factor: float) -> ExpPoly:
    return ExpPoly.of((c * factor, k, d) for c, k, d in a.terms)


def ep_mul_exp(a: ExpPoly, decay: float, power_shift: int = 0) -> ExpPoly:
    """Multiply by t^power_shift * e^(-decay*t): shifts every term's exponent pair."""
    if power_shift < 0:
        raise ValueError("power_shift must be >= 0")
    return ExpPoly.of((c, k + power_shift, d + decay) for c, k, d in a.terms)


def _antiderivative_at(coeff: float, power: int, decay: float, t: float) -> float:
    # F with F' = coeff * t^power * e^(-decay*t); decay > 0 here.
    # F(t) = -coeff * e^(-decay*t) * sum_{i<=power} (power!/i!) * t^i / decay^(power-i+1)
    acc = 0.0
    fact = math.factorial(power)
    for i in range(power + 1):
        acc += (fact / math.factorial(i)) * t**i / decay ** (power - i + 1)
    return -coeff * math.exp(-decay * t) * acc


def ep_integrate(a: ExpPoly, over: TimeInterval) -> float:
    """Definite integral of ``a`` over ``over`` via closed-form antiderivatives."""
    total = 0.0
    for coeff, power, decay in a.terms:
        if decay == 0.0:
            if over.unbounded:
                raise DivergentIntegralError(
                    f"term {coeff}*t^{power} has no decay; integral over "
                    f"[{over.lower}, inf) diverges"
                )
            total += coeff * (over.upper ** (power + 1) - over.lower ** (power + 1)) / (power + 1)
            continue
        upper_val = 0.0 if over.unbounded else _antiderivative_at(coeff, power, decay, over.upper)
        total += upper_val - _antiderivative_at(coeff, power, decay, over.lower)
    return total


def interval_mass(rate: Fraction | float, over: TimeInterval) -> float:
    """P(Exp(rate) lands in ``over``) = e^(-rate*lower) - e^(-rate*upper)."""
    r = float(rate)
    if r <= 0:
        raise ValueError("rate must be positive")
    low = math.exp(-r * over.lower)
    if over.unbounded:
        return low
    return low - math.exp(-r * over.upper)


def ep_convolve_exp(a: ExpPoly, rate: float) -> ExpPoly:
    """Convolution of density ``a`` (supported on [0, inf)) with Exp(rate).

    g(T) = integral_0^T a(t) * rate * e^(-rate*(T-t)) dt, the density of the
    sum of an ``a``-distributed arrival time and an independent exponential
    sojourn; the workhorse behind jump-sequence probabilities.
    """
    r = float(rate)
    if r <= 0:
        raise ValueError("rate must be positive")
    out: list[tuple[float, int, float]] = []
    for coeff, power, decay in a.terms:
        alpha = decay - r
        if alpha == 0.0:
            # integral_0^T t^k dt = T^(k+1)/(k+1)
            out.append((coeff * r / (power + 1), power + 1, r))
            continue
        # integral_0^T t^k e^(-alpha t) dt
        #   = k!/alpha^(k+1) - e^(-alpha T) * sum_{i<=k} (k!/i!) T^i / alpha^(k-i+1)
        fact = math.factorial(power)
        out.append((coeff * r * fact / alpha ** (power + 1), 0, r))
        for i in range(power + 1):
            out.append((-coeff * r * (fact / math.factorial(i)) / alpha ** (power - i + 1), i, decay))
    return ExpPoly.of(out)
