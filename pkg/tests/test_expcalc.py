import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctbisim.expcalc import (
    DivergentIntegralError,
    ExpPoly,
    TimeInterval,
    ep_add,
    ep_convolve_exp,
    ep_integrate,
    ep_mul_exp,
    interval_mass,
)

coeffs = st.floats(min_value=-5, max_value=5, allow_nan=False)
powers = st.integers(min_value=0, max_value=3)
decays = st.sampled_from([0.5, 1.0, 2.0, 3.0])
terms = st.tuples(coeffs, powers, decays)
polys = st.lists(terms, min_size=0, max_size=4).map(ExpPoly.of)


def test_interval_rejects_bad_bounds():
    with pytest.raises(ValueError):
        TimeInterval(-0.1, 1.0)
    with pytest.raises(ValueError):
        TimeInterval(2.0, 1.0)
    with pytest.raises(ValueError):
        TimeInterval(math.inf, math.inf)
    assert TimeInterval(0.0, math.inf).unbounded


def test_ep_add_cancels_to_zero():
    a = ExpPoly.of([(1.0, 0, 1.0)])
    b = ExpPoly.of([(-1.0, 0, 1.0)])
    assert ep_add(a, b) == ExpPoly.zero()


def test_ep_add_keeps_distinct_terms():
    a = ExpPoly.of([(1.0, 0, 1.0)])
    b = ExpPoly.of([(1.0, 1, 1.0)])
    assert len(ep_add(a, b).terms) == 2


@given(polys, polys, st.floats(min_value=0, max_value=4, allow_nan=False))
def test_ep_add_pointwise(a, b, t):
    direct = sum(c * t**k * math.exp(-d * t) for c, k, d in a.terms + b.terms)
    assert ep_add(a, b)(t) == pytest.approx(direct, abs=1e-9)


def test_ep_mul_exp_shifts():
    e = ExpPoly.of([(1.0, 0, 1.0)])
    assert ep_mul_exp(e, 1.0).terms == ((1.0, 0, 2.0),)
    one = ExpPoly.constant(1.0)
    assert ep_mul_exp(one, 0.0, 1).terms == ((1.0, 1, 0.0),)


@given(polys, st.sampled_from([0.0, 0.5, 1.5]), st.integers(0, 2), st.floats(0, 3, allow_nan=False))
def test_ep_mul_exp_pointwise(a, decay, shift, t):
    shifted = ep_mul_exp(a, decay, shift)
    assert shifted(t) == pytest.approx(a(t) * t**shift * math.exp(-decay * t), abs=1e-9)


def test_exponential_density_integrates_to_one():
    for rate in (F(3), F(1, 2)):
        d = ExpPoly.exponential_density(rate)
        assert ep_integrate(d, TimeInterval(0.0, math.inf)) == pytest.approx(1.0, abs=1e-12)


def test_integral_of_rate2_density_over_window():
    d = ExpPoly.exponential_density(2)
    got = ep_integrate(d, TimeInterval(0.2, 1.0))
    assert got == pytest.approx(math.exp(-0.4) - math.exp(-2.0), rel=1e-12)


def test_integral_of_t_exp_minus_t():
    # integral_0^1 t*e^-t dt = 1 - 2/e
    p = ExpPoly.of([(1.0, 1, 1.0)])
    got = ep_integrate(p, TimeInterval(0.0, 1.0))
    assert got == pytest.approx(1.0 - 2.0 * math.exp(-1.0), rel=1e-12)


def test_divergent_integral_raises():
    with pytest.raises(DivergentIntegralError):
        ep_integrate(ExpPoly.constant(1.0), TimeInterval(0.0, math.inf))


@given(polys, st.floats(0, 2, allow_nan=False), st.floats(0, 2, allow_nan=False), st.floats(0, 2, allow_nan=False))
def test_integral_splits_additively(a, x, dy, dz):
    y, z = x + dy, x + dy + dz
    whole = ep_integrate(a, TimeInterval(x, z))
    parts = ep_integrate(a, TimeInterval(x, y)) + ep_integrate(a, TimeInterval(y, z))
    assert whole == pytest.approx(parts, abs=1e-12)


@given(st.sampled_from([F(1), F(2), F(4), F(1, 2)]), st.floats(0, 3, allow_nan=False), st.floats(0, 3, allow_nan=False))
def test_interval_mass_matches_density_integral(rate, a, db):
    interval = TimeInterval(a, a + db)
    direct = ep_integrate(ExpPoly.exponential_density(rate), interval)
    assert interval_mass(rate, interval) == pytest.approx(direct, abs=1e-12)


def test_interval_mass_worked_values():
    window = TimeInterval(0.2, 1.0)
    assert interval_mass(F(1), window) == pytest.approx(math.exp(-0.2) - math.exp(-1), rel=1e-12)
    assert interval_mass(F(4), window) == pytest.approx(math.exp(-0.8) - math.exp(-4), rel=1e-12)
    assert interval_mass(F(5), TimeInterval(0.0, math.inf)) == 1.0


@settings(max_examples=200)
@given(polys, decays, st.floats(0.1, 4, allow_nan=False))
def test_convolution_against_quadrature(a, rate, t):
    """Independent oracle: compare the closed-form convolution with direct
    numerical quadrature of integral_0^t a(u) * rate * e^(-rate(t-u)) du."""
    conv = ep_convolve_exp(a, rate)
    n = 4000
    h = t / n
    acc = 0.0
    for i in range(n + 1):
        u = i * h
        w = 1.0 if 0 < i < n else 0.5
        acc += w * a(u) * rate * math.exp(-rate * (t - u))
    acc *= h
    assert conv(t) == pytest.approx(acc, abs=5e-4)


@settings(max_examples=120)
@given(polys, st.floats(0, 2, allow_nan=False), st.floats(0.05, 3, allow_nan=False))
def test_ep_integrate_against_quadrature(a, lo, width):
    hi = lo + width
    n = 6000
    h = (hi - lo) / n
    acc = 0.0
    for i in range(n + 1):
        t = lo + i * h
        w = 1.0 if 0 < i < n else 0.5
        acc += w * a(t)
    acc *= h
    assert ep_integrate(a, TimeInterval(lo, hi)) == pytest.approx(acc, abs=1e-4)
