import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slitvlc.errors import DomainError
from slitvlc.specfun import CROSSOVER, bessel_j0, bessel_y0, hankel0, hankel0_abs2

mpmath.mp.dps = 40

# (x, J0(x), Y0(x)) from mpmath at 40 digits
FROZEN = [
    (1e-6, 0.99999999999975, -8.8690314816594437029),
    (0.5, 0.93846980724081290423, -0.44451873350670655715),
    (1.0, 0.76519768655796655145, 0.088256964215676957983),
    (5.0, -0.17759677131433830435, -0.30851762524903378007),
    (12.0, 0.047689310796833536624, -0.22523731263436143369),
    (17.0, -0.16985425215118354791, -0.092637198442323692527),
    (17.000001, -0.16985415448260873563, -0.09263736564730853334),
    (30.0, -0.086367983581040211336, -0.11729573168666402525),
    (50.0, 0.055812327669251815005, -0.098064995470077079029),
]


@pytest.mark.parametrize("x, j0, y0", FROZEN)
def test_frozen_values(x, j0, y0):
    assert abs(bessel_j0(x) - j0) < 1e-14
    assert abs(bessel_y0(x) - y0) < 1e-14


def test_first_zero_of_j0():
    assert abs(bessel_j0(2.404825557695773)) < 1e-15


def test_against_mpmath_dense():
    rng = np.random.default_rng(7)
    xs = np.concatenate([10 ** rng.uniform(-6, math.log10(50), 400), np.linspace(0.1, 50, 200)])
    j, y = bessel_j0(xs), bessel_y0(xs)
    for x, jv, yv in zip(xs, j, y):
        assert abs(jv - float(mpmath.besselj(0, x))) < 1e-12
        assert abs(yv - float(mpmath.bessely(0, x))) < 1e-12


def test_abs2_against_mpmath():
    for x in (1e-4, 0.05, 0.1571, 3.0, 16.9, 18.0, 45.0):
        ref = mpmath.besselj(0, x) ** 2 + mpmath.bessely(0, x) ** 2
        assert hankel0_abs2(x) == pytest.approx(float(ref), rel=1e-13)


def test_scalar_in_scalar_out():
    assert isinstance(bessel_j0(1.0), float)
    assert isinstance(hankel0(1.0), complex)
    assert bessel_j0(np.array([1.0, 2.0])).shape == (2,)


def test_j0_at_zero_is_one():
    assert bessel_j0(0.0) == 1.0


@pytest.mark.parametrize("bad", [-1.0, math.nan, math.inf])
def test_domain_errors(bad):
    with pytest.raises(DomainError):
        bessel_y0(bad)
    with pytest.raises(DomainError):
        hankel0(bad)


def test_y0_rejects_zero():
    with pytest.raises(DomainError):
        bessel_y0(0.0)
    with pytest.raises(DomainError):
        hankel0_abs2(np.array([1.0, 0.0]))


def test_hankel_is_j_minus_jy():
    x = np.linspace(0.01, 40, 300)
    h = hankel0(x)
    assert np.allclose(h.real, bessel_j0(x), rtol=0, atol=1e-16)
    assert np.allclose(h.imag, -bessel_y0(x), rtol=0, atol=1e-16)


def test_continuity_across_crossover():
    below, above = np.nextafter(CROSSOVER, 0), np.nextafter(CROSSOVER, 100)
    assert abs(bessel_j0(below) - bessel_j0(above)) < 1e-14
    assert abs(bessel_y0(below) - bessel_y0(above)) < 1e-14


def _d(f, x, h):
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)


def wronskian_defect(x):
    """Relative defect of J0 Y0' - J0' Y0 = 2/(pi x), derivatives by a 5-point stencil."""
    h = 1e-3 * min(x, 1.0)
    w = bessel_j0(x) * _d(bessel_y0, x, h) - _d(bessel_j0, x, h) * bessel_y0(x)
    return abs(w * math.pi * x / 2 - 1)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-5, max_value=50.0))
def test_wronskian(x):
    assert wronskian_defect(x) < 1e-10


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-6, max_value=50.0))
def test_abs2_matches_components(x):
    j, y = bessel_j0(x), bessel_y0(x)
    assert hankel0_abs2(x) == pytest.approx(j * j + y * y, rel=1e-13)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=CROSSOVER + 1e-9, max_value=1e4))
def test_large_argument_envelope(x):
    # pi x |H0(x)|^2 / 2 = 1 - 1/(8x^2) + O(x^-4), approached from below
    ratio = hankel0_abs2(x) * math.pi * x / 2
    assert 1.0 - 1.0 / (8 * x * x) - 1e-15 < ratio < 1.0


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=0.0, max_value=50.0))
def test_j0_bounded(x):
    assert abs(bessel_j0(x)) <= 1.0


def series_oracle(x, terms=40):
    """Ascending series for J0 and Y0 in 50-digit arithmetic."""
    with mpmath.workdps(50):
        x = mpmath.mpf(x)
        q = -(x * x) / 4
        j = mpmath.mpf(0)
        tail = mpmath.mpf(0)
        term = mpmath.mpf(1)
        harmonic = mpmath.mpf(0)
        for k in range(terms):
            if k:
                term *= q / (k * k)
                harmonic += mpmath.mpf(1) / k
            j += term
            tail -= term * harmonic
        y = 2 / mpmath.pi * ((mpmath.log(x / 2) + mpmath.euler) * j + tail)
        return float(j), float(y)


@pytest.mark.parametrize("x", [0.3141592653589793, 0.31416, 1.7, 4.0])
def test_ascending_series_oracle(x):
    j, y = series_oracle(x)
    assert abs(bessel_j0(x) - j) < 1e-12
    assert abs(bessel_y0(x) - y) < 1e-12
    assert abs(hankel0_abs2(x) - (j * j + y * y)) < 1e-12


def test_first_zero_of_y0():
    assert abs(bessel_y0(0.8935769662791675)) < 1e-12


def test_y0_logarithmic_asymptote():
    x = 1e-6
    assert bessel_y0(x) < -8
    assert abs(bessel_y0(x) - 2 / math.pi * (math.log(x / 2) + 0.5772156649015329)) < 1e-6


def test_abs2_at_ten_near_envelope():
    assert hankel0_abs2(10.0) == pytest.approx(2 / (math.pi * 10.0), rel=0.02)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=1e-6, max_value=50.0))
def test_abs2_dominates_j0_squared(x):
    assert hankel0_abs2(x) >= bessel_j0(x) ** 2


def test_abs2_strictly_decreasing():
    x = np.linspace(1e-4, 50.0, 20001)
    assert np.all(np.diff(hankel0_abs2(x)) < 0)
