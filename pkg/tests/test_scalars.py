import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from sympy import QQ_I

from qrgsquare.scalars import (
    EXACT,
    FLOAT,
    InvalidInput,
    RegimeMismatch,
    Regime,
    approx_equal,
    exact,
    make_phase,
    real_part,
    to_complex,
)

from conftest import gaussian


def test_phase_examples():
    assert make_phase(0).value == 1
    assert abs(make_phase(math.pi).value - (-1)) < 1e-15
    q = make_phase(math.pi / 2).value
    assert abs(q - 1j) < 1e-15
    assert abs(abs(q) - 1) < 1e-15


def test_phase_exact_routes_zero_and_pi():
    assert make_phase(0, EXACT).exact
    assert make_phase(0, EXACT).value == exact(1)
    assert make_phase(math.pi, EXACT).value == exact(-1)
    assert make_phase(3 * math.pi, EXACT).value == exact(-1)
    assert not make_phase(1.0, EXACT).exact


@pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan, "x"])
def test_phase_rejects_nonfinite(bad):
    with pytest.raises(InvalidInput):
        make_phase(bad)


@given(st.floats(min_value=-100, max_value=100))
def test_phase_times_inverse_is_one(theta):
    p = make_phase(theta)
    assert abs(complex(p) * complex(p.inverse()) - 1) < 1e-9
    assert abs(abs(complex(p)) - 1) < 1e-12


def test_approx_equal_examples():
    assert approx_equal(exact(Fraction(1, 2)), exact(Fraction(1, 2)))
    assert approx_equal(1.0, 1.0 + 1e-12, tol=1e-9)
    assert not approx_equal(1.0, 1.01, tol=1e-9)


def test_approx_equal_mixed_regimes_raise():
    with pytest.raises(RegimeMismatch):
        approx_equal(exact(1), 1.0)
    with pytest.raises(RegimeMismatch):
        EXACT.close(EXACT.array([1, 2]), np.array([1.0, 2.0]))
    with pytest.raises(RegimeMismatch):
        FLOAT.close(np.array([1.0]), EXACT.array([1]))


def test_tolerance_is_configurable():
    loose = Regime(tol=1e-3)
    assert loose.close(np.array([1.0]), np.array([1.0005]))
    assert not FLOAT.close(np.array([1.0]), np.array([1.0005]))


def test_exact_conversion_reads_decimal_text():
    assert exact(0.1) == exact(Fraction(1, 10))
    assert exact("3/7") == exact(Fraction(3, 7))
    assert exact(0.5 - 0.25j) == QQ_I(Fraction(1, 2), Fraction(-1, 4))
    assert real_part(exact(Fraction(5, 3))) == Fraction(5, 3)
    assert to_complex(exact(2) + exact(1j)) == 2 + 1j
    with pytest.raises(InvalidInput):
        exact(math.inf)
    with pytest.raises(InvalidInput):
        exact(True)


@given(gaussian, gaussian, gaussian)
def test_field_axioms_exact(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x + y == y + x and x * y == y * x
    assert x - x == exact(0)
    if x != exact(0):
        assert x * (1 / x) == exact(1)


def test_exact_arrays_stay_exact():
    a = EXACT.array([1, 2, 3, 4])
    b = a / 3 + exact(1j)
    assert b.dtype == object
    assert EXACT.is_zero(b * 3 - a - 3 * exact(1j))
    assert to_complex(b)[0] == pytest.approx(1 / 3 + 1j)


def test_phase_value_matches_exponential():
    for theta in np.linspace(-7, 7, 29):
        assert make_phase(theta).value == pytest.approx(cmath.exp(1j * theta))
