import math

import mpmath
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from src.errors import PoleError, UsageError
from src.numerics import EvalResult, format_scalar, gamma, parse_scalar, pochhammer, sinpi


def _rel(x: complex, y: complex) -> float:
    return abs(x - y) / max(abs(x), abs(y))


def test_gamma_small_integers_and_half():
    assert _rel(gamma(1).value, 1) < 1e-14
    assert _rel(gamma(5).value, 24) < 1e-13
    assert _rel(gamma(0.5).value, math.sqrt(math.pi)) < 1e-13
    assert _rel(gamma(1.5).value, 0.5 * gamma(0.5).value) < 1e-13


def test_gamma_poles():
    for z in (0, -1, -7, -3 + 1e-11, complex(-2, 1e-12)):
        with pytest.raises(PoleError):
            gamma(z)


def test_gamma_matches_mpmath():
    for z in (0.1 + 0.2j, -3.7 + 1.5j, 12.25 - 8j, -15.5 + 0.1j, 2.5 + 19j):
        expected = complex(mpmath.gamma(mpmath.mpc(z.real, z.imag)))
        assert _rel(gamma(z).value, expected) < 1e-12


def test_gamma_recurrence_on_grid():
    for re in (-19.7, -13.3, -8.45, -3.5, -0.6, 0.25, 1.5, 4.75, 9.1, 14.3, 19.6):
        for im in (-20.0, -7.5, 0.0, 3.0, 20.0):
            z = complex(re, im)
            assert _rel(gamma(z + 1).value, z * gamma(z).value) < 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(-20, 20), st.floats(-20, 20))
def test_gamma_recurrence_property(re, im):
    z = complex(re, im)
    assume(abs(z - round(re)) > 1e-3 or round(re) > 0)
    assume(abs(z) > 1e-3)
    assert _rel(gamma(z + 1).value, z * gamma(z).value) < 1e-12


def test_pochhammer_examples():
    assert pochhammer(1, 3).value == 6
    assert pochhammer(0.3 + 0.1j, 0).value == 1
    assert _rel(pochhammer(0.5, -1).value, -2) < 1e-15


def test_pochhammer_negative_index_pole():
    with pytest.raises(PoleError):
        pochhammer(2, -3)
    with pytest.raises(PoleError):
        pochhammer(1 + 1e-12, -1)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(0.25, 0.75),
    st.floats(-6, 6),
    st.floats(-3, 3),
    st.integers(-10, 10),
    st.integers(-10, 10),
)
def test_pochhammer_splitting(frac, shift, im, n, k):
    x = complex(math.floor(shift) + frac, im)
    lhs = pochhammer(x, n + k).value
    rhs = (pochhammer(x, n) * pochhammer(x + n, k)).value
    assert _rel(lhs, rhs) < 1e-10


def test_pochhammer_gamma_ratio_agrees_with_product():
    for x in (0.3 + 0.2j, -2.5 + 0.7j, 4.1 - 3j):
        for n in (1, 5, 20, 64, -5, -20):
            by_gamma = pochhammer(x, n, method="gamma").value
            by_product = pochhammer(x, n, method="product").value
            assert _rel(by_gamma, by_product) < 1e-10


def test_pochhammer_long_index_uses_gamma_ratio():
    x = 0.3 + 0.2j
    assert _rel(pochhammer(x, 100).value, pochhammer(x, 100, method="product").value) < 1e-10


def test_sinpi_is_exact_at_integers():
    assert sinpi(3) == 0
    assert sinpi(-4) == 0
    assert abs(sinpi(0.5) - 1) < 1e-15
    assert abs(sinpi(2.5) - 1) < 1e-15


def test_evalresult_tracks_cancellation():
    total = EvalResult(1.0, 1e-16) + EvalResult(-0.999, 1e-16)
    assert abs(total.value - 0.001) < 1e-15
    assert total.cancellation_digits == pytest.approx(3.0, abs=1e-3)
    assert total.rel_err_estimate > 1e-16


def test_evalresult_error_is_monotone():
    x = EvalResult(2.0 + 1j, 1e-14, 1.0)
    y = EvalResult(0.5, 3e-15)
    for result in (x * y, x / y, x + y, x - y, -x, 3 * x, 1 / x):
        assert result.rel_err_estimate >= min(x.rel_err_estimate, y.rel_err_estimate)
    assert (x * y).cancellation_digits == 1.0


def test_evalresult_division_by_zero_is_a_pole():
    with pytest.raises(PoleError):
        EvalResult(1.0) / EvalResult(0.0)


def test_scalar_literals():
    assert parse_scalar("0.3") == 0.3
    assert parse_scalar("0.3+0.1i") == complex(0.3, 0.1)
    assert parse_scalar("-1e-3-2i") == complex(-1e-3, -2)
    assert parse_scalar(".5") == 0.5
    for bad in ("0.3 + 0.1i", "0.3+i", "1j", "nan", ""):
        with pytest.raises(UsageError):
            parse_scalar(bad)


def test_overflowing_literals_are_usage_errors():
    for bad in ("1e400", "-2e308", "0.5+1e309i"):
        with pytest.raises(UsageError):
            parse_scalar(bad)


def test_scalar_format_round_trips():
    for z in (0.3, complex(0.3, 0.1), complex(-1e-5, -2.5), 1 / 3):
        assert parse_scalar(format_scalar(z)) == complex(z)
    assert format_scalar(complex(0.5, 0.25)) == "0.5+0.25i"
    assert format_scalar(3) == "3"
