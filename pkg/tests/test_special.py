import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from elastoscatter import DomainError, bessel_j, bessel_quad, bessel_y, hankel1

mpmath.mp.dps = 50
ORACLE_POINTS = [0.5, 1.0, 2.0, 5.0, 10.0, 50.0]


def _oracle(x):
    x = mpmath.mpf(x)
    return [float(mpmath.besselj(0, x)), float(mpmath.besselj(1, x)),
            float(mpmath.bessely(0, x)), float(mpmath.bessely(1, x))]


def test_values_at_one():
    q = bessel_quad(1.0)
    assert q.j0 == pytest.approx(0.7651976866, abs=1e-10)
    assert q.y0 == pytest.approx(0.0882569642, abs=1e-10)


@pytest.mark.parametrize("x", ORACLE_POINTS)
def test_against_mpmath(x):
    q = bessel_quad(x)
    for got, want in zip((q.j0, q.j1, q.y0, q.y1), _oracle(x)):
        assert abs(got - want) <= 1e-12 * abs(want)


def test_small_argument_limits():
    q = bessel_quad(1e-9)
    assert q.j0 == pytest.approx(1.0, abs=1e-15)
    assert abs(q.j1) < 1e-9


def test_wronskian_log_grid():
    for x in np.logspace(-3, 3, 200):
        q = bessel_quad(float(x))
        assert abs(q.wronskian_residual) <= 1e-10 * 2 / (math.pi * x)


def test_wronskian_at_fifty():
    assert abs(bessel_quad(50.0).wronskian_residual) <= 1e-12


@given(st.floats(min_value=1e-3, max_value=1e3))
@settings(max_examples=200, deadline=None)
def test_bounded_and_wronskian(x):
    q = bessel_quad(x)
    assert abs(q.j0) <= 1 and abs(q.j1) <= 1
    assert abs(q.wronskian_residual) <= 1e-10 * 2 / (math.pi * x)


def test_derivative_recurrence():
    x = np.linspace(0.5, 50, 400)
    step = 1e-5
    fd = (bessel_j(0, x + step) - bessel_j(0, x - step)) / (2 * step)
    assert np.max(np.abs(fd + bessel_j(1, x))) <= 1e-6


def _hankel_asymptotic(n, x, terms=8):
    mu = 4 * n * n
    coef, total = 1.0, np.ones_like(x, dtype=complex)
    for k in range(1, terms):
        coef *= (mu - (2 * k - 1) ** 2) / (k * 8)
        total += coef * (1j / x) ** k
    chi = x - (2 * n + 1) * math.pi / 4
    return np.sqrt(2 / (math.pi * x)) * np.exp(1j * chi) * total


def test_large_argument_asymptotics():
    x = np.linspace(50, 500, 50)
    for n in (0, 1):
        h = hankel1(n, x)
        assert np.max(np.abs(h - _hankel_asymptotic(n, x)) / np.abs(h)) <= 1e-8


def test_hankel_values():
    h = hankel1(0, 1.0)
    assert isinstance(h, complex)
    assert h.real == pytest.approx(0.7651976866, abs=1e-10)
    assert h.imag == pytest.approx(0.0882569642, abs=1e-10)
    assert abs(hankel1(0, 100.0)) == pytest.approx(math.sqrt(2 / (math.pi * 100)), rel=1e-2)


def test_hankel_order_one_blows_up():
    for x in (1e-3, 1e-5):
        assert hankel1(1, x).imag == pytest.approx(-2 / (math.pi * x), rel=1e-4)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
def test_domain_errors(bad):
    with pytest.raises(DomainError):
        bessel_quad(bad)
    with pytest.raises(DomainError):
        hankel1(0, bad)


def test_unsupported_order():
    with pytest.raises(DomainError):
        hankel1(2, 1.0)
    with pytest.raises(DomainError):
        bessel_y(3, 1.0)
