import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from infolab.distributions import gaussian, student_t
from infolab.errors import DomainViolation, InvalidParameter, NonConvergence
from infolab.numerics import (DiffConfig, Interval, QuadratureConfig, derivative, integrate, integrate_many,
                              panel_rule, richardson_extrapolate, sample)

coef = st.floats(-10, 10, allow_nan=False)


def test_interval_rejects_bad_bounds():
    with pytest.raises(InvalidParameter):
        Interval(1.0, 0.0)
    with pytest.raises(InvalidParameter):
        Interval(0.0, math.inf)


def test_config_validation():
    with pytest.raises(InvalidParameter):
        QuadratureConfig(rel_tol=0)
    with pytest.raises(InvalidParameter):
        QuadratureConfig(tail_mass=0.1)
    with pytest.raises(InvalidParameter):
        DiffConfig(richardson_levels=0)


def test_panel_rule_is_exact_for_polynomials():
    y, w = panel_rule(np.array([0.0, 0.3, 1.0]))
    assert np.isclose((w * y**20).sum(), 1 / 21, rtol=1e-14, atol=0)


def test_integrate_known_values():
    assert integrate(np.sin, (0, math.pi)) == pytest.approx(2.0, abs=1e-12)
    assert integrate(lambda x: np.exp(-x * x), (-40, 40)) == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    # kink handled by a breakpoint
    assert integrate(np.abs, (-1, 2), points=[0.0]) == pytest.approx(2.5, abs=1e-13)


def test_integrate_many_stacks_integrands():
    val, err = integrate_many(lambda x: np.stack([x, x * x]), (0, 1))
    assert val == pytest.approx([0.5, 1 / 3], abs=1e-14)
    assert np.all(err >= 0)


def test_integrate_reports_nonconvergence():
    cfg = QuadratureConfig(max_subdivisions=3)
    with pytest.raises(NonConvergence):
        integrate(lambda x: np.sin(1 / np.maximum(x, 1e-300)), (0, 1), cfg)


@given(st.lists(coef, min_size=1, max_size=7), st.lists(coef, min_size=1, max_size=7), coef, coef)
def test_integrate_is_linear(p, q, alpha, beta):
    cfg = QuadratureConfig()
    f, g = np.polynomial.Polynomial(p), np.polynomial.Polynomial(q)
    combined = integrate(lambda x: alpha * f(x) + beta * g(x), (0, 1), cfg)
    parts = alpha * integrate(f, (0, 1), cfg) + beta * integrate(g, (0, 1), cfg)
    assert abs(combined - parts) <= 10 * cfg.abs_tol


@given(st.lists(coef, min_size=4, max_size=4), st.floats(-5, 5))
def test_first_derivative_exact_on_cubics(c, x0):
    p = np.polynomial.Polynomial(c)
    exact = p.deriv()(x0)
    assert abs(derivative(p, x0) - exact) <= 1e-8 * max(abs(exact), 1.0)


@given(st.lists(coef, min_size=5, max_size=5), st.floats(-5, 5))
def test_second_derivative_exact_on_quartics(c, x0):
    p = np.polynomial.Polynomial(c)
    exact = p.deriv(2)(x0)
    assert abs(derivative(p, x0, order=2) - exact) <= 1e-6 * max(abs(exact), 1.0)


def test_derivative_vectorised_and_bounded():
    x = np.array([0.5, 1.0, 2.0])
    assert derivative(np.log, x, lower=0.0) == pytest.approx(1 / x, rel=1e-9)
    with pytest.raises(DomainViolation):
        derivative(np.log, 1e-5, lower=0.0)
    # forward differences near the bound
    assert derivative(np.log, 1e-3, lower=0.0, one_sided=True) == pytest.approx(1e3, rel=1e-3)


def test_richardson_removes_leading_error():
    h = np.array([0.1, 0.05, 0.025])
    vals = 1.0 + 3 * h**2 + h**4
    assert richardson_extrapolate(vals, p=2) == pytest.approx(1.0, abs=1e-9)


@given(st.integers(0, 2**32 - 1), st.integers(1, 200))
def test_sample_is_bitwise_reproducible(seed, n):
    for dist in (gaussian(), student_t(3)):
        assert sample(dist, n, seed).tobytes() == sample(dist, n, seed).tobytes()
