import math

import pytest

from infolab import identities as ids
from infolab.channel import AdditiveNoiseChannel
from infolab.distributions import exponential_unit, gamma_dist, gaussian, student_t, truncated_gaussian
from infolab.errors import AssumptionViolated, InvalidParameter, PreconditionViolated
from infolab.numerics import DiffConfig

G = gaussian()


def _run(name, ch, tol):
    fn = ids.VERIFIERS[name]
    return fn(ch, "y2", tol) if name == "heat_equation" else fn(ch, tol=tol)


GAUSS_APPLICABLE = ["de_bruijn", "generalized_stein", "heat_equation", "thm6", "thm7", "cor5", "lemma3", "fii"]


@pytest.mark.parametrize("a", [0.1, 0.25, 0.5, 1, 2, 5, 10])
def test_gaussian_suite(a):
    ch = AdditiveNoiseChannel(G, G, a)
    for name in GAUSS_APPLICABLE:
        rep = _run(name, ch, 1e-4)
        assert rep.passed, str(rep)
    for name in ("cor2", "cor3", "cor6", "cor7"):
        with pytest.raises(PreconditionViolated):
            _run(name, ch, 1e-4)


def test_gaussian_closed_form_sides():
    a = 0.5
    ch = AdditiveNoiseChannel(G, G, a)
    assert ids.verify_de_bruijn(ch).lhs == pytest.approx(1 / (2 * (1 + a)), abs=1e-8)
    assert ids.verify_cor5(ch).lhs == pytest.approx(-1 / (2 * (1 + a) ** 2), abs=1e-7)
    assert ids.verify_lemma3(ch).rhs == pytest.approx(-1 / (1 + a) ** 2, abs=1e-8)


def test_thm6_specialises_to_de_bruijn():
    for prior in (G, student_t(3)):
        ch = AdditiveNoiseChannel(prior, G, 1.0)
        assert abs(ids.verify_thm6(ch).rhs - ids.verify_de_bruijn(ch).rhs) <= 1e-4


@pytest.mark.parametrize("name,prior,noise,a", [
    ("thm7", student_t(3), G, 1.0),
    ("cor5", truncated_gaussian(0.0, 1.0, -1.0, 1.0), G, 0.5),
    ("cor6", gamma_dist(2.0), exponential_unit(), 1.0),
    ("cor7", gamma_dist(2.0), gamma_dist(3.0), 2.0),
])
def test_second_derivative_rhs_matches_independent_difference(name, prior, noise, a):
    ch = AdditiveNoiseChannel(prior, noise, a)
    rep = _run(name, ch, ids.SECOND_TOL)
    assert rep.passed, str(rep)
    # a different stencil and ladder depth than the verifier uses
    other = ids.entropy_derivative(ch, order=2, diff=DiffConfig(base_step=2e-3, richardson_levels=2))
    assert abs(rep.rhs - other) <= ids.SECOND_TOL


@pytest.mark.parametrize("name,prior,noise,a", [
    ("thm6", truncated_gaussian(0.5, 1.0, 0.0, 3.0), exponential_unit(), 1.0),
    ("cor2", truncated_gaussian(0.5, 1.0, 0.0, 3.0), exponential_unit(), 1.0),
    ("thm6", gamma_dist(3.0), gamma_dist(2.0), 0.5),
    ("cor3", gamma_dist(3.0), gamma_dist(2.0), 0.5),
])
def test_general_noise_first_derivative(name, prior, noise, a):
    rep = _run(name, AdditiveNoiseChannel(prior, noise, a), ids.FIRST_TOL)
    assert rep.passed, str(rep)


def test_corollaries_agree_with_thm6_lhs():
    ch = AdditiveNoiseChannel(exponential_unit(), exponential_unit(), 2.0)
    assert abs(ids.verify_cor2_exponential(ch).rhs - ids.verify_thm6(ch).lhs) <= 1e-3


def test_exponential_noise_rejects_heavy_prior():
    ch = AdditiveNoiseChannel(student_t(3), exponential_unit(), 1.0)
    with pytest.raises(AssumptionViolated) as info:
        ids.verify_cor2_exponential(ch)
    assert "prior:mgf_exists" in info.value.failed


def test_cor7_needs_shape_three():
    ch = AdditiveNoiseChannel(gamma_dist(2.0), gamma_dist(2.0), 1.0)
    with pytest.raises(InvalidParameter):
        ids.verify_cor7_gamma(ch)


def test_heat_equation_needs_gaussian_output():
    with pytest.raises(PreconditionViolated):
        ids.verify_heat_equation(AdditiveNoiseChannel(student_t(3), G, 1.0))
    with pytest.raises(InvalidParameter):
        ids.verify_heat_equation(AdditiveNoiseChannel(G, G, 1.0), "y7")


@pytest.mark.parametrize("g", ["y2", "y4", "cos", "sin"])
def test_heat_equation_functions(g):
    assert ids.verify_heat_equation(AdditiveNoiseChannel(G, G, 1.0), g).passed


def test_classic_stein():
    for r in ("y", "y2", "sin", "cos"):
        assert ids.verify_classic_stein(gaussian(0.5, 2.0), r).passed
    with pytest.raises(PreconditionViolated):
        ids.verify_classic_stein(student_t(3))


def test_fii_strict_for_non_gaussian_prior():
    rep = ids.verify_fii(AdditiveNoiseChannel(student_t(3), G, 1.0))
    assert rep.passed and rep.lhs - rep.rhs > 0.1


def test_report_equality_rule():
    rep = ids.IdentityReport.equality("x", "d", 1.0, 100.0, 100.05, 1e-3)
    assert rep.passed and rep.rel_residual == pytest.approx(5e-4)
    assert not ids.IdentityReport.equality("x", "d", 1.0, 0.0, 2e-3, 1e-3).passed
    assert math.isinf(ids.IdentityReport.equality("x", "d", 1.0, 0.0, 1.0, 1e-3).rel_residual)


def test_default_tolerances_cover_registry():
    assert set(ids.DEFAULT_TOLERANCES) == set(ids.VERIFIERS)
