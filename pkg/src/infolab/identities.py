"""Verifiers for the entropy-derivative identities of additive noise channels.

Each verifier computes the two sides of one identity along independent
numerical paths and returns an :class:`IdentityReport`.  Left-hand sides
that are derivatives in ``a`` are finite differences of the quadrature
entropy (or Fisher information); right-hand sides are quadratures of
posterior and score quantities at fixed ``a``.  The only shared
ingredient is the marginal density.

Verifiers raise :class:`~infolab.errors.PreconditionViolated` (or its
subclass :class:`~infolab.errors.AssumptionViolated`) when called on a
channel outside the setting in which the identity holds.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import infomeasures as im
from .channel import AdditiveNoiseChannel, CompanionChannel
from .distributions import Distribution, check_assumptions
from .errors import AssumptionViolated, InvalidParameter, PreconditionViolated
from .numerics import DiffConfig, QuadratureConfig, derivative, integrate, integrate_many

__all__ = [
    "IdentityReport",
    "TEST_FUNCTIONS",
    "ENTROPY_DIFF",
    "entropy_derivative",
    "verify_de_bruijn",
    "verify_classic_stein",
    "verify_generalized_stein",
    "verify_heat_equation",
    "verify_thm6",
    "verify_cor2_exponential",
    "verify_cor3_gamma",
    "verify_thm7",
    "verify_cor5",
    "verify_cor6_exponential",
    "verify_cor7_gamma",
    "verify_lemma3",
    "verify_fii",
    "VERIFIERS",
]

FIRST_TOL = 1e-4
SECOND_TOL = 5e-3
FII_TOL = 1e-6

# Entropy evaluations carry quadrature noise near 1e-10, so a-derivatives
# use a larger step than the generic default.
ENTROPY_DIFF = DiffConfig(base_step=1e-3, richardson_levels=3)


@dataclass
class IdentityReport:
    """Outcome of checking one identity on one channel.

    ``passed`` holds iff ``abs_residual <= max(tolerance, tolerance * |lhs|)``,
    except for inequality checks, which record the rule in ``notes``.
    """

    identity_name: str
    channel_desc: str
    a: float
    lhs: float
    rhs: float
    abs_residual: float
    rel_residual: float
    tolerance: float
    passed: bool
    notes: str = ""

    @classmethod
    def equality(cls, name, desc, a, lhs, rhs, tol, notes=""):
        lhs, rhs = float(lhs), float(rhs)
        res = abs(lhs - rhs)
        rel = res / abs(lhs) if lhs != 0 else (0.0 if res == 0 else math.inf)
        ok = bool(res <= max(tol, tol * abs(lhs)))
        return cls(name, desc, float(a), lhs, rhs, res, rel, float(tol), ok, notes)

    def as_dict(self) -> dict:
        return asdict(self)

    def __str__(self):
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict} {self.identity_name} [{self.channel_desc}] a={self.a:g} "
                f"lhs={self.lhs:.10g} rhs={self.rhs:.10g} residual={self.abs_residual:.3g} tol={self.tolerance:g}")


# Test functions as (g, g', g'').
TEST_FUNCTIONS = {
    "y": (lambda y: y, lambda y: np.ones_like(y), lambda y: np.zeros_like(y)),
    "y2": (lambda y: y * y, lambda y: 2 * y, lambda y: 2 * np.ones_like(y)),
    "y4": (lambda y: y**4, lambda y: 4 * y**3, lambda y: 12 * y * y),
    "sin": (np.sin, np.cos, lambda y: -np.sin(y)),
    "cos": (np.cos, lambda y: -np.sin(y), lambda y: -np.cos(y)),
}


def _test_function(g):
    if isinstance(g, str):
        if g not in TEST_FUNCTIONS:
            raise InvalidParameter(f"unknown test function {g!r}; expected one of {sorted(TEST_FUNCTIONS)}")
        return g, TEST_FUNCTIONS[g]
    return getattr(g[0], "__name__", "custom"), tuple(g)


def _desc(ch: AdditiveNoiseChannel) -> str:
    return f"X~{ch.prior!r}, W~{ch.noise!r}"


# -- preconditions -----------------------------------------------------------

_NOISE_CHECKS = ("noise_family", "gamma_shape", "gamma_rate", "unit_gaussian")


def _require(ch: AdditiveNoiseChannel, kind: str):
    # one call sees both ends of the channel; label each check by the law it concerns
    report = check_assumptions(ch.prior, "prior", kind, counterpart=ch.noise, cfg=ch.quad)
    failed = [f"{'noise' if name in _NOISE_CHECKS else 'prior'}:{name}" for name in report.failed]
    if failed:
        raise AssumptionViolated(f"{_desc(ch)} fails {', '.join(failed)}", failed)


def _require_gaussian_noise(ch: AdditiveNoiseChannel, what: str):
    n = ch.noise
    if n.kind != "gaussian" or n.params["mu"] != 0.0 or n.params["var"] != 1.0:
        raise PreconditionViolated(f"{what} needs N(0, 1) noise, got {n!r}")


def _require_noise(ch: AdditiveNoiseChannel, kind: str, what: str):
    if ch.noise.kind != kind:
        raise PreconditionViolated(f"{what} needs {kind} noise, got {ch.noise!r}")


# -- shared numerical pieces ---------------------------------------------------

def entropy_derivative(ch: AdditiveNoiseChannel, order: int = 1, diff: DiffConfig | None = None) -> float:
    """``d^k/da^k h(Y)`` by Richardson finite differences of the quadrature entropy."""
    diff = diff or ENTROPY_DIFF
    return float(derivative(lambda av: im.differential_entropy(ch.with_a(float(av))), ch.a,
                            order=order, cfg=diff, lower=0.0))


def _true_y_lower(ch: AdditiveNoiseChannel):
    lo = ch.prior.support[0] + ch.sqrt_a * ch.noise.support[0]
    return lo if np.isfinite(lo) else None


def _dy(ch: AdditiveNoiseChannel, func, y):
    """d/dy of a vectorised function of ``y``, one-sided near a true lower edge of the output."""
    lower = _true_y_lower(ch)
    if lower is None:
        return derivative(func, y)
    return derivative(func, y, lower=lower, one_sided=True)


def _posterior_parts(ch: AdditiveNoiseChannel, y):
    """``(f, m, u1, v2)``: marginal, ``E[X|y]``, ``E[y - X|y]``, ``E[(y - X)^2|y]`` (unguarded)."""
    f, n1, n2 = ch.batch_integrals(y, [(0, None), (0, lambda x, yy: x), (0, lambda x, yy: x * x)])
    pos = f > 0
    safe = np.where(pos, f, 1.0)
    m = np.where(pos, n1 / safe, 0.0)
    m2 = np.where(pos, n2 / safe, 0.0)
    return f, m, y - m, y * y - 2 * y * m + m2


def _posterior_mean_slope(ch: AdditiveNoiseChannel, y):
    """``d/dy E[X|y]`` from the differentiated kernel, including the edge jump term."""
    f, d1, n1, dn1 = ch.batch_integrals(y, [(0, None), (1, None), (0, lambda x, yy: x), (1, lambda x, yy: x)])
    edge = ch._edge_terms(y)
    if edge is not None:
        j0, _, xe = edge
        fx = ch.prior.pdf(xe)
        d1 = d1 + j0 / ch.sqrt_a * fx
        dn1 = dn1 + j0 / ch.sqrt_a * xe * fx
    ok = f > ch.degenerate_threshold
    safe = np.where(ok, f, 1.0)
    return np.where(ok, (dn1 - n1 / safe * d1) / safe, 0.0)


def _score_slope(ch: AdditiveNoiseChannel, y):
    """``(f, S')`` with ``S' = f''/f - (f'/f)^2``, masked where ``f`` is degenerate."""
    f, d1, d2 = ch.batch_marginal(y, order=2)
    ok = f > ch.degenerate_threshold
    safe = np.where(ok, f, 1.0)
    return f, np.where(ok, d2 / safe - (d1 / safe) ** 2, 0.0)


def _prior_expectation(ch: AdditiveNoiseChannel, g) -> np.ndarray:
    """``E_X[g(X)]`` over the prior, ``g`` vectorised (possibly stacked)."""
    eff = ch.prior.effective_support(ch.quad.tail_mass)
    val, _ = integrate_many(lambda x: ch.prior.pdf(x) * g(x), eff, ch.quad,
                            points=ch.prior.breakpoints(ch.quad.tail_mass))
    return val


# -- Gaussian-noise identities --------------------------------------------------

def verify_de_bruijn(ch: AdditiveNoiseChannel, tol: float = FIRST_TOL) -> IdentityReport:
    """``d/da h(Y) = J(Y) / 2`` for unit Gaussian noise."""
    _require_gaussian_noise(ch, "de Bruijn's identity")
    _require(ch, "first_derivative")
    lhs = entropy_derivative(ch)
    rhs = 0.5 * im.fisher_location(ch)
    return IdentityReport.equality("de_bruijn", _desc(ch), ch.a, lhs, rhs, tol)


def verify_classic_stein(dist: Distribution, r="y", tol: float = 1e-8,
                         cfg: QuadratureConfig | None = None) -> IdentityReport:
    """``E[r(Y)(Y - mu)] = sigma^2 E[r'(Y)]`` for Gaussian ``Y``.

    ``r`` is a name from :data:`TEST_FUNCTIONS` or a ``(r, r')`` pair.
    """
    if dist.kind != "gaussian":
        raise PreconditionViolated(f"Stein's identity needs a Gaussian law, got {dist!r}")
    name, fns = _test_function(r)
    r0, r1 = fns[0], fns[1]
    mu, var = dist.params["mu"], dist.params["var"]
    cfg = cfg or QuadratureConfig()
    eff = dist.effective_support(cfg.tail_mass)
    pts = dist.breakpoints(cfg.tail_mass)
    lhs = integrate(lambda y: dist.pdf(y) * r0(y) * (y - mu), eff, cfg, points=pts)
    rhs = var * integrate(lambda y: dist.pdf(y) * r1(y), eff, cfg, points=pts)
    return IdentityReport.equality("classic_stein", f"{dist!r}, r={name}", math.nan, lhs, rhs, tol)


def verify_generalized_stein(ch: AdditiveNoiseChannel, tol: float = FIRST_TOL) -> IdentityReport:
    """Generalized Stein identity with ``r = -S_Y``, ``k = 1``, ``t = S_Y``, ``nu = 0``.

    Both sides are forms of the location Fisher information: ``E[S^2]``
    (from first derivatives of ``f_Y``) and ``-E[S']`` (from second ones).
    """
    _require_gaussian_noise(ch, "the generalized Stein identity")
    lhs = im.fisher_location(ch)
    rhs = im.fisher_location_dual(ch)
    return IdentityReport.equality("generalized_stein", _desc(ch), ch.a, lhs, rhs, tol,
                                   notes=f"E[S^2]={lhs:.12g}; -E[S']={rhs:.12g}")


def verify_heat_equation(ch: AdditiveNoiseChannel, g="y2", tol: float = FIRST_TOL) -> IdentityReport:
    """``d/da E[g(Y)] = E[g''(Y)] / 2`` when ``Y`` is Gaussian."""
    if ch.prior.kind != "gaussian" or ch.noise.kind != "gaussian":
        raise PreconditionViolated("the heat equation identity needs Gaussian X and W")
    _require_gaussian_noise(ch, "the heat equation identity")
    name, (g0, _, g2) = _test_function(g)

    def expect(fn, c):
        return float(im.expect_y(c, lambda y: c.batch_marginal(y)[0] * fn(y))[0])

    lhs = float(derivative(lambda av: expect(g0, ch.with_a(float(av))), ch.a, cfg=ENTROPY_DIFF, lower=0.0))
    rhs = 0.5 * expect(g2, ch)
    return IdentityReport.equality(f"heat_equation[{name}]", _desc(ch), ch.a, lhs, rhs, tol)


def verify_cor5(ch: AdditiveNoiseChannel, tol: float = SECOND_TOL) -> IdentityReport:
    """``d^2/da^2 h(Y) = -E[(S')^2] / 2`` for unit Gaussian noise."""
    _require_gaussian_noise(ch, "the Gaussian second-derivative identity")
    _require(ch, "second_derivative")
    lhs = entropy_derivative(ch, order=2)
    rhs = -0.5 * _mean_sq_score_slope(ch)
    return IdentityReport.equality("cor5", _desc(ch), ch.a, lhs, rhs, tol)


def _mean_sq_score_slope(ch):
    def g(y):
        f, s1 = _score_slope(ch, y)
        return f * s1 * s1

    return float(im.expect_y(ch, g)[0])


def verify_lemma3(ch: AdditiveNoiseChannel, tol: float = FIRST_TOL) -> IdentityReport:
    """``d/da J(Y) = -E[(S')^2]`` for unit Gaussian noise."""
    _require_gaussian_noise(ch, "the Fisher information derivative identity")
    lhs = float(derivative(lambda av: im.fisher_location(ch.with_a(float(av))), ch.a, cfg=ENTROPY_DIFF, lower=0.0))
    rhs = -_mean_sq_score_slope(ch)
    return IdentityReport.equality("lemma3", _desc(ch), ch.a, lhs, rhs, tol)


def verify_fii(ch: AdditiveNoiseChannel, tol: float = FII_TOL) -> IdentityReport:
    """Fisher information inequality ``1/J(Y) >= 1/J(X) + 1/J(sqrt(a) W)``.

    Passes iff ``lhs >= rhs - tol``; the gap ``lhs - rhs`` is kept in ``notes``.
    """
    _require_gaussian_noise(ch, "the Fisher information inequality")
    lhs = 1.0 / im.fisher_location(ch)
    jx = im.prior_fisher(ch.prior, ch.quad)
    rhs = 1.0 / jx + ch.a / im.prior_fisher(ch.noise, ch.quad)
    gap = lhs - rhs
    rel = abs(gap) / abs(lhs) if lhs else math.inf
    return IdentityReport("fii", _desc(ch), ch.a, lhs, rhs, abs(gap), rel, float(tol), bool(gap >= -tol),
                          notes=f"inequality lhs >= rhs - tol; gap={gap:.6g}")


# -- general-noise first derivative ----------------------------------------------

def _thm6_rhs(ch: AdditiveNoiseChannel) -> float:
    pm = ch.posterior_mean_raw

    def g(y):
        f = ch.batch_marginal(y)[0]
        return f * _dy(ch, pm, y)

    val, _ = integrate_many(g, ch.y_support(), im.loose_quad(ch), points=ch.y_breakpoints())
    e_slope = float(val)
    return (1.0 - e_slope) / (2.0 * ch.a)


def verify_thm6(ch: AdditiveNoiseChannel, tol: float = FIRST_TOL) -> IdentityReport:
    """``d/da h(Y) = (1 - E[d/dY E[X|Y]]) / (2a)`` for any admissible noise."""
    _require(ch, "first_derivative")
    return IdentityReport.equality("thm6", _desc(ch), ch.a, entropy_derivative(ch), _thm6_rhs(ch), tol)


def _cor_first_rhs(ch: AdditiveNoiseChannel, e_m: float) -> float:
    sa = ch.sqrt_a
    return (sa - ch.prior.mean + e_m) / (2.0 * ch.a * sa)


def verify_cor2_exponential(ch: AdditiveNoiseChannel, tol: float = FIRST_TOL) -> IdentityReport:
    """First derivative under unit exponential noise via ``E_X[E[X|Y = X]]``."""
    _require_noise(ch, "exponential", "the exponential-noise identity")
    _require(ch, "first_derivative")
    e_m = float(_prior_expectation(ch, ch.posterior_mean_raw))
    return IdentityReport.equality("cor2", _desc(ch), ch.a, entropy_derivative(ch), _cor_first_rhs(ch, e_m), tol)


def _companion_expectation(comp: CompanionChannel, g):
    """Average ``g(y)`` (possibly stacked) under the companion channel's marginal."""
    val, _ = im.expect_y(comp, lambda y: comp.batch_marginal(y)[0] * g(y))
    return val


def verify_cor3_gamma(ch: AdditiveNoiseChannel, tol: float = FIRST_TOL) -> IdentityReport:
    """First derivative under gamma noise.

    The base channel's posterior mean is averaged under the marginal of the
    companion channel whose noise shape is ``alpha - 1``.
    """
    _require_noise(ch, "gamma", "the gamma-noise identity")
    _require(ch, "first_derivative")
    comp = CompanionChannel(ch, -1)
    e_m = float(_companion_expectation(comp, ch.posterior_mean_raw))
    return IdentityReport.equality("cor3", _desc(ch), ch.a, entropy_derivative(ch), _cor_first_rhs(ch, e_m), tol)


# -- general-noise second derivative ---------------------------------------------

def verify_thm7(ch: AdditiveNoiseChannel, tol: float = SECOND_TOL) -> IdentityReport:
    """``h'' = -J_a - E[u1'] / (4a^2) - E[S' v2] / (4a^2)`` with ``u1 = E[Y-X|Y]``, ``v2 = E[(Y-X)^2|Y]``."""
    _require(ch, "second_derivative")
    lhs = entropy_derivative(ch, order=2)

    def g(y):
        f, s1 = _score_slope(ch, y)
        v2 = _posterior_parts(ch, y)[3]
        return np.stack([f * (1.0 - _posterior_mean_slope(ch, y)), f * s1 * v2])

    e_du1, e_s1v2 = im.expect_y(ch, g)[0]
    rhs = -im.fisher_parameter(ch) - (e_du1 + e_s1v2) / (4.0 * ch.a**2)
    return IdentityReport.equality("thm7", _desc(ch), ch.a, lhs, rhs, tol)


def verify_cor6_exponential(ch: AdditiveNoiseChannel, tol: float = SECOND_TOL) -> IdentityReport:
    """Second derivative under unit exponential noise, with posterior moments taken at ``Y = X``.

    The constant term enters as ``-1/(4a^2)``; a ``+`` sign there misses the
    true value by exactly ``1/(2a^2)``.
    """
    _require_noise(ch, "exponential", "the exponential-noise second-derivative identity")
    _require(ch, "second_derivative")
    a, sa = ch.a, ch.sqrt_a
    lhs = entropy_derivative(ch, order=2)
    e_u1, e_v2 = _prior_expectation(ch, lambda x: np.stack(_posterior_parts(ch, x)[2:]))
    rhs = -im.fisher_parameter(ch) + 3.0 / (4 * a * a * sa) * e_u1 - 1.0 / (4 * a * a) - e_v2 / (4 * a**3)
    return IdentityReport.equality("cor6", _desc(ch), a, lhs, rhs, tol,
                                   notes="constant term -1/(4a^2)")


def verify_cor7_gamma(ch: AdditiveNoiseChannel, tol: float = SECOND_TOL) -> IdentityReport:
    """Second derivative under gamma noise with shape ``alpha >= 3``.

    Uses the companions with shapes ``alpha - 1`` and ``alpha - 2``; the
    ratio term divides the base channel's ``E[(Y-X)^2|Y]`` by the
    ``alpha - 1`` companion's ``E[Y-X|Y]``.
    """
    _require_noise(ch, "gamma", "the gamma-noise second-derivative identity")
    alpha = ch.noise.params["alpha"]
    if alpha < 3:
        raise InvalidParameter(f"gamma second-derivative identity needs alpha >= 3, got {alpha:g}")
    _require(ch, "second_derivative")
    a, sa = ch.a, ch.sqrt_a
    lhs = entropy_derivative(ch, order=2)
    c1, c2 = CompanionChannel(ch, -1), CompanionChannel(ch, -2)

    def g1(y):
        _, m, _, v2 = _posterior_parts(ch, y)
        u1_comp = _posterior_parts(c1, y)[2]
        pos = u1_comp > 0
        ratio = np.where(pos, v2 / np.where(pos, u1_comp, 1.0), 0.0)
        return np.stack([m, ratio])

    e_m, e_ratio = _companion_expectation(c1, g1)
    e_v2 = float(_companion_expectation(c2, lambda y: _posterior_parts(ch, y)[3]))
    rhs = (-e_v2 / (4 * a**3)
           - e_m / (4 * a * a * sa)
           + (alpha - 1) / (4 * a * a * sa) * e_ratio
           - im.fisher_parameter(ch)
           - (sa - ch.prior.mean) / (4 * a * a * sa))
    return IdentityReport.equality("cor7", _desc(ch), a, lhs, rhs, tol)


VERIFIERS = {
    "de_bruijn": verify_de_bruijn,
    "generalized_stein": verify_generalized_stein,
    "heat_equation": verify_heat_equation,
    "thm6": verify_thm6,
    "cor2": verify_cor2_exponential,
    "cor3": verify_cor3_gamma,
    "thm7": verify_thm7,
    "cor5": verify_cor5,
    "cor6": verify_cor6_exponential,
    "cor7": verify_cor7_gamma,
    "lemma3": verify_lemma3,
    "fii": verify_fii,
}

# Default tolerance per verifier, keyed like VERIFIERS.
DEFAULT_TOLERANCES = {
    name: (SECOND_TOL if name in ("thm7", "cor5", "cor6", "cor7") else FII_TOL if name == "fii" else FIRST_TOL)
    for name in VERIFIERS
}
