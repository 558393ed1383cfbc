"""Entropy, entropy power, Fisher information and MMSE of a channel output.

All y-integrals run over the channel's truncated output support with the
panel breakpoints from :meth:`AdditiveNoiseChannel.y_breakpoints`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import AdditiveNoiseChannel
from .distributions import Distribution
from .errors import InvalidParameter
from .numerics import QuadratureConfig, integrate_many, panel_rule, sample

__all__ = [
    "InfoMeasureResult",
    "differential_entropy",
    "conditional_entropy_noise",
    "entropy_power",
    "conditional_entropy_power",
    "fisher_location",
    "fisher_location_dual",
    "fisher_parameter",
    "conditional_fisher",
    "prior_fisher",
    "mmse",
    "expect_y",
]

TWO_PI_E = 2.0 * math.pi * math.e


@dataclass(frozen=True)
class InfoMeasureResult:
    value: float
    method: str
    est_error: float

    def __post_init__(self):
        if not self.est_error >= 0:
            raise InvalidParameter("est_error must be non-negative")

    def __float__(self):
        return float(self.value)


def expect_y(ch: AdditiveNoiseChannel, integrand):
    """``int integrand(y) dy`` over the output support, returning ``(value, err)``.

    ``integrand`` receives a 1-D batch of ``y`` nodes and may return a
    stacked array for several integrals at once.
    """
    return integrate_many(integrand, ch.y_support(), ch.quad, points=ch.y_breakpoints())


def loose_quad(ch: AdditiveNoiseChannel) -> QuadratureConfig:
    """The channel's quadrature policy with ``rel_tol`` floored at 1e-8.

    For integrands that contain finite differences, whose values are only
    good to about 1e-10 relative; a tighter target never converges.
    """
    return replace(ch.quad, rel_tol=max(ch.quad.rel_tol, 1e-8))


def _neg_f_log_f(f):
    pos = f > 0
    return np.where(pos, -f * np.log(np.where(pos, f, 1.0)), 0.0)


def differential_entropy(obj, cfg: QuadratureConfig | None = None) -> float:
    """``-int f log f`` of a channel output or of a standalone law (``0 log 0 = 0``)."""
    if isinstance(obj, AdditiveNoiseChannel):
        return float(expect_y(obj, lambda y: _neg_f_log_f(obj.batch_marginal(y)[0]))[0])
    if isinstance(obj, Distribution):
        cfg = cfg or QuadratureConfig()
        eff = obj.effective_support(cfg.tail_mass)
        val, _ = integrate_many(lambda x: _neg_f_log_f(obj.pdf(x)), eff, cfg, points=obj.breakpoints(cfg.tail_mass))
        return float(val)
    raise InvalidParameter(f"cannot take the entropy of {obj!r}")


def conditional_entropy_noise(ch: AdditiveNoiseChannel) -> float:
    """``h(Y|X) = h(sqrt(a) W) = h(W) + log(a) / 2``."""
    return differential_entropy(ch.noise, ch.quad) + 0.5 * math.log(ch.a)


def entropy_power(h: float) -> float:
    """``N = exp(2h) / (2 pi e)``."""
    if not np.isfinite(h):
        raise InvalidParameter("entropy must be finite")
    return math.exp(2.0 * h) / TWO_PI_E


def conditional_entropy_power(ch: AdditiveNoiseChannel) -> float:
    """``N(X|Y)`` with ``h(X|Y) = h(X) + h(Y|X) - h(Y)``."""
    hx = differential_entropy(ch.prior, ch.quad)
    return entropy_power(hx + conditional_entropy_noise(ch) - differential_entropy(ch))


def fisher_location(obj) -> float:
    """``J(Y) = E[S_Y(Y)^2]`` for a channel output, or the location Fisher information of a law."""
    if isinstance(obj, Distribution):
        return prior_fisher(obj)

    def g(y):
        f, s = obj.batch_score(y)
        return f * s * s

    return float(expect_y(obj, g)[0])


def fisher_location_dual(ch: AdditiveNoiseChannel) -> float:
    """``-E[S_Y'(Y)]``, the second form of the location Fisher information."""

    def g(y):
        f, d1, d2 = ch.batch_marginal(y, order=2)
        ok = f > ch.degenerate_threshold
        safe = np.where(ok, f, 1.0)
        return np.where(ok, d1 * d1 / safe - d2, 0.0)

    return float(expect_y(ch, g)[0])


def fisher_parameter(ch: AdditiveNoiseChannel) -> float:
    """``J_a(Y) = E[(d/da log f_Y(Y; a))^2]``."""

    def g(y):
        f = ch.batch_marginal(y)[0]
        s = ch.batch_dlog_da(y)
        return np.where(f > ch.degenerate_threshold, f * s * s, 0.0)

    val, _ = integrate_many(g, ch.y_support(), loose_quad(ch), points=ch.y_breakpoints())
    return float(val)


def _infinite_fisher(dist: Distribution) -> bool:
    # A density that jumps, or vanishes too slowly at a finite edge, has
    # infinite location Fisher information.
    if any(float(dist.pdf(j)) > 0 for j in dist.jumps):
        return True
    if np.isfinite(dist.support[0]) and dist.edge_limits[0] != 0:
        return True
    return dist.kind == "gamma" and dist.params["alpha"] <= 2


def conditional_fisher(ch: AdditiveNoiseChannel) -> float:
    """``E_X[J(Y|X)]`` by a double integral over ``x`` and ``y``.

    The inner integral for each ``x`` runs over ``y = x + sqrt(a) w`` with
    panels at the noise breakpoints.
    """
    if _infinite_fisher(ch.noise):
        return math.inf
    w_edges = ch.noise.breakpoints(ch.quad.tail_mass)

    def inner(x):
        y_edges = x[:, None] + ch.sqrt_a * w_edges[None, :]
        y, wts = panel_rule(y_edges)
        xx = x[:, None]
        k = ch.conditional_pdf(y, xx)
        dk_dx = -ch._kernel(y - xx, order=1)
        pos = k > 0
        val = np.where(pos, dk_dx * dk_dx / np.where(pos, k, 1.0), 0.0)
        return ch.prior.pdf(x) * (val * wts).sum(axis=-1)

    eff = ch.prior.effective_support(ch.quad.tail_mass)
    val, _ = integrate_many(inner, eff, ch.quad, points=ch.prior.breakpoints(ch.quad.tail_mass))
    return float(val)


def prior_fisher(dist: Distribution, cfg: QuadratureConfig | None = None) -> float:
    """Location Fisher information ``int (f')^2 / f`` of a single law.

    Returns ``inf`` for laws whose density jumps or does not vanish fast
    enough at a finite edge (exponential, gamma with shape <= 2).
    """
    if _infinite_fisher(dist):
        return math.inf
    cfg = cfg or QuadratureConfig()

    def g(x):
        f = dist.pdf(x)
        pos = f > 0
        d1 = dist.pdf_d1(x)
        return np.where(pos, d1 * d1 / np.where(pos, f, 1.0), 0.0)

    val, _ = integrate_many(g, dist.effective_support(cfg.tail_mass), cfg, points=dist.breakpoints(cfg.tail_mass))
    return float(val)


def mmse(ch: AdditiveNoiseChannel, method: str = "quadrature", n: int = 1_000_000, seed: int = 0,
         grid_points: int = 4001) -> InfoMeasureResult:
    """Minimum mean square error ``E[(X - E[X|Y])^2]``.

    ``quadrature`` integrates ``f_Y Var(X|Y)`` over ``y``.  ``monte_carlo``
    draws ``n`` channel uses and scores them against a cubic-spline
    interpolant of the posterior mean; the reported error is the sample
    standard deviation over ``sqrt(n)``.
    """
    ch.prior.variance  # raises UndefinedMoment for heavy-tailed priors
    if method == "quadrature":
        def g(y):
            f, m1, m2 = ch.batch_posterior(y)
            return f * np.maximum(m2 - m1 * m1, 0.0)

        val, err = expect_y(ch, g)
        return InfoMeasureResult(float(val), "quadrature", float(err))
    if method == "monte_carlo":
        x, y = channel_samples(ch, n, seed)
        spline, _ = ch.posterior_mean_interpolant(grid_points)
        sq = (x - ch.posterior_mean_fast(y, spline)) ** 2
        return InfoMeasureResult(float(sq.mean()), "monte_carlo", float(sq.std(ddof=1) / math.sqrt(sq.size)))
    raise InvalidParameter(f"unknown mmse method {method!r}")


def channel_samples(ch: AdditiveNoiseChannel, n: int, seed: int):
    """``n`` draws of ``(X, Y)``; prior and noise use independent streams derived from ``seed``."""
    sx, sw = np.random.SeedSequence(seed).generate_state(2)
    x = sample(ch.prior, n, int(sx))
    w = sample(ch.noise, n, int(sw))
    return x, x + ch.sqrt_a * w
