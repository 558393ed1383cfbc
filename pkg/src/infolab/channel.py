"""The additive noise channel ``Y = X + sqrt(a) W``.

Every quantity that depends on the output ``y`` is an integral over the
prior, ``int f_X(x) k_a(y - x) g(x) dx``, where ``k_a(u) = f_W(u / sqrt a) /
sqrt a`` is the conditional kernel.  These x-integrals are done with a fixed
composite Gauss-Legendre rule whose panels follow both the prior's shape
(its quantile breakpoints) and the kernel's shape (noise breakpoints shifted
to ``y``).  The rule is vectorised over ``y`` so that outer y-integrals can
evaluate a whole batch of nodes at once.

The public point methods (:meth:`AdditiveNoiseChannel.posterior_mean` and
friends) refuse to divide by a marginal density below
``DEGENERATE_FACTOR * abs_tol``; the batch methods prefixed ``batch_`` mask
those points to zero instead, which is what outer quadratures want.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .distributions import Distribution, _gamma
from .errors import DegenerateDensity, DomainViolation, InvalidParameter, Unsupported
from .numerics import (DEFAULT_DIFF, DEFAULT_QUAD, DiffConfig, Interval, QuadratureConfig, derivative, panel_rule,
                       stencil_reach)

__all__ = ["AdditiveNoiseChannel", "CompanionChannel", "DEGENERATE_FACTOR"]

# The x-rule keeps noise values whose log-density is within this many nats
# of the peak, far beyond the tail_mass truncation used for y.
WINDOW_NATS = 70.0
WINDOW_PANELS = 4


def _noise_window(noise: Distribution, eff: Interval):
    """Panel edges extending ``eff`` into the tails until the density drops by ``WINDOW_NATS``."""
    floor = float(noise.log_pdf(noise.mode)) - WINDOW_NATS

    def reach(edge, direction, bound):
        if np.isfinite(bound):
            return bound
        g = lambda t: float(noise.log_pdf(t)) - floor
        step = eff.width
        far = edge + direction * step
        while g(far) > 0:
            step *= 2
            far = edge + direction * step
        return brentq(g, edge, far) if g(edge) > 0 else edge

    lo = reach(eff.lo, -1.0, noise.support[0])
    hi = reach(eff.hi, 1.0, noise.support[1])
    return np.concatenate([np.linspace(lo, eff.lo, WINDOW_PANELS + 1)[:-1],
                           np.linspace(eff.hi, hi, WINDOW_PANELS + 1)[1:]])

DEGENERATE_FACTOR = 1e3


class AdditiveNoiseChannel:
    """``Y = X + sqrt(a) W`` with independent prior ``X`` and noise ``W``.

    Parameters
    ----------
    prior, noise:
        Laws of ``X`` and ``W``.
    a:
        Noise scale, strictly positive.
    quad:
        Quadrature policy shared by every integral on this channel.
    """

    def __init__(self, prior: Distribution, noise: Distribution, a: float, quad: QuadratureConfig | None = None):
        a = float(a)
        if not (np.isfinite(a) and a > 0):
            raise InvalidParameter(f"channel parameter a must be positive and finite, got {a}")
        self.prior = prior
        self.noise = noise
        self.a = a
        self.sqrt_a = math.sqrt(a)
        self.quad = quad or DEFAULT_QUAD
        self._x_eff = prior.effective_support(self.quad.tail_mass)
        self._w_eff = noise.effective_support(self.quad.tail_mass)
        self._x_bp = prior.breakpoints(self.quad.tail_mass)
        self._w_bp = noise.breakpoints(self.quad.tail_mass)
        tails = _noise_window(noise, self._w_eff)
        self._w_window = (min(tails[0], self._w_eff.lo), max(tails[-1], self._w_eff.hi))
        self._w_rule_bp = np.unique(np.concatenate([self._w_bp, tails]))
        self._cache = {}

    def __repr__(self):
        return f"AdditiveNoiseChannel(prior={self.prior!r}, noise={self.noise!r}, a={self.a:g})"

    def with_a(self, a: float) -> "AdditiveNoiseChannel":
        return type(self)(self.prior, self.noise, a, self.quad)

    @property
    def degenerate_threshold(self) -> float:
        return DEGENERATE_FACTOR * self.quad.abs_tol

    @property
    def noise_lower_edge(self) -> float:
        """Lower edge of the noise support, or ``-inf``."""
        return self.noise.support[0]

    # -- kernel ------------------------------------------------------------

    def conditional_pdf(self, y, x):
        """Kernel ``f_{Y|X}(y|x; a) = f_W((y - x) / sqrt a) / sqrt a``."""
        u = (np.asarray(y, dtype=float) - np.asarray(x, dtype=float)) / self.sqrt_a
        return self.noise.pdf(u) / self.sqrt_a

    def _kernel(self, u, order=0):
        # u = y - x; derivatives in u of the smooth branch
        w = u / self.sqrt_a
        if order == 0:
            return self.noise.pdf(w) / self.sqrt_a
        if order == 1:
            return self.noise.pdf_d1(w) / self.a
        return self.noise.pdf_d2(w) / (self.a * self.sqrt_a)

    # -- supports ----------------------------------------------------------

    def y_support(self) -> Interval:
        """Minkowski sum of the truncated prior and scaled noise supports."""
        key = "y_support"
        if key not in self._cache:
            self._cache[key] = Interval(self._x_eff.lo + self.sqrt_a * self._w_eff.lo,
                                        self._x_eff.hi + self.sqrt_a * self._w_eff.hi)
        return self._cache[key]

    def y_breakpoints(self) -> np.ndarray:
        """Initial panel edges for integrals over ``y``."""
        key = "y_bp"
        if key not in self._cache:
            w_med = float(self.noise.quantile(0.5))
            x_med = float(self.prior.quantile(0.5))
            pts = [self._x_bp + self.sqrt_a * w_med, x_med + self.sqrt_a * self._w_bp]
            jumps_x = np.asarray(self.prior.jumps, dtype=float)
            jumps_w = np.asarray(self.noise.jumps, dtype=float)
            if jumps_x.size:
                pts.append(jumps_x + self.sqrt_a * w_med)
            if jumps_w.size:
                pts.append(x_med + self.sqrt_a * jumps_w)
            if jumps_x.size and jumps_w.size:
                pts.append((jumps_x[:, None] + self.sqrt_a * jumps_w[None, :]).ravel())
            pts = np.concatenate(pts)
            ys = self.y_support()
            pts = pts[(pts > ys.lo) & (pts < ys.hi)]
            self._cache[key] = np.unique(np.concatenate([[ys.lo, ys.hi], pts]))
        return self._cache[key]

    # -- the x-rule --------------------------------------------------------

    def x_rule(self, y):
        """Quadrature nodes and weights in ``x`` for each ``y``.

        Returns ``(x, w)`` with shape ``y.shape + (K,)``; the rule integrates
        over ``{x : f_X(x) > 0, k_a(y - x) > 0}`` with the noise cut where its
        density has fallen ``WINDOW_NATS`` below the peak.  The prior is not
        truncated here, so a ``y`` far in the tail still sees its whole
        posterior.
        """
        y = np.atleast_1d(np.asarray(y, dtype=float))
        lo = np.maximum(self.prior.support[0], y - self.sqrt_a * self._w_window[1])
        hi = np.minimum(self.prior.support[1], y - self.sqrt_a * self._w_window[0])
        hi = np.maximum(hi, lo)
        kern = y[:, None] - self.sqrt_a * self._w_rule_bp[None, :]
        prior = np.broadcast_to(self._x_bp, (y.size, self._x_bp.size))
        edges = np.concatenate([lo[:, None], prior, kern, hi[:, None]], axis=1)
        edges = np.sort(np.clip(edges, lo[:, None], hi[:, None]), axis=1)
        return panel_rule(edges)

    def batch_integrals(self, y, funcs):
        """``int f_X(x) k(y - x) g(x, y) dx`` for each ``g`` in ``funcs``.

        ``funcs`` is a sequence of ``(kernel_order, g)`` pairs; ``g`` is a
        callable ``g(x, y)`` or ``None`` for the constant 1.
        """
        y = np.atleast_1d(np.asarray(y, dtype=float))
        x, w = self.x_rule(y)
        yy = y[:, None]
        base = self.prior.pdf(x) * w
        kernels = {}
        out = []
        for order, g in funcs:
            if order not in kernels:
                kernels[order] = self._kernel(yy - x, order)
            integrand = base * kernels[order]
            if g is not None:
                integrand = integrand * g(x, yy)
            out.append(integrand.sum(axis=-1))
        return out

    # -- marginal and its y-derivatives -----------------------------------

    def _edge_terms(self, y):
        # contributions of the noise density's jump at its lower support edge
        j0, j1 = self.noise.edge_limits
        if not np.isfinite(self.noise_lower_edge) or (j0 == 0 and j1 == 0):
            return None
        x_edge = y - self.sqrt_a * self.noise_lower_edge
        return j0, j1, x_edge

    def batch_marginal(self, y, order: int = 0):
        """``f_Y`` and its y-derivatives up to ``order`` (list of arrays)."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        vals = self.batch_integrals(y, [(k, None) for k in range(order + 1)])
        edge = self._edge_terms(y)
        if edge is not None and order >= 1:
            j0, j1, xe = edge
            fx = self.prior.pdf(xe)
            vals[1] = vals[1] + j0 / self.sqrt_a * fx
            if order >= 2:
                vals[2] = vals[2] + j0 / self.sqrt_a * self.prior.pdf_d1(xe) + j1 / self.a * fx
        return vals

    def marginal_pdf(self, y):
        """Output density ``f_Y(y; a) = E_X[f_{Y|X}(y|X; a)]``."""
        y_arr = np.asarray(y, dtype=float)
        val = self.batch_marginal(y_arr.ravel())[0].reshape(y_arr.shape)
        return float(val) if val.ndim == 0 else val

    # -- posterior quantities ---------------------------------------------

    def batch_posterior(self, y):
        """``(f_Y, E[X|y], E[X^2|y])`` with degenerate points masked to zero."""
        f, n1, n2 = self.batch_integrals(y, [(0, None), (0, lambda x, yy: x), (0, lambda x, yy: x * x)])
        ok = f > self.degenerate_threshold
        safe = np.where(ok, f, 1.0)
        return f, np.where(ok, n1 / safe, 0.0), np.where(ok, n2 / safe, 0.0)

    def _checked(self, y):
        y_arr = np.asarray(y, dtype=float)
        flat = y_arr.ravel()
        f = self.batch_marginal(flat)[0]
        bad = f <= self.degenerate_threshold
        if np.any(bad):
            raise DegenerateDensity(
                f"f_Y({flat[bad][0]:g}) = {f[bad][0]:.3g} is below the threshold {self.degenerate_threshold:.3g}"
            )
        return y_arr, flat

    def _shape(self, val, y_arr):
        val = np.asarray(val).reshape(y_arr.shape)
        return float(val) if val.ndim == 0 else val

    def posterior_mean(self, y):
        """``E[X | Y = y]``."""
        return self.posterior_moment(y, 1, "raw")

    def posterior_moment(self, y, k: int = 1, center: str = "raw"):
        """``E[X^k | y]`` (``raw``) or ``E[(y - X)^k | y]`` (``around_y``) for ``k`` in 1, 2."""
        if k not in (1, 2):
            raise InvalidParameter("posterior moment order must be 1 or 2")
        if center not in ("raw", "around_y"):
            raise InvalidParameter("center must be 'raw' or 'around_y'")
        y_arr, flat = self._checked(y)
        if center == "raw":
            g = (lambda x, yy: x) if k == 1 else (lambda x, yy: x * x)
        else:
            g = (lambda x, yy: yy - x) if k == 1 else (lambda x, yy: (yy - x) ** 2)
        f, num = self.batch_integrals(flat, [(0, None), (0, g)])
        return self._shape(num / f, y_arr)

    def posterior_variance(self, y):
        y_arr, flat = self._checked(y)
        f, m1, m2 = self.batch_posterior(flat)
        return self._shape(np.maximum(m2 - m1 * m1, 0.0), y_arr)

    # -- scores ------------------------------------------------------------

    def batch_score(self, y):
        """``(f_Y, S_Y)`` with ``S_Y = f_Y' / f_Y`` masked where ``f_Y`` is degenerate."""
        f, d1 = self.batch_marginal(y, order=1)
        ok = f > self.degenerate_threshold
        return f, np.where(ok, d1 / np.where(ok, f, 1.0), 0.0)

    def score_location(self, y):
        """``d/dy log f_Y(y; a)``.

        The kernel is differentiated under the integral, with the jump of a
        discontinuous noise density at its lower edge added explicitly.
        """
        y_arr, flat = self._checked(y)
        return self._shape(self.batch_score(flat)[1], y_arr)

    def batch_dlog_da(self, y, diff: DiffConfig | None = None):
        """``d/da log f_Y(y; a)`` at fixed ``y`` by finite differences in ``a``."""
        y = np.atleast_1d(np.asarray(y, dtype=float))

        def logf(a_vals):
            a_vals = np.atleast_1d(a_vals)
            out = np.empty((a_vals.size, y.size))
            for i, av in enumerate(a_vals):
                f = self.with_a(float(av)).batch_marginal(y)[0]
                with np.errstate(divide="ignore"):
                    out[i] = np.log(np.maximum(f, 1e-300))
            return out[0] if out.shape[0] == 1 else out

        diff = diff or DEFAULT_DIFF
        h = stencil_reach(diff.base_step * max(self.a, 1.0), diff)
        if self.a - h <= 0:
            raise DomainViolation(f"a = {self.a:g} is too close to 0 for a step of {h:.3g}")
        return derivative(lambda av: logf(float(av)), self.a, cfg=diff, lower=0.0)

    def score_parameter(self, y, diff: DiffConfig | None = None):
        """``d/da log f_Y(y; a)`` at fixed ``y``."""
        y_arr, flat = self._checked(y)
        return self._shape(self.batch_dlog_da(flat, diff), y_arr)

    # -- kernel PDE --------------------------------------------------------

    def kernel_pde_residual(self, y, x, diff: DiffConfig | None = None):
        """``d/da k - ( -(1/2a) d/dy[(y - x) k] )`` by finite differences.

        Raises :class:`DomainViolation` when the stencil touches the edge of
        the kernel's support, where the kernel is not differentiable.
        """
        diff = diff or DEFAULT_DIFF
        y = np.asarray(y, dtype=float)
        x = np.asarray(x, dtype=float)
        u = y - x
        lo = self.noise_lower_edge
        if np.isfinite(lo):
            h_y = stencil_reach(diff.base_step * np.maximum(np.abs(y), 1.0), diff)
            h_a = stencil_reach(diff.base_step * max(self.a, 1.0), diff)
            gap = u - self.sqrt_a * lo
            reach = np.maximum(h_y, np.abs(u) * h_a / self.a)
            if np.any(np.abs(gap) <= 2 * reach):
                raise DomainViolation("kernel is not differentiable at the edge of its support")
        if self.a <= 2 * stencil_reach(diff.base_step * max(self.a, 1.0), diff):
            raise DomainViolation(f"a = {self.a:g} is too close to 0")
        lhs = derivative(lambda av: self.noise.pdf(u / np.sqrt(av)) / np.sqrt(av), self.a, cfg=diff, lower=0.0)
        rhs = -0.5 / self.a * derivative(lambda yv: (yv - x) * self.conditional_pdf(yv, x), y, cfg=diff)
        res = np.asarray(lhs - rhs)
        return float(res) if res.ndim == 0 else res

    # -- Monte Carlo support -----------------------------------------------

    def posterior_mean_raw(self, y, chunk: int = 512):
        """``E[X|y]`` without the degeneracy guard; only ``f_Y = 0`` gives 0."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.empty(y.size)
        for s in range(0, y.size, chunk):
            f, n1 = self.batch_integrals(y[s:s + chunk], [(0, None), (0, lambda x, yy: x)])
            out[s:s + chunk] = np.where(f > 0, n1 / np.where(f > 0, f, 1.0), 0.0)
        return out

    def posterior_mean_interpolant(self, n_grid: int = 4001):
        """Cubic spline of ``E[X|y]`` on an asinh-spaced grid over the y-support.

        Returns ``(spline, grid_error)`` where ``grid_error`` is the largest
        deviation from direct quadrature at the midpoints between grid nodes,
        taken over midpoints where ``f_Y`` is above the degeneracy threshold.
        """
        key = ("pm_spline", n_grid)
        if key not in self._cache:
            ys = self.y_support()
            centre = float(self.prior.quantile(0.5)) + self.sqrt_a * float(self.noise.quantile(0.5))
            scale = self.sqrt_a + 1.0
            t = np.linspace(np.arcsinh((ys.lo - centre) / scale), np.arcsinh((ys.hi - centre) / scale), n_grid)
            grid = centre + scale * np.sinh(t)
            spline = CubicSpline(grid, self.posterior_mean_raw(grid))
            mids = 0.5 * (grid[:-1] + grid[1:])
            live = self.batch_marginal(mids)[0] > self.degenerate_threshold
            dev = np.abs(spline(mids) - self.posterior_mean_raw(mids))[live]
            self._cache[key] = (spline, float(dev.max()) if dev.size else 0.0)
        return self._cache[key]

    def posterior_mean_fast(self, y, spline=None):
        """Posterior mean through the interpolant, with direct quadrature off the grid."""
        if spline is None:
            spline, _ = self.posterior_mean_interpolant()
        y = np.asarray(y, dtype=float)
        lo, hi = spline.x[0], spline.x[-1]
        out = spline(y)
        off = (y < lo) | (y > hi)
        if np.any(off):
            out[off] = self.posterior_mean_raw(y[off])
        return out


class CompanionChannel(AdditiveNoiseChannel):
    """Channel with gamma noise whose shape is shifted by ``shape_shift``.

    Shares the prior and ``a`` of ``base``; used to average base-channel
    quantities under ``Y_k = X + sqrt(a) W_k`` with ``W_k ~ Gamma(alpha + shift)``.
    """

    def __init__(self, base: AdditiveNoiseChannel, shape_shift: int):
        if int(shape_shift) != shape_shift:
            raise InvalidParameter("shape_shift must be an integer")
        noise = base.noise
        if noise.kind == "exponential":
            alpha, beta = 1.0, 1.0
        elif noise.kind == "gamma":
            alpha, beta = noise.params["alpha"], noise.params["beta"]
        else:
            raise Unsupported(f"companion channels need gamma-family noise, got {noise!r}")
        if alpha + shape_shift < 1:
            raise InvalidParameter(f"shifted shape {alpha + shape_shift:g} must be >= 1")
        super().__init__(base.prior, _gamma(alpha + shape_shift, beta), base.a, base.quad)
        self.base = base
        self.shape_shift = int(shape_shift)

    def __repr__(self):
        return f"CompanionChannel(base={self.base!r}, shape_shift={self.shape_shift})"

    def with_a(self, a: float) -> "CompanionChannel":
        return CompanionChannel(self.base.with_a(a), self.shape_shift)
