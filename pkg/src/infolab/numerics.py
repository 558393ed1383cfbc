"""Quadrature, finite differences and seeded sampling.

Everything else in the package reduces its integrals and derivatives to the
three entry points here: :func:`integrate`, :func:`derivative` and
:func:`sample`.  Integrands are expected to be vectorised: they receive a 1-D
array of nodes and return an array whose last axis matches the nodes (extra
leading axes are integrated component-wise by :func:`integrate_many`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainViolation, InvalidParameter, NonConvergence, NonFinite, Unsupported

__all__ = [
    "Interval",
    "QuadratureConfig",
    "DiffConfig",
    "integrate",
    "integrate_many",
    "panel_rule",
    "derivative",
    "richardson_extrapolate",
    "sample",
]

GL_ORDER = 15
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise InvalidParameter(f"interval must be finite after truncation, got [{self.lo}, {self.hi}]")
        if not self.lo < self.hi:
            raise InvalidParameter(f"interval needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x)
        return (x >= self.lo) & (x <= self.hi)


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and truncation policy for every integral in the package.

    ``tail_mass`` is the probability left out on each side when an infinite
    support is cut down to a finite interval.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000
    tail_mass: float = 1e-12

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise InvalidParameter("rel_tol must be positive")
        if not self.abs_tol > 0:
            raise InvalidParameter("abs_tol must be positive")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise InvalidParameter("max_subdivisions must be a positive integer")
        if not 0 < self.tail_mass <= 1e-6:
            raise InvalidParameter("tail_mass must lie in (0, 1e-6]")


@dataclass(frozen=True)
class DiffConfig:
    """Step policy for :func:`derivative`; the step is ``base_step * max(|x0|, 1)``."""

    base_step: float = 1e-4
    richardson_levels: int = 3

    def __post_init__(self):
        if not self.base_step > 0:
            raise InvalidParameter("base_step must be positive")
        if int(self.richardson_levels) != self.richardson_levels or self.richardson_levels < 1:
            raise InvalidParameter("richardson_levels must be an integer >= 1")


DEFAULT_QUAD = QuadratureConfig()
DEFAULT_DIFF = DiffConfig()


def _as_interval(domain) -> Interval:
    if isinstance(domain, Interval):
        return domain
    lo, hi = domain
    return Interval(float(lo), float(hi))


def panel_rule(edges) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on consecutive panels.

    ``edges`` may carry leading batch axes; the result has shape
    ``edges.shape[:-1] + ((edges.shape[-1] - 1) * 15,)``.  Zero-width panels
    are allowed and simply contribute nothing.
    """
    edges = np.asarray(edges, dtype=float)
    lo = edges[..., :-1, None]
    hi = edges[..., 1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * _GL_NODES
    weights = half * _GL_WEIGHTS
    shape = edges.shape[:-1] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)


def _eval_panels(f, lo, hi):
    nodes, weights = panel_rule(np.stack([lo, hi], axis=-1))
    values = np.asarray(f(nodes.ravel()), dtype=float)
    if values.ndim == 0 or values.shape[-1] != nodes.size:
        values = np.broadcast_to(values, values.shape[:-1] + (nodes.size,))
    if not np.all(np.isfinite(values)):
        bad = ~np.all(np.isfinite(values.reshape(-1, nodes.size)), axis=0)
        raise NonFinite(f"integrand is not finite at x = {nodes.ravel()[bad][:3]}")
    values = values.reshape(values.shape[:-1] + nodes.shape)
    contrib = values * weights
    return contrib.sum(axis=-1), np.abs(contrib).sum(axis=-1)


def integrate_many(f, domain, cfg: QuadratureConfig | None = None, points=None):
    """Globally adaptive Gauss-Legendre integration of a (possibly vector-valued) integrand.

    Every panel carries an error estimate, the difference between its
    one-panel rule and the sum over its two halves.  While the summed
    estimate exceeds ``max(abs_tol, rel_tol * |I|)``, the panels with the
    largest estimates are bisected.  Panels whose estimate is already at the
    rounding floor of their contributions are never split.  ``points`` are
    extra breakpoints (kinks, jumps) that seed the initial partition.

    Returns ``(value, error_estimate)``; ``value`` has the integrand's
    leading shape.
    """
    cfg = cfg or DEFAULT_QUAD
    dom = _as_interval(domain)
    edges = np.array([dom.lo, dom.hi])
    if points is not None:
        pts = np.asarray(points, dtype=float).ravel()
        pts = pts[np.isfinite(pts) & (pts > dom.lo) & (pts < dom.hi)]
        edges = np.unique(np.concatenate([edges, pts]))
    lo, hi = edges[:-1], edges[1:]
    whole, _ = _eval_panels(f, lo, hi)
    left, right, err, floor = _split_stats(f, lo, hi, whole)

    eps = np.finfo(float).eps
    subdivisions = 0
    while True:
        total = (left + right).sum(axis=-1)
        tol = max(cfg.abs_tol, cfg.rel_tol * float(np.max(np.abs(total))))
        total_err = float(err.sum())
        if total_err <= tol:
            break
        refinable = err > 50 * eps * floor
        if not np.any(refinable):
            break
        # bisect the largest estimates until what is left fits in half the budget
        idx = np.flatnonzero(refinable)
        idx = idx[np.argsort(err[idx])[::-1]]
        remaining = total_err - np.cumsum(err[idx])
        count = int(np.searchsorted(-remaining, -0.5 * tol)) + 1
        pick = np.zeros(lo.size, dtype=bool)
        pick[idx[:count]] = True
        subdivisions += int(pick.sum())
        if subdivisions > cfg.max_subdivisions:
            raise NonConvergence(
                f"quadrature on [{dom.lo}, {dom.hi}] exceeded {cfg.max_subdivisions} subdivisions "
                f"(error estimate {total_err:.3g}, target {tol:.3g})"
            )
        mid = 0.5 * (lo[pick] + hi[pick])
        c_lo = np.concatenate([lo[pick], mid])
        c_hi = np.concatenate([mid, hi[pick]])
        c_whole = np.concatenate([left[..., pick], right[..., pick]], axis=-1)
        c_left, c_right, c_err, c_floor = _split_stats(f, c_lo, c_hi, c_whole)
        keep = ~pick
        lo = np.concatenate([lo[keep], c_lo])
        hi = np.concatenate([hi[keep], c_hi])
        left = np.concatenate([left[..., keep], c_left], axis=-1)
        right = np.concatenate([right[..., keep], c_right], axis=-1)
        err = np.concatenate([err[keep], c_err])
        floor = np.concatenate([floor[keep], c_floor])
    return (left + right).sum(axis=-1), float(err.sum())


def _split_stats(f, lo, hi, whole):
    # halves of each panel, the per-panel error estimate and its rounding scale
    mid = 0.5 * (lo + hi)
    left, left_abs = _eval_panels(f, lo, mid)
    right, right_abs = _eval_panels(f, mid, hi)
    n = lo.size
    err = np.abs(left + right - whole).reshape(-1, n).max(axis=0)
    floor = (left_abs + right_abs).reshape(-1, n).max(axis=0)
    return left, right, err, floor


def integrate(f, domain, cfg: QuadratureConfig | None = None, points=None) -> float:
    """Integrate a scalar, vectorised integrand over a finite interval.

    >>> integrate(lambda x: np.ones_like(x), (0.0, 1.0))
    1.0
    """
    value, _ = integrate_many(f, domain, cfg, points)
    return float(value)


def richardson_extrapolate(values, p: int, r: float = 2.0):
    """Eliminate error terms ``h**p, h**(2p), ...`` from a sequence with steps ``h / r**k``.

    ``values`` run from the coarsest step to the finest.
    """
    vals = [np.asarray(v, dtype=float) for v in values]
    n = len(vals)
    for j in range(1, n):
        factor = r ** (p * j)
        for k in range(n - 1, j - 1, -1):
            vals[k] = (factor * vals[k] - vals[k - 1]) / (factor - 1.0)
    out = vals[-1]
    return float(out) if out.ndim == 0 else out


def derivative(f, x0, order: int = 1, cfg: DiffConfig | None = None, lower=None, upper=None,
               one_sided: bool = False):
    """First or second derivative by central differences plus Richardson extrapolation.

    The finest step is ``h = base_step * max(|x0|, 1)``; extrapolation uses
    the ladder ``h, 2h, 4h, ...`` so that rounding error stays at the level
    of the finest stencil.

    ``lower``/``upper`` bound the open domain on which ``f`` is valid.  A
    central stencil that would touch a bound raises :class:`DomainViolation`
    unless ``one_sided`` is set, in which case points whose stencil would
    reach the lower bound use forward differences instead.

    ``x0`` may be an array; ``f`` must then be vectorised.
    """
    if order not in (1, 2):
        raise InvalidParameter("order must be 1 or 2")
    cfg = cfg or DEFAULT_DIFF
    x = np.asarray(x0, dtype=float)
    h = cfg.base_step * np.maximum(np.abs(x), 1.0)

    reach = stencil_reach(h, cfg)

    forward = np.zeros(x.shape, dtype=bool)
    if lower is not None:
        too_close = x - reach <= lower
        if one_sided:
            forward = too_close
            if np.any(x <= lower):
                raise DomainViolation(f"x0 must exceed {lower}")
        elif np.any(too_close):
            raise DomainViolation(f"central stencil of width {np.max(reach):.3g} crosses the bound {lower}")
    if upper is not None:
        span = 2 * reach if one_sided else reach
        if np.any(x + span >= upper):
            raise DomainViolation(f"stencil crosses the upper bound {upper}")

    if np.all(forward):
        return _forward(f, x, h, order, cfg.richardson_levels)
    central = _central(f, x, h, order, cfg.richardson_levels)
    if not np.any(forward):
        return central
    out = np.array(central, dtype=float)
    out[forward] = _forward(f, x[forward], h[forward], order, cfg.richardson_levels)
    return out


def stencil_reach(h, cfg: DiffConfig):
    """Distance from ``x0`` to the outermost central stencil point."""
    return h * 2.0 ** (cfg.richardson_levels - 1)


def _call(f, x):
    return np.asarray(f(x), dtype=float)


def _central(f, x, h, order, levels):
    estimates = []
    f0 = _call(f, x) if order == 2 else None
    for k in reversed(range(levels)):
        hk = h * 2**k
        fp, fm = _call(f, x + hk), _call(f, x - hk)
        if order == 1:
            estimates.append((fp - fm) / (2 * hk))
        else:
            estimates.append((fp - 2 * f0 + fm) / hk**2)
    return richardson_extrapolate(estimates, p=2)


def _forward(f, x, h, order, levels):
    estimates = []
    f0 = _call(f, x)
    for k in reversed(range(levels)):
        hk = h * 2**k
        if order == 1:
            estimates.append((_call(f, x + hk) - f0) / hk)
        else:
            estimates.append((_call(f, x + 2 * hk) - 2 * _call(f, x + hk) + f0) / hk**2)
    return richardson_extrapolate(estimates, p=1)


def sample(dist, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` samples from ``dist`` with a private generator seeded by ``seed``."""
    if getattr(dist, "sampler", None) is None:
        raise Unsupported(f"{dist!r} has no sampler")
    if int(n) != n or n < 1:
        raise InvalidParameter("n must be a positive integer")
    rng = np.random.default_rng(seed)
    return np.asarray(dist.sampler(rng, int(n)), dtype=float)
