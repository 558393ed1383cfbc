"""Scalar laws used as priors and noises, plus the admissibility checks.

A :class:`Distribution` bundles the density (with its smooth-branch
derivatives), cdf/quantile, a sampler and the structural metadata the
identities care about: support, moments, whether an MGF exists, where the
density jumps.  MGF existence is declared per constructor rather than
discovered numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special

from .errors import InvalidParameter, UndefinedMoment, Unsupported
from .numerics import DEFAULT_QUAD, Interval, QuadratureConfig

__all__ = [
    "Distribution",
    "gaussian",
    "exponential_unit",
    "gamma_dist",
    "student_t",
    "truncated_gaussian",
    "from_spec",
    "AssumptionReport",
    "check_assumptions",
]

# Probabilities at which quantiles seed quadrature panels.
_TAIL_PROBS = np.array([1e-10, 1e-8, 1e-6, 1e-4, 1e-3, 1e-2])
_BODY_PROBS = np.linspace(0.05, 0.95, 19)


@dataclass(frozen=True, eq=False)
class Distribution:
    """A scalar probability law.

    ``pdf_d1``/``pdf_d2`` are derivatives of the density on the interior of
    its support (the smooth branch); behaviour at a finite lower edge is
    summarised by ``edge_limits = (pdf(lo+), pdf'(lo+))``.
    """

    kind: str
    params: dict
    pdf: Callable
    log_pdf: Callable
    pdf_d1: Callable
    pdf_d2: Callable
    cdf: Callable
    quantile: Callable
    sampler: Optional[Callable]
    support: tuple
    mean_value: Optional[float] = None
    variance_value: Optional[float] = None
    mgf: Optional[Callable] = None
    mgf_domain: Optional[tuple] = None
    bounded_pdf: bool = True
    jumps: tuple = ()
    edge_limits: tuple = (0.0, 0.0)
    mode: float = 0.0
    extra: dict = field(default_factory=dict)

    def __repr__(self):
        args = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.kind}({args})"

    @property
    def mean(self) -> float:
        if self.mean_value is None:
            raise UndefinedMoment(f"{self!r} has no mean")
        return self.mean_value

    @property
    def variance(self) -> float:
        if self.variance_value is None:
            raise UndefinedMoment(f"{self!r} has no finite variance")
        return self.variance_value

    @property
    def has_variance(self) -> bool:
        return self.variance_value is not None

    @property
    def has_mgf(self) -> bool:
        return self.mgf is not None

    @property
    def nonnegative(self) -> bool:
        return self.support[0] >= 0.0

    def dlog_pdf(self, x):
        """Score ``d/dx log pdf`` on the interior of the support."""
        x = np.asarray(x, dtype=float)
        p = self.pdf(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(p > 0, self.pdf_d1(x) / np.where(p > 0, p, 1.0), 0.0)

    def effective_support(self, tail_mass: float = DEFAULT_QUAD.tail_mass) -> Interval:
        """Finite support edges are kept, infinite ones move to the ``tail_mass`` quantile."""
        lo, hi = self.support
        if not np.isfinite(lo):
            lo = float(self.quantile(tail_mass))
        if not np.isfinite(hi):
            hi = float(self.quantile(1.0 - tail_mass))
        return Interval(float(lo), float(hi))

    def breakpoints(self, tail_mass: float = DEFAULT_QUAD.tail_mass) -> np.ndarray:
        """Panel edges that resolve the shape of the density, from quantiles."""
        key = ("breakpoints", tail_mass)
        if key not in self.extra:
            probs = np.concatenate([[tail_mass], _TAIL_PROBS, _BODY_PROBS, 1 - _TAIL_PROBS[::-1], [1 - tail_mass]])
            probs = probs[(probs >= tail_mass) & (probs <= 1 - tail_mass)]
            eff = self.effective_support(tail_mass)
            pts = np.concatenate([self.quantile(probs), [eff.lo, eff.hi, self.mode], self.jumps])
            pts = pts[np.isfinite(pts) & (pts >= eff.lo) & (pts <= eff.hi)]
            self.extra[key] = np.unique(pts)
        return self.extra[key]

    def sample(self, n: int, seed: int) -> np.ndarray:
        from .numerics import sample

        return sample(self, n, seed)


def _nonfinite_guard(x):
    return np.asarray(x, dtype=float)


def gaussian(mu: float = 0.0, var: float = 1.0) -> Distribution:
    """Normal law ``N(mu, var)``."""
    if not var > 0:
        raise InvalidParameter(f"gaussian variance must be positive, got {var}")
    mu, var = float(mu), float(var)
    sd = math.sqrt(var)
    norm = 1.0 / math.sqrt(2 * math.pi * var)

    def pdf(x):
        z = (_nonfinite_guard(x) - mu) / sd
        return norm * np.exp(-0.5 * z * z)

    def log_pdf(x):
        z = (_nonfinite_guard(x) - mu) / sd
        return math.log(norm) - 0.5 * z * z

    def d1(x):
        x = _nonfinite_guard(x)
        return -(x - mu) / var * pdf(x)

    def d2(x):
        x = _nonfinite_guard(x)
        return ((x - mu) ** 2 / var**2 - 1 / var) * pdf(x)

    return Distribution(
        kind="gaussian",
        params={"mu": mu, "var": var},
        pdf=pdf,
        log_pdf=log_pdf,
        pdf_d1=d1,
        pdf_d2=d2,
        cdf=lambda x: special.ndtr((_nonfinite_guard(x) - mu) / sd),
        quantile=lambda p: mu + sd * special.ndtri(p),
        sampler=lambda rng, n: rng.normal(mu, sd, n),
        support=(-math.inf, math.inf),
        mean_value=mu,
        variance_value=var,
        mgf=lambda t: np.exp(mu * np.asarray(t) + 0.5 * var * np.asarray(t) ** 2),
        mgf_domain=(-math.inf, math.inf),
        mode=mu,
    )


def _gamma(alpha: float, beta: float = 1.0) -> Distribution:
    # Unvalidated shape; companion channels need shapes below 2.
    alpha, beta = float(alpha), float(beta)
    log_norm = alpha * math.log(beta) - special.gammaln(alpha)

    def log_pdf(x):
        x = _nonfinite_guard(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = log_norm + (alpha - 1) * np.log(x) - beta * x
        return np.where(x > 0, out, -np.inf) if alpha != 1 else np.where(x >= 0, log_norm - beta * x, -np.inf)

    def pdf(x):
        return np.exp(log_pdf(x))

    def d1(x):
        x = _nonfinite_guard(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = pdf(x) * ((alpha - 1) / x - beta)
        return np.where(x > 0, out, 0.0)

    def d2(x):
        x = _nonfinite_guard(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (alpha - 1) / x - beta
            out = pdf(x) * (s * s - (alpha - 1) / x**2)
        return np.where(x > 0, out, 0.0)

    if alpha == 1:
        edge = (beta, -beta * beta)
    elif alpha == 2:
        edge = (0.0, beta**2)
    else:
        edge = (0.0, 0.0)
    return Distribution(
        kind="exponential" if alpha == 1 and beta == 1 else "gamma",
        params={} if alpha == 1 and beta == 1 else {"alpha": alpha, "beta": beta},
        pdf=pdf,
        log_pdf=log_pdf,
        pdf_d1=d1,
        pdf_d2=d2,
        cdf=lambda x: special.gammainc(alpha, beta * np.maximum(_nonfinite_guard(x), 0.0)),
        quantile=lambda p: special.gammaincinv(alpha, np.asarray(p, dtype=float)) / beta,
        sampler=lambda rng, n: rng.gamma(alpha, 1.0 / beta, n),
        support=(0.0, math.inf),
        mean_value=alpha / beta,
        variance_value=alpha / beta**2,
        mgf=lambda t: (1.0 - np.asarray(t) / beta) ** (-alpha),
        mgf_domain=(-math.inf, beta),
        bounded_pdf=alpha >= 1,
        jumps=(0.0,) if alpha == 1 else (),
        edge_limits=edge,
        mode=max(alpha - 1.0, 0.0) / beta,
    )


def exponential_unit() -> Distribution:
    """Exponential law with unit rate, ``f(w) = exp(-w) U(w)``."""
    return _gamma(1.0, 1.0)


def gamma_dist(alpha: float, beta: float = 1.0) -> Distribution:
    """Gamma law with shape ``alpha >= 2`` and rate ``beta``."""
    if not alpha >= 2:
        raise InvalidParameter(f"gamma shape must be >= 2, got {alpha}")
    if not beta > 0:
        raise InvalidParameter(f"gamma rate must be positive, got {beta}")
    return _gamma(alpha, beta)


def student_t(nu: float) -> Distribution:
    """Standard Student-t law with ``nu`` degrees of freedom (no MGF)."""
    if not nu > 0:
        raise InvalidParameter(f"degrees of freedom must be positive, got {nu}")
    nu = float(nu)
    log_norm = special.gammaln((nu + 1) / 2) - special.gammaln(nu / 2) - 0.5 * math.log(nu * math.pi)

    def log_pdf(x):
        x = _nonfinite_guard(x)
        return log_norm - (nu + 1) / 2 * np.log1p(x * x / nu)

    def pdf(x):
        return np.exp(log_pdf(x))

    def d1(x):
        x = _nonfinite_guard(x)
        return -(nu + 1) * x / (nu + x * x) * pdf(x)

    def d2(x):
        x = _nonfinite_guard(x)
        s = -(nu + 1) * x / (nu + x * x)
        ds = -(nu + 1) * (nu - x * x) / (nu + x * x) ** 2
        return (s * s + ds) * pdf(x)

    return Distribution(
        kind="student_t",
        params={"nu": nu},
        pdf=pdf,
        log_pdf=log_pdf,
        pdf_d1=d1,
        pdf_d2=d2,
        cdf=lambda x: special.stdtr(nu, _nonfinite_guard(x)),
        quantile=lambda p: special.stdtrit(nu, np.asarray(p, dtype=float)),
        sampler=lambda rng, n: rng.standard_t(nu, n),
        support=(-math.inf, math.inf),
        mean_value=0.0 if nu > 1 else None,
        variance_value=nu / (nu - 2) if nu > 2 else None,
        mode=0.0,
    )


def truncated_gaussian(mu: float = 0.0, var: float = 1.0, lo: float = -1.0, hi: float = 1.0) -> Distribution:
    """``N(mu, var)`` conditioned on ``[lo, hi]``; bounded support, MGF everywhere."""
    if not var > 0:
        raise InvalidParameter(f"variance must be positive, got {var}")
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise InvalidParameter(f"truncation needs finite lo < hi, got [{lo}, {hi}]")
    mu, var, lo, hi = float(mu), float(var), float(lo), float(hi)
    sd = math.sqrt(var)
    alpha, beta = (lo - mu) / sd, (hi - mu) / sd
    ca, cb = special.ndtr(alpha), special.ndtr(beta)
    mass = cb - ca
    phi_a, phi_b = math.exp(-0.5 * alpha**2), math.exp(-0.5 * beta**2)
    phi_a, phi_b = phi_a / math.sqrt(2 * math.pi), phi_b / math.sqrt(2 * math.pi)
    mean = mu + sd * (phi_a - phi_b) / mass
    variance = var * (1 + (alpha * phi_a - beta * phi_b) / mass - ((phi_a - phi_b) / mass) ** 2)
    inside = lambda x: (x >= lo) & (x <= hi)  # noqa: E731

    def log_pdf(x):
        x = _nonfinite_guard(x)
        z = (x - mu) / sd
        val = -0.5 * z * z - 0.5 * math.log(2 * math.pi * var) - math.log(mass)
        return np.where(inside(x), val, -np.inf)

    def pdf(x):
        return np.exp(log_pdf(x))

    def d1(x):
        x = _nonfinite_guard(x)
        return -(x - mu) / var * pdf(x)

    def d2(x):
        x = _nonfinite_guard(x)
        return ((x - mu) ** 2 / var**2 - 1 / var) * pdf(x)

    def quantile(p):
        return mu + sd * special.ndtri(ca + np.asarray(p, dtype=float) * mass)

    def mgf(t):
        t = np.asarray(t, dtype=float)
        shift = sd * t
        num = special.ndtr(beta - shift) - special.ndtr(alpha - shift)
        return np.exp(mu * t + 0.5 * var * t * t) * num / mass

    return Distribution(
        kind="truncated_gaussian",
        params={"mu": mu, "var": var, "lo": lo, "hi": hi},
        pdf=pdf,
        log_pdf=log_pdf,
        pdf_d1=d1,
        pdf_d2=d2,
        cdf=lambda x: np.clip((special.ndtr((_nonfinite_guard(x) - mu) / sd) - ca) / mass, 0.0, 1.0),
        quantile=quantile,
        sampler=lambda rng, n: quantile(rng.random(n)),
        support=(lo, hi),
        mean_value=mean,
        variance_value=variance,
        mgf=mgf,
        mgf_domain=(-math.inf, math.inf),
        jumps=(lo, hi),
        edge_limits=(float(pdf(lo)), float(d1(lo))),
        mode=min(max(mu, lo), hi),
    )


_CONSTRUCTORS = {
    "gaussian": lambda p: gaussian(p.get("mu", 0.0), p.get("var", 1.0)),
    "exponential": lambda p: exponential_unit(),
    "gamma": lambda p: gamma_dist(p["alpha"], p.get("beta", 1.0)),
    "student_t": lambda p: student_t(p["nu"]),
    "truncated_gaussian": lambda p: truncated_gaussian(p.get("mu", 0.0), p.get("var", 1.0), p["lo"], p["hi"]),
}


def from_spec(spec: dict) -> Distribution:
    """Build a law from ``{"kind": ..., params...}`` as used in run configs."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidParameter(f"distribution spec needs a 'kind' key, got {spec!r}")
    kind = spec["kind"]
    if kind not in _CONSTRUCTORS:
        raise InvalidParameter(f"unknown distribution kind {kind!r}; expected one of {sorted(_CONSTRUCTORS)}")
    params = {k: v for k, v in spec.items() if k != "kind"}
    try:
        return _CONSTRUCTORS[kind](params)
    except KeyError as exc:
        raise InvalidParameter(f"{kind} spec is missing parameter {exc.args[0]!r}") from None


def to_spec(dist: Distribution) -> dict:
    return {"kind": dist.kind, **dist.params}


# ---------------------------------------------------------------------------
# Admissibility
# ---------------------------------------------------------------------------

IDENTITY_KINDS = ("first_derivative", "second_derivative")
NOISE_KINDS = ("gaussian", "exponential", "gamma")


@dataclass
class AssumptionReport:
    """Pass/fail per numerically checkable condition."""

    subject: str
    role: str
    identity: str
    checks: dict = field(default_factory=dict)

    def add(self, name: str, ok: bool, detail: str = ""):
        self.checks[name] = (bool(ok), detail)

    @property
    def passed(self) -> bool:
        return all(ok for ok, _ in self.checks.values())

    @property
    def failed(self) -> list:
        return [name for name, (ok, _) in self.checks.items() if not ok]

    def __str__(self):
        lines = [f"{self.subject} as {self.role} ({self.identity}): {'pass' if self.passed else 'FAIL'}"]
        for name, (ok, detail) in self.checks.items():
            lines.append(f"  [{'ok' if ok else 'FAIL'}] {name}{': ' + detail if detail else ''}")
        return "\n".join(lines)


def _tail_decay(dist: Distribution, power: int, cfg: QuadratureConfig, limit: float = 1e-6):
    eff = dist.effective_support(cfg.tail_mass)
    edges = [x for x, finite in ((eff.lo, not np.isfinite(dist.support[0])), (eff.hi, not np.isfinite(dist.support[1]))) if finite]
    worst = max((abs(x) ** power * float(dist.pdf(x)) for x in edges), default=0.0)
    return worst <= limit, f"max |x|^{power} f(x) at truncation edges = {worst:.3g}"


def check_assumptions(dist: Distribution, role: str, identity: str, counterpart: Distribution | None = None,
                      cfg: QuadratureConfig | None = None) -> AssumptionReport:
    """Check the numerically verifiable regularity conditions; never raises.

    ``counterpart`` is the other end of the channel (the noise when ``dist``
    is the prior and vice versa); conditions that couple the two, such as
    the prior MGF requirement under exponential or gamma noise, are only
    checked when it is given.
    """
    cfg = cfg or DEFAULT_QUAD
    report = AssumptionReport(repr(dist), role, identity)
    if role not in ("prior", "noise"):
        report.add("role", False, f"unknown role {role!r}")
        return report
    if identity not in IDENTITY_KINDS:
        report.add("identity", False, f"unknown identity kind {identity!r}")
        return report
    second = identity == "second_derivative"

    if role == "noise":
        noise, prior = dist, counterpart
    else:
        noise, prior = counterpart, dist

    if noise is not None:
        fam_ok = noise.kind in NOISE_KINDS
        report.add("noise_family", fam_ok, f"{noise.kind} noise" + ("" if fam_ok else " is not supported"))
        if noise.kind == "gamma":
            need = 3.0 if second else 2.0
            alpha = noise.params["alpha"]
            report.add("gamma_shape", alpha >= need, f"alpha = {alpha:g}, need >= {need:g}")
            report.add("gamma_rate", noise.params["beta"] == 1.0, f"beta = {noise.params['beta']:g}, need 1")
        if noise.kind == "gaussian":
            unit = noise.params["mu"] == 0.0 and noise.params["var"] == 1.0
            report.add("unit_gaussian", unit, "noise must be N(0, 1)")

    if prior is not None:
        report.add("finite_second_moment", prior.has_variance,
                   "variance " + (f"= {prior.variance_value:g}" if prior.has_variance else "undefined"))
        report.add("bounded_pdf", prior.bounded_pdf, "")
        ok, detail = _tail_decay(prior, 2, cfg)
        report.add("tail_decay", ok, detail)
        non_gaussian_noise = noise is not None and noise.kind in ("exponential", "gamma")
        if non_gaussian_noise:
            report.add("mgf_exists", prior.has_mgf, "prior MGF " + ("declared" if prior.has_mgf else "undefined"))
            report.add("nonnegative_support", prior.nonnegative, f"prior support starts at {prior.support[0]:g}")
            if second:
                interior = [j for j in prior.jumps if j > prior.support[0]]
                report.add("continuous_pdf", not interior,
                           "pdf jumps at " + ", ".join(f"{j:g}" for j in interior) if interior else "")
    elif role == "noise" and noise is not None and noise.kind in ("exponential", "gamma"):
        report.add("mgf_exists", noise.has_mgf, "")
    return report
