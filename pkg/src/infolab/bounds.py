"""MSE lower bounds for Gaussian-noise channels and the SNR sweep that compares them.

For ``Y = X + sqrt(a) W`` with ``W ~ N(0, 1)`` the bounds chain as::

    MMSE >= N(X|Y) >= 1 / (E_X[J(Y|X)] + J(X))

with equality throughout for a Gaussian prior.  ``N(X|Y)`` is the
conditional entropy power and the right end is the Bayesian Cramer-Rao
bound.
"""

from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import infomeasures as im
from .channel import AdditiveNoiseChannel
from .distributions import Distribution, gaussian, student_t
from .errors import InvalidParameter, PreconditionViolated

__all__ = [
    "bcrlb",
    "new_lower_bound",
    "OrderingReport",
    "check_ordering",
    "CostaReport",
    "costa_epi_check",
    "snr_to_a",
    "BoundsRow",
    "BoundsCurve",
    "figure1_sweep",
    "CSV_HEADER",
    "SNR_DEFINITION",
]

CSV_HEADER = "snr_db,a,mmse,bcrlb,new_lb,mc_error"
SNR_DEFINITION = "SNR = Var(X) / (a Var(W)); snr_db = 10 log10(SNR)"
ORDER_TOL = 1e-4


def _gaussian_noise(ch: AdditiveNoiseChannel, what: str):
    if ch.noise.kind != "gaussian":
        raise PreconditionViolated(f"{what} needs Gaussian noise, got {ch.noise!r}")


def bcrlb(ch: AdditiveNoiseChannel) -> float:
    """Bayesian Cramer-Rao bound ``1 / (E_X[J(Y|X)] + J(X))``; zero when ``J(X)`` is infinite."""
    _gaussian_noise(ch, "the Bayesian Cramer-Rao bound")
    return 1.0 / (im.conditional_fisher(ch) + im.prior_fisher(ch.prior, ch.quad))


def new_lower_bound(ch: AdditiveNoiseChannel) -> float:
    """Conditional entropy power ``N(X|Y)``, a lower bound on the MMSE."""
    return im.conditional_entropy_power(ch)


def fmt(x: float) -> str:
    """Full double precision, 17 significant digits."""
    return format(float(x), ".17g")


@dataclass
class OrderingReport:
    a: float
    mmse: float
    new_lb: float
    bcrlb: float
    mc_error: float
    tolerance: float
    passed: bool

    @property
    def gap_upper(self) -> float:
        return self.mmse - self.new_lb

    @property
    def gap_lower(self) -> float:
        return self.new_lb - self.bcrlb

    def __str__(self):
        return (f"{'PASS' if self.passed else 'FAIL'} a={self.a:g} mmse={self.mmse:.8g} new_lb={self.new_lb:.8g} "
                f"bcrlb={self.bcrlb:.8g} (mmse-new_lb={self.gap_upper:.3g}, new_lb-bcrlb={self.gap_lower:.3g})")


def ordering_holds(mmse: float, new_lb: float, low: float, mc_error: float = 0.0, tol: float = ORDER_TOL) -> bool:
    """``mmse >= new_lb >= bcrlb`` up to ``3 mc_error + tol`` on the MMSE side and ``tol`` below."""
    return bool(mmse >= new_lb - (3.0 * mc_error + tol) and new_lb >= low - tol)


def check_ordering(ch: AdditiveNoiseChannel, mmse_result: im.InfoMeasureResult | None = None,
                   tol: float = ORDER_TOL) -> OrderingReport:
    """Check ``MMSE >= N(X|Y) >= BCRLB`` on one channel.

    The MMSE defaults to quadrature; pass a Monte Carlo result to use its
    error in the tolerance.
    """
    _gaussian_noise(ch, "the bounds ordering")
    res = mmse_result or im.mmse(ch, "quadrature")
    mc_err = res.est_error if res.method == "monte_carlo" else 0.0
    nlb, low = new_lower_bound(ch), bcrlb(ch)
    return OrderingReport(ch.a, res.value, nlb, low, mc_err, tol, ordering_holds(res.value, nlb, low, mc_err, tol))


@dataclass
class CostaReport:
    """Concavity of ``a -> N(X + sqrt(a) W)`` along a grid.

    ``second_diffs[i]`` belongs to the interior point ``a_grid[i + 1]``;
    ``chord_gaps`` are ``N(a) - ((1 - a) N(X) + a N(X + W))`` at interior
    points with ``a <= 1``.
    """

    a_grid: np.ndarray
    entropy_powers: np.ndarray
    second_diffs: np.ndarray
    chord_a: np.ndarray
    chord_gaps: np.ndarray
    tolerance: float
    concave: bool
    chord_ok: bool

    @property
    def passed(self) -> bool:
        return self.concave and self.chord_ok


def _second_differences(a, n):
    h1 = a[1:-1] - a[:-2]
    h2 = a[2:] - a[1:-1]
    # reduces to n[i-1] - 2 n[i] + n[i+1] on a uniform grid
    return 2.0 * (h2 * n[:-2] + h1 * n[2:] - (h1 + h2) * n[1:-1]) / (h1 + h2)


def costa_epi_check(prior: Distribution, noise: Distribution | None = None, a_grid=None,
                    tol: float = 1e-5) -> CostaReport:
    """Second differences of ``N(X + sqrt(a) W)`` and the chord inequality on ``a_grid``."""
    noise = noise or gaussian()
    if noise.kind != "gaussian":
        raise PreconditionViolated(f"the concavity check needs Gaussian noise, got {noise!r}")
    a = np.asarray(a_grid if a_grid is not None else np.linspace(0.1, 1.0, 10), dtype=float)
    if a.ndim != 1 or a.size < 3 or np.any(a <= 0) or np.any(np.diff(a) <= 0):
        raise InvalidParameter("a_grid must be strictly increasing, positive, with at least 3 points")
    n = np.array([im.entropy_power(im.differential_entropy(AdditiveNoiseChannel(prior, noise, av))) for av in a])
    second = _second_differences(a, n)
    interior = a[1:-1]
    chord_a = interior[interior <= 1.0]
    n_x = im.entropy_power(im.differential_entropy(prior))
    hits = np.flatnonzero(np.isclose(a, 1.0, rtol=0, atol=1e-15))
    n_1 = n[hits[0]] if hits.size else im.entropy_power(im.differential_entropy(AdditiveNoiseChannel(prior, noise, 1.0)))
    n_chord = n[1:-1][interior <= 1.0]
    gaps = n_chord - ((1.0 - chord_a) * n_x + chord_a * n_1)
    return CostaReport(a, n, second, chord_a, gaps, tol,
                       concave=bool(np.all(second <= tol)), chord_ok=bool(np.all(gaps >= -tol)))


# -- SNR sweep -----------------------------------------------------------------

def snr_to_a(snr_db, var_x: float, var_w: float = 1.0):
    """Noise scale ``a`` giving ``snr_db`` under :data:`SNR_DEFINITION`."""
    return var_x / (var_w * 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0))


@dataclass(frozen=True)
class BoundsRow:
    snr_db: float
    a: float
    mmse: float
    bcrlb: float
    new_lb: float
    mc_error: float

    def ordered(self, tol: float = ORDER_TOL) -> bool:
        return ordering_holds(self.mmse, self.new_lb, self.bcrlb, self.mc_error, tol)

    def csv(self) -> str:
        return ",".join(fmt(v) for v in (self.snr_db, self.a, self.mmse, self.bcrlb, self.new_lb, self.mc_error))


@dataclass
class BoundsCurve:
    """Bounds over an SNR grid; ``crosscheck`` holds ``(snr_db, mc, quadrature, mc_error)`` triples."""

    prior_desc: str
    noise_desc: str
    rows: list
    crosscheck: list = field(default_factory=list)

    def __post_init__(self):
        snr = [r.snr_db for r in self.rows]
        if any(b <= a for a, b in zip(snr, snr[1:])):
            raise InvalidParameter("snr_db must be strictly increasing")

    def ordering_ok(self, tol: float = ORDER_TOL) -> bool:
        return all(r.ordered(tol) for r in self.rows)

    def crosscheck_ok(self, tol: float = ORDER_TOL) -> bool:
        return all(abs(mc - q) <= 3 * err + tol for _, mc, q, err in self.crosscheck)

    def gap(self, snr_db: float) -> float:
        """``new_lb - bcrlb`` at the grid point nearest ``snr_db``."""
        row = min(self.rows, key=lambda r: abs(r.snr_db - snr_db))
        return row.new_lb - row.bcrlb

    def csv_text(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for r in self.rows:
            buf.write(r.csv() + "\n")
        return buf.getvalue()

    def metadata(self) -> dict:
        return {"prior": self.prior_desc, "noise": self.noise_desc, "snr_definition": SNR_DEFINITION,
                "crosscheck": [dict(zip(("snr_db", "mmse_mc", "mmse_quadrature", "mc_error"), map(float, c)))
                               for c in self.crosscheck]}


def thread_count() -> int:
    """Worker threads from ``INFOLAB_THREADS`` (unset or 0 means one per CPU)."""
    raw = os.environ.get("INFOLAB_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise InvalidParameter(f"INFOLAB_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise InvalidParameter("INFOLAB_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def _point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def figure1_sweep(prior: Distribution | None = None, noise: Distribution | None = None, snr_grid_db=None,
                  mc_n: int = 1_000_000, seed: int = 0, crosscheck: bool = True,
                  workers: int | None = None) -> BoundsCurve:
    """MMSE (Monte Carlo), BCRLB and ``N(X|Y)`` across an SNR grid.

    Defaults: Student-t(3) prior, ``N(0, 1)`` noise, 41 points from -10 to
    30 dB.  Each point gets its own random stream derived from ``seed`` and
    its index, so results do not depend on the number of workers.  With
    ``crosscheck`` the MMSE is also computed by quadrature at the two ends
    and the middle of the grid.
    """
    prior = prior or student_t(3)
    noise = noise or gaussian()
    snr = np.asarray(snr_grid_db if snr_grid_db is not None else np.linspace(-10.0, 30.0, 41), dtype=float)
    if snr.ndim != 1 or snr.size < 1 or np.any(np.diff(snr) <= 0):
        raise InvalidParameter("snr grid must be strictly increasing")
    a_vals = snr_to_a(snr, prior.variance, noise.variance)

    def point(i):
        ch = AdditiveNoiseChannel(prior, noise, float(a_vals[i]))
        res = im.mmse(ch, "monte_carlo", n=mc_n, seed=_point_seed(seed, i))
        return BoundsRow(float(snr[i]), float(a_vals[i]), res.value, bcrlb(ch), new_lower_bound(ch), res.est_error)

    workers = workers or thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(point, range(snr.size)))
    else:
        rows = [point(i) for i in range(snr.size)]

    checks = []
    if crosscheck:
        for i in sorted({0, snr.size // 2, snr.size - 1}):
            q = im.mmse(AdditiveNoiseChannel(prior, noise, float(a_vals[i])), "quadrature").value
            checks.append((rows[i].snr_db, rows[i].mmse, q, rows[i].mc_error))
    return BoundsCurve(repr(prior), repr(noise), rows, checks)
