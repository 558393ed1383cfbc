"""Acceptance suite: one test per numbered criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the terminal summary
repeats the twelve lines at the end.
"""

import time

import numpy as np
import pytest

from infolab import bounds as bd
from infolab import identities as ids
from infolab import infomeasures as im
from infolab.channel import AdditiveNoiseChannel
from infolab.distributions import _CONSTRUCTORS, exponential_unit, gamma_dist, gaussian, student_t, truncated_gaussian
from infolab.numerics import QuadratureConfig, derivative, integrate, sample

G = gaussian()
A3 = (0.5, 1.0, 2.0)

# (label, prior, noise) for the general-noise identities; priors are admissible for each noise
FIRST_CATALOG = [
    ("t3/gauss", student_t(3), G),
    ("gamma2/exp", gamma_dist(2.0), exponential_unit()),
    ("gamma3/gamma2", gamma_dist(3.0), gamma_dist(2.0)),
]
# the gamma-noise second-derivative identity needs shape >= 3
SECOND_CATALOG = [
    ("t3/gauss", student_t(3), G, "cor5"),
    ("gamma2/exp", gamma_dist(2.0), exponential_unit(), "cor6"),
    ("gamma2/gamma3", gamma_dist(2.0), gamma_dist(3.0), "cor7"),
]
GAUSS_NOISE_PRIORS = [("gauss", G), ("t3", student_t(3)), ("trunc", truncated_gaussian()), ("gamma3", gamma_dist(3.0))]


def _worst(pairs):
    return max(pairs, key=lambda p: p[1])


def test_criterion_01_de_bruijn(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for a in (0.25, 0.5, 1.0, 2.0, 5.0):
        rep = ids.verify_de_bruijn(AdditiveNoiseChannel(G, G, a), tol=1e-5)
        exact = 1 / (2 * (1 + a))
        worst = max(worst, abs(rep.lhs - exact), abs(rep.rhs - exact))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-5 and elapsed < 10
    criterion(1, ok, f"max |side - 1/(2(1+a))| = {worst:.2e} (tol 1e-5), {elapsed:.1f} s (limit 10 s)")
    assert ok


def test_criterion_02_generalized_stein(criterion):
    res = []
    for label, prior in (("gauss", G), ("t3", student_t(3))):
        for a in A3:
            rep = ids.verify_generalized_stein(AdditiveNoiseChannel(prior, G, a), tol=1e-4)
            res.append((f"{label} a={a:g}", rep.abs_residual))
    where, worst = _worst(res)
    ok = worst <= 1e-4
    criterion(2, ok, f"max residual {worst:.2e} at {where} (tol 1e-4)")
    assert ok


def test_criterion_03_heat_equation(criterion):
    ch = AdditiveNoiseChannel(G, G, 1.0)
    res = [(g, ids.verify_heat_equation(ch, g, tol=1e-4).abs_residual) for g in ("y2", "y4", "cos")]
    where, worst = _worst(res)
    ok = worst <= 1e-4
    criterion(3, ok, f"max residual {worst:.2e} for g={where} (tol 1e-4)")
    assert ok


def test_criterion_04_first_derivative_general_noise(criterion):
    res, agree = [], []
    for label, prior, noise in FIRST_CATALOG:
        for a in A3:
            ch = AdditiveNoiseChannel(prior, noise, a)
            t6 = ids.verify_thm6(ch, tol=1e-3)
            res.append((f"{label} a={a:g}", t6.abs_residual))
            if noise.kind == "exponential":
                agree.append((f"cor2 {label} a={a:g}", abs(ids.verify_cor2_exponential(ch, tol=1e-3).rhs - t6.lhs)))
            elif noise.kind == "gamma":
                agree.append((f"cor3 {label} a={a:g}", abs(ids.verify_cor3_gamma(ch, tol=1e-3).rhs - t6.lhs)))
    where, worst = _worst(res)
    where_c, worst_c = _worst(agree)
    ok = worst <= 1e-3 and worst_c <= 1e-3
    criterion(4, ok, f"thm6 max residual {worst:.2e} ({where}); corollary vs thm6 lhs {worst_c:.2e} ({where_c}) "
                     f"(tol 1e-3)")
    assert ok


def test_criterion_05_second_derivative(criterion):
    res = []
    for label, prior, noise, cor in SECOND_CATALOG:
        for a in A3:
            ch = AdditiveNoiseChannel(prior, noise, a)
            res.append((f"thm7 {label} a={a:g}", ids.verify_thm7(ch, tol=5e-3).abs_residual))
            res.append((f"{cor} {label} a={a:g}", ids.VERIFIERS[cor](ch, tol=5e-3).abs_residual))
    where, worst = _worst(res)
    analytic = max(abs(ids.entropy_derivative(AdditiveNoiseChannel(G, G, a), order=2) + 1 / (2 * (1 + a) ** 2))
                   for a in A3)
    ok = worst <= 5e-3 and analytic <= 1e-3
    criterion(5, ok, f"max residual {worst:.2e} ({where}, tol 5e-3); Gaussian d2h/da2 error {analytic:.2e} "
                     f"(tol 1e-3)")
    assert ok


def test_criterion_06_lemma3(criterion):
    res = []
    for label, prior in GAUSS_NOISE_PRIORS:
        for a in A3:
            res.append((f"{label} a={a:g}", ids.verify_lemma3(AdditiveNoiseChannel(prior, G, a), tol=1e-3).abs_residual))
    where, worst = _worst(res)
    analytic = 0.0
    for a in A3:
        rep = ids.verify_lemma3(AdditiveNoiseChannel(G, G, a))
        exact = -1 / (1 + a) ** 2
        analytic = max(analytic, abs(rep.lhs - exact), abs(rep.rhs - exact))
    ok = worst <= 1e-3 and analytic <= 1e-4
    criterion(6, ok, f"max residual {worst:.2e} ({where}, tol 1e-3); Gaussian -1/(1+a)^2 error {analytic:.2e} "
                     f"(tol 1e-4)")
    assert ok


def test_criterion_07_fii(criterion):
    gaps, eq = [], 0.0
    for label, prior in GAUSS_NOISE_PRIORS:
        for a in A3:
            rep = ids.verify_fii(AdditiveNoiseChannel(prior, G, a))
            gap = rep.lhs - rep.rhs
            gaps.append((f"{label} a={a:g}", gap))
            if label == "gauss":
                eq = max(eq, abs(gap))
    where, low = min(gaps, key=lambda p: p[1])
    ok = low >= -1e-6 and eq <= 1e-6
    criterion(7, ok, f"min gap {low:.2e} ({where}, must be >= -1e-6); Gaussian |gap| {eq:.2e} (tol 1e-6)")
    assert ok


@pytest.fixture(scope="module")
def figure1():
    t0 = time.perf_counter()
    curve = bd.figure1_sweep()
    return curve, time.perf_counter() - t0


def test_criterion_08_bounds_ordering(criterion, figure1):
    curve, elapsed = figure1
    rows = curve.rows
    grid_ok = len(rows) == 41 and rows[0].snr_db == -10 and rows[-1].snr_db == 30
    ordered = all(r.ordered(1e-4) for r in rows)
    slack = min(min(r.mmse - r.new_lb + 3 * r.mc_error + 1e-4, r.new_lb - r.bcrlb + 1e-4) for r in rows)
    # Gaussian prior: all three coincide; checked with the quadrature MMSE and with Monte Carlo
    triple, mc_ok = 0.0, True
    g_curve = bd.figure1_sweep(prior=G, snr_grid_db=np.linspace(-10, 30, 9), mc_n=1_000_000, crosscheck=False)
    for r in g_curve.rows:
        exact = r.a / (1 + r.a)
        q = im.mmse(AdditiveNoiseChannel(G, G, r.a)).value
        triple = max(triple, abs(q - exact), abs(r.new_lb - exact), abs(r.bcrlb - exact))
        mc_ok &= abs(r.mmse - exact) <= 3 * r.mc_error + 1e-4
    ok = grid_ok and ordered and triple <= 1e-4 and mc_ok and elapsed < 300
    criterion(8, ok, f"ordering at {sum(r.ordered(1e-4) for r in rows)}/41 points (min slack {slack:.2e}); "
                     f"Gaussian triple equality {triple:.2e} (tol 1e-4), MC within 3 sigma: {mc_ok}; "
                     f"sweep {elapsed:.0f} s (limit 300 s)")
    assert ok


def test_criterion_09_gap_structure(criterion, figure1):
    curve, _ = figure1
    low, high = curve.gap(-10.0), curve.gap(20.0)
    ok = low > high
    criterion(9, ok, f"new_lb - bcrlb = {low:.4g} at -10 dB vs {high:.3g} at +20 dB")
    assert ok


def test_criterion_10_costa(criterion):
    parts, ok = [], True
    for label, prior in (("gauss", G), ("t3", student_t(3)), ("trunc", truncated_gaussian())):
        rep = bd.costa_epi_check(prior, a_grid=np.linspace(0.1, 1.0, 10), tol=1e-5)
        good = rep.passed
        if label == "gauss":
            good &= bool(np.all(np.abs(rep.second_diffs) <= 1e-5))
        ok &= good
        parts.append(f"{label}: max d2 {rep.second_diffs.max():.1e}, min chord gap {rep.chord_gaps.min():.1e}")
    criterion(10, ok, "; ".join(parts) + " (tol 1e-5)")
    assert ok


def test_criterion_11_kernel_pde(criterion):
    rng = np.random.default_rng(2024)
    parts, ok = [], True
    for label, noise in (("gauss", G), ("exp", exponential_unit()), ("gamma2", gamma_dist(2.0)),
                         ("gamma3", gamma_dist(3.0))):
        worst = 0.0
        for _ in range(100):
            a = rng.uniform(0.2, 5.0)
            x = rng.normal(0.0, 2.0)
            w = rng.uniform(0.3, 6.0) if noise.support[0] == 0 else rng.normal(0.0, 1.5)
            ch = AdditiveNoiseChannel(G, noise, a)
            worst = max(worst, abs(ch.kernel_pde_residual(x + ch.sqrt_a * w, x)))
        ok &= worst <= 1e-5
        parts.append(f"{label} {worst:.1e}")
    criterion(11, ok, "max residual over 100 points: " + ", ".join(parts) + " (tol 1e-5)")
    assert ok


def test_criterion_12_numerics_self_test(criterion):
    cfg = QuadratureConfig()
    laws = [gaussian(0.3, 2.0), exponential_unit(), gamma_dist(2.5, 2.0), student_t(3), student_t(1),
            truncated_gaussian(0.0, 1.0, -0.5, 2.0)]
    assert {d.kind for d in laws} == set(_CONSTRUCTORS)
    norm = max(abs(integrate(d.pdf, d.effective_support(cfg.tail_mass), cfg,
                             points=d.breakpoints(cfg.tail_mass)) - 1) for d in laws)
    rng = np.random.default_rng(12)
    cubic = 0.0
    for _ in range(200):
        p = np.polynomial.Polynomial(rng.uniform(-10, 10, 4))
        x0 = rng.uniform(-5, 5)
        exact = p.deriv()(x0)
        cubic = max(cubic, abs(derivative(p, x0) - exact) / max(abs(exact), 1.0))
    same = all(sample(d, 10_000, 77).tobytes() == sample(d, 10_000, 77).tobytes() for d in laws)
    grid = np.linspace(-10, 30, 3)
    runs = [bd.figure1_sweep(snr_grid_db=grid, mc_n=20_000, seed=5, crosscheck=False).csv_text() for _ in range(2)]
    same &= runs[0] == runs[1]
    ok = norm <= 1e-9 and cubic <= 1e-8 and same
    criterion(12, ok, f"normalisation error {norm:.1e} (tol 1e-9); cubic derivative error {cubic:.1e} (tol 1e-8); "
                      f"byte-identical reruns: {same}")
    assert ok
