import numpy as np
import pytest

from infolab import bounds as bd
from infolab.channel import AdditiveNoiseChannel
from infolab.distributions import exponential_unit, gaussian, student_t, truncated_gaussian
from infolab.errors import InvalidParameter, PreconditionViolated

G = gaussian()


@pytest.mark.parametrize("a", [0.01, 0.1, 1.0, 10.0, 100.0])
def test_gaussian_triple_equality(a):
    rep = bd.check_ordering(AdditiveNoiseChannel(G, G, a))
    target = a / (1 + a)
    for v in (rep.mmse, rep.new_lb, rep.bcrlb):
        assert abs(v - target) <= 1e-4
    assert rep.passed


@pytest.mark.parametrize("prior", [G, student_t(3), truncated_gaussian()], ids=repr)
@pytest.mark.parametrize("a", [0.1, 1.0, 10.0])
def test_ordering_catalog(prior, a):
    rep = bd.check_ordering(AdditiveNoiseChannel(prior, G, a))
    assert rep.passed, str(rep)


def test_bcrlb_is_zero_without_prior_fisher():
    assert bd.bcrlb(AdditiveNoiseChannel(truncated_gaussian(), G, 1.0)) == 0.0


def test_gaussian_noise_required():
    ch = AdditiveNoiseChannel(G, exponential_unit(), 1.0)
    with pytest.raises(PreconditionViolated):
        bd.bcrlb(ch)
    with pytest.raises(PreconditionViolated):
        bd.costa_epi_check(G, exponential_unit())


@pytest.mark.parametrize("prior", [G, student_t(3), truncated_gaussian()], ids=repr)
def test_costa_concavity(prior):
    rep = bd.costa_epi_check(prior)
    assert rep.passed
    assert np.all(rep.second_diffs <= 1e-5)
    assert np.all(rep.chord_gaps >= -1e-5)
    if prior.kind == "gaussian":
        assert np.all(np.abs(rep.second_diffs) <= 1e-5)
        assert rep.entropy_powers == pytest.approx(1 + rep.a_grid, rel=1e-9)
    if prior.kind == "student_t":
        at_half = rep.second_diffs[np.flatnonzero(np.isclose(rep.a_grid[1:-1], 0.5))[0]]
        assert at_half < -1e-4


def test_costa_grid_validation():
    with pytest.raises(InvalidParameter):
        bd.costa_epi_check(G, a_grid=[0.5, 0.2, 1.0])


def test_second_differences_nonuniform():
    a = np.array([0.1, 0.3, 0.4, 0.8])
    # for a^2 the weighted difference is 2 h1 h2, i.e. 2 h^2 on a uniform grid
    d = bd._second_differences(a, a**2)
    h1, h2 = a[1:-1] - a[:-2], a[2:] - a[1:-1]
    assert d == pytest.approx(2 * h1 * h2, rel=1e-12)
    u = np.linspace(0, 1, 5)
    n = np.cos(u)
    assert bd._second_differences(u, n) == pytest.approx(n[:-2] - 2 * n[1:-1] + n[2:], rel=1e-12)


def test_snr_to_a():
    assert bd.snr_to_a(0.0, 3.0) == pytest.approx(3.0)
    assert bd.snr_to_a([10.0, 20.0], 1.0) == pytest.approx([0.1, 0.01])


def test_sweep_deterministic_and_thread_independent():
    grid = np.linspace(-10, 30, 5)
    one = bd.figure1_sweep(snr_grid_db=grid, mc_n=20_000, seed=3, workers=1)
    many = bd.figure1_sweep(snr_grid_db=grid, mc_n=20_000, seed=3, workers=4)
    assert one.csv_text() == many.csv_text()
    assert one.csv_text().splitlines()[0] == bd.CSV_HEADER
    assert one.ordering_ok() and one.crosscheck_ok()
    assert one.gap(-10) > one.gap(20)
    assert one.metadata()["snr_definition"] == bd.SNR_DEFINITION
    other = bd.figure1_sweep(snr_grid_db=grid, mc_n=20_000, seed=4, workers=1, crosscheck=False)
    assert other.csv_text() != one.csv_text()


def test_curve_rejects_unsorted_rows():
    row = bd.BoundsRow(0.0, 1.0, 0.5, 0.5, 0.5, 0.0)
    with pytest.raises(InvalidParameter):
        bd.BoundsCurve("p", "n", [row, row])


def test_thread_count(monkeypatch):
    monkeypatch.setenv("INFOLAB_THREADS", "3")
    assert bd.thread_count() == 3
    monkeypatch.setenv("INFOLAB_THREADS", "0")
    assert bd.thread_count() >= 1
    monkeypatch.setenv("INFOLAB_THREADS", "many")
    with pytest.raises(InvalidParameter):
        bd.thread_count()


def test_fmt_roundtrips():
    x = 0.1 + 0.2
    assert float(bd.fmt(x)) == x
