import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from rmte_sff import spectra, theory
from rmte_sff.ensemble import EnsembleSpec
from rmte_sff.errors import AccuracyError, DomainError, RealizationError, ThoulessNotFound
from rmte_sff.models import EigenphaseSet
from rmte_sff.rng import PhaseDistribution
from rmte_sff.spectra import (
    SffEstimate,
    TimeGrid,
    estimate_sff,
    extract_thouless,
    ks_distance,
    level_spacings,
    poisson_cdf,
    smooth_moving_average,
    spacings_from_phases,
    trace_powers,
    wigner_cdf,
    wigner_surmise,
)


def synthetic(times, K, N, L=2):
    K = np.asarray(K, dtype=float)[None, :]
    return SffEstimate(np.asarray(times), (1,), K, np.zeros_like(K), N, L, 2)


def test_trace_powers_identity():
    assert trace_powers(np.zeros(2), 3)[0, 2] == 4


def test_trace_powers_alternating():
    v = trace_powers(np.array([0.0, np.pi]), 2)[0]
    assert abs(v[0]) < 1e-30 and abs(v[1] - 4) < 1e-12


def test_trace_powers_matrix_oracle():
    ph = np.random.default_rng(3).uniform(-np.pi, np.pi, 6)
    m4 = np.linalg.matrix_power(np.diag(np.exp(1j * ph)), 4)
    ref = abs(np.trace(m4)) ** 4
    got = trace_powers(ph, np.array([4]), 2)[1, 0]
    assert abs(got / ref - 1) < 1e-10


def test_trace_powers_accepts_eigenphase_set_and_stacks():
    ph = np.random.default_rng(4).uniform(-np.pi, np.pi, (3, 5))
    out = trace_powers(ph, 7, 3)
    assert out.shape == (3, 3, 7)
    es = EigenphaseSet(ph[1], 5, 0.0, "test")
    assert np.array_equal(trace_powers(es, 7, 3), out[1])
    assert np.allclose(out[:, 2], out[:, 0] ** 3)


def test_trace_powers_validation():
    with pytest.raises(DomainError):
        trace_powers(np.zeros(2), 3, 0)


def test_time_grid_default():
    g = TimeGrid.default(4 * 32**2, 4 * 32)
    assert len(g) == 600
    assert g.times[-1] == 4096
    assert np.array_equal(g.times[:128], np.arange(1, 129))
    assert np.all(np.diff(g.times) > 0)
    assert np.array_equal(TimeGrid.default(50, 100).times, np.arange(1, 51))
    with pytest.raises(DomainError):
        TimeGrid(np.array([3, 2]))


@pytest.fixture(scope="module")
def uncoupled16():
    spec = EnsembleSpec(model="rmte", N=16, eps=0.0, realizations=400, master_seed=2, t_max=64)
    return estimate_sff(spec)


@pytest.mark.parametrize("t", [1, 2, 4, 8, 12, 15])
def test_uncoupled_ramp_is_quadratic(uncoupled16, t):
    est = uncoupled16
    i = t - 1
    assert abs(est.K()[i] - t**2) < 3 * est.K_stderr()[i]


@pytest.mark.parametrize("t", [16, 17, 24, 40, 64])
def test_uncoupled_plateau(uncoupled16, t):
    est = uncoupled16
    i = t - 1
    assert abs(est.K()[i] - 256) < 3 * est.K_stderr()[i]


def test_cue_control_at_t12():
    est = estimate_sff(EnsembleSpec(model="single_cue", N=9, realizations=3000, master_seed=5, t_max=20))
    assert abs(est.K()[11] - 9) < 3 * est.K_stderr()[11]


def test_cue_estimator_unbiased():
    spec = EnsembleSpec(model="single_cue", N=20, realizations=2000, master_seed=9)
    est = estimate_sff(spec)
    z = np.abs(est.K() - np.minimum(est.times, 20)) / est.K_stderr()
    assert np.mean(z < 3) >= 0.95


@pytest.fixture(scope="module")
def coupled_moments():
    spec = EnsembleSpec(model="rmte", N=6, eps=0.15, realizations=300, master_seed=4, moments=(1, 2, 3))
    return estimate_sff(spec)


def test_moment_inequality(coupled_moments):
    est = coupled_moments
    k1, k2 = est.K(1), est.K(2)
    prop = np.hypot(est.K_stderr(2), 2 * k1 * est.K_stderr(1))
    assert np.all(k2 >= k1**2 - 3 * prop)


def test_kappa_rescaling(coupled_moments):
    est = coupled_moments
    assert np.allclose(est.kappa_m(1) * est.dim, est.K(1), rtol=1e-15, atol=0)
    assert np.allclose(est.kappa_m(3), (est.K(3) / 6) ** (1 / 3) / 36, rtol=1e-15)
    assert np.allclose(est.tau, est.times / 36)
    # delta method
    assert np.allclose(est.kappa_stderr_m(2), est.kappa_m(2) * est.K_stderr(2) / (2 * est.K(2)))


def test_determinism_and_worker_independence():
    spec = EnsembleSpec(model="rmte", N=4, eps=0.3, realizations=100, master_seed=11, moments=(1, 2))
    a = estimate_sff(spec)
    b = estimate_sff(spec)
    c = estimate_sff(spec, workers=2)
    for x in (b, c):
        assert np.array_equal(a.mean, x.mean) and np.array_equal(a.stderr, x.stderr)
    d = estimate_sff(spec.replace(master_seed=12))
    assert not np.array_equal(a.mean, d.mean)


def test_progress_callback():
    calls = []
    spec = EnsembleSpec(model="single_cue", N=3, realizations=70, master_seed=1)
    estimate_sff(spec, progress=lambda done, total: calls.append((done, total)))
    assert calls == [(1, 3), (2, 3), (3, 3)]


def test_realization_errors_carry_index(monkeypatch):
    def broken(op, method="auto"):
        raise AccuracyError("synthetic failure", 1.0, 1.0)

    monkeypatch.setattr(spectra, "eigenphases", broken)
    spec = EnsembleSpec(model="single_cue", N=3, realizations=40, master_seed=1)
    with pytest.raises(RealizationError) as exc:
        estimate_sff(spec)
    assert exc.value.index == 0
    assert isinstance(exc.value.cause, AccuracyError)


def test_picket_fence_spacings():
    ph = -np.pi + 2 * np.pi * np.arange(8) / 8
    assert np.allclose(spacings_from_phases(ph), 1, atol=1e-14)
    h = level_spacings(ph)
    assert h.samples.size == 8


@settings(max_examples=50)
@given(st.lists(st.floats(-np.pi, np.pi - 1e-9), min_size=2, max_size=60, unique=True))
def test_spacings_mean_one(ph):
    s = spacings_from_phases(np.array(ph))
    assert s.size == len(ph)
    assert abs(s.mean() - 1) < 1e-12
    assert np.all(s >= 0)


def test_spacing_needs_two_levels():
    with pytest.raises(DomainError):
        spacings_from_phases([0.3])


def test_histogram_normalized():
    ph = np.random.default_rng(0).uniform(-np.pi, np.pi, (10, 40))
    h = level_spacings(ph, bins=30)
    assert abs(h.total_probability - 1) < 1e-12
    assert h.samples.size == 400


def test_uncoupled_spacings_are_poissonian():
    spec = EnsembleSpec(model="rmte", N=24, eps=0.0, realizations=100, spacing_realizations=100,
                        master_seed=6, t_max=1)
    est = estimate_sff(spec)
    assert est.spacings.size == 100 * 576
    assert ks_distance(est.spacings, poisson_cdf) < 0.02


def test_coupled_spacings_follow_wigner():
    spec = EnsembleSpec(model="rmte", N=50, eps=0.2, realizations=12, spacing_realizations=12,
                        master_seed=6, t_max=1)
    est = estimate_sff(spec)
    assert ks_distance(est.spacings, wigner_cdf) < 0.02
    assert ks_distance(est.spacings, poisson_cdf) > 0.2


def test_wigner_surmise():
    assert wigner_surmise(0.0) == 0
    norm, _ = integrate.quad(wigner_surmise, 0, np.inf, epsabs=1e-13, epsrel=1e-13)
    mean, _ = integrate.quad(lambda s: s * wigner_surmise(s), 0, np.inf, epsabs=1e-13, epsrel=1e-13)
    assert abs(norm - 1) < 1e-10 and abs(mean - 1) < 1e-10
    with pytest.raises(DomainError):
        wigner_surmise(-0.1)


@pytest.mark.parametrize("s", [0.1, 0.7, 1.5, 3.0])
def test_wigner_cdf_integrates_density(s):
    val, _ = integrate.quad(wigner_surmise, 0, s, epsabs=1e-14)
    assert abs(wigner_cdf(s) - val) < 1e-12


def test_smoothing_constant_and_narrow():
    t = np.arange(1, 200)
    assert np.array_equal(smooth_moving_average(t, np.full(t.size, 3.5)), np.full(t.size, 3.5))
    v = np.random.default_rng(1).normal(size=20)
    assert np.array_equal(smooth_moving_average(np.arange(1, 21), v, alpha=0.01), v)


def test_smoothing_linear_interior():
    t = np.arange(1, 400, dtype=float)
    out = smooth_moving_average(t, t, alpha=0.2)
    # a window is symmetric when alpha t is an integer and lies inside the grid
    inner = (t * 1.2 <= t[-1]) & (np.abs(0.2 * t - np.round(0.2 * t)) < 1e-12)
    assert inner.sum() > 10
    assert np.max(np.abs(out[inner] - t[inner])) < 1e-12


def test_smoothing_validation():
    with pytest.raises(DomainError):
        smooth_moving_average([], [])
    with pytest.raises(DomainError):
        smooth_moving_average([1, 2], [1, 2], alpha=0.7)


def test_thouless_on_exact_ramp():
    t = np.arange(1, 4 * 64 + 1)
    est = synthetic(t, np.minimum(t, 64), 8)
    assert extract_thouless(est, 0.005) == (1, 1 / 64)


def test_thouless_on_analytic_curve():
    N, Gamma, delta = 32, 5.0, 0.005
    dist = PhaseDistribution.uniform()
    eps = theory.eps_for_gamma(Gamma, N, 2, np.sqrt(dist.sigma2))
    t = TimeGrid.default(4 * N**2, 4 * N).times
    K = theory.sff_prediction(t, N, 2, eps, dist, theory.EXTRAPOLATED)
    est = synthetic(t, K, N)
    tth, tau = extract_thouless(est, delta, run_length=1, t_min=N)
    # root-finding oracle on the same analytic curve
    from scipy.optimize import brentq

    f = lambda x: theory.sff_prediction(x, N, 2, eps, dist, theory.EXTRAPOLATED) - x - delta * N**2
    root = brentq(f, N, N**2)
    i = np.searchsorted(t, root)
    step = (t[i] - t[i - 1]) / N**2
    assert abs(tau - root / N**2) <= step + 1e-12
    assert abs(tau - theory.thouless_time_lambert(Gamma, delta)) <= 0.1 * theory.thouless_time_lambert(Gamma, delta)


def test_thouless_not_found_and_domain():
    t = np.arange(1, 300)
    est = synthetic(t, np.minimum(t, 64) + 20, 8)
    with pytest.raises(ThoulessNotFound) as exc:
        extract_thouless(est, 0.005)
    assert exc.value.min_deviation == pytest.approx(20)
    with pytest.raises(DomainError):
        extract_thouless(synthetic(np.arange(1, 30), np.arange(1, 30), 8), 0.005)
    with pytest.raises(DomainError):
        extract_thouless(est, 0.0)


def test_thouless_absolute_mode():
    t = np.arange(1, 300)
    K = np.minimum(t, 64) + np.where(t < 40, 5.0, 0.5)
    est = synthetic(t, K, 8)
    tth, _ = extract_thouless(est, 1.0, mode="absolute", alpha=0.01)
    assert tth == 40
