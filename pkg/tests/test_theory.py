import math

import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st
from scipy import optimize, special

from rmte_sff import theory
from rmte_sff.errors import DivergenceError, DomainError, UnsupportedOrderError
from rmte_sff.rng import PhaseDistribution, characteristic_function
from rmte_sff.theory import (
    EXTRAPOLATED,
    SHORT,
    ScalingParams,
    TheoryCurve,
    a_k_closed_form,
    moment_coefficients,
    moment_prediction,
    sff_cue,
    sff_prediction,
    sff_prediction_scaled,
)

U = PhaseDistribution.uniform()
A = PhaseDistribution.arcsine()


def test_sff_cue():
    assert sff_cue(9, 12) == 9 and sff_cue(9, 0) == 0 and sff_cue(9, 9) == 9
    with pytest.raises(DomainError):
        sff_cue(0, 3)


def test_scaling_params():
    p = ScalingParams(32, 2, 0.05, np.sqrt(U.sigma2))
    assert p.Gamma == pytest.approx(np.pi / np.sqrt(3) * 0.05 * 32)
    assert p.Lambda == p.Gamma**2 / (4 * np.pi**2)
    assert theory.eps_for_gamma(p.Gamma, 32, 2, np.sqrt(U.sigma2)) == pytest.approx(0.05)
    assert theory.tau_sh(32, 2) == 1 / 32
    assert theory.tau_sh(10, 3) == pytest.approx(0.01)


@pytest.mark.parametrize("L", [2, 3])
def test_prediction_uncoupled_limits(L):
    t = np.arange(1, 40)
    assert np.array_equal(sff_prediction(t, 5, L, 0.0, U, SHORT), t.astype(float) ** L)
    assert np.array_equal(sff_prediction(t, 5, L, 0.0, U, EXTRAPOLATED), np.minimum(t, 5.0) ** L)


def test_prediction_fully_random_limits():
    t = np.arange(1, 40)
    assert np.allclose(sff_prediction(t, 5, 2, 1.0, U, SHORT), t, atol=1e-12)
    assert np.allclose(sff_prediction(t, 5, 2, 1.0, U, EXTRAPOLATED), np.minimum(t, 25), atol=1e-12)


def test_prediction_independent_reimplementation():
    N, eps, t = 50, 0.02, 40
    chi = np.sin(np.pi * eps) / (np.pi * eps)
    x = chi ** (2 * t)
    ref = x * min(t, N) ** 2 + (1 - x) * min(t, N**2)
    assert abs(sff_prediction(t, N, 2, eps, U, EXTRAPOLATED) - ref) < 1e-12 * ref


def test_prediction_rejects_unknown_mode():
    with pytest.raises(DomainError):
        sff_prediction(3, 4, 2, 0.1, U, "bogus")


@settings(max_examples=100, deadline=None)
@given(N=st.integers(2, 40), L=st.integers(2, 4), eps=st.floats(0, 3), t=st.integers(1, 10**5))
def test_prediction_is_convex_combination(N, L, eps, t):
    k = sff_prediction(t, N, L, eps, U, EXTRAPOLATED)
    a, b = min(t, N) ** L, min(t, N**L)
    assert min(a, b) * (1 - 1e-12) <= k <= max(a, b) * (1 + 1e-12)


def test_scaled_examples():
    tau = np.geomspace(1e-3, 4, 50)
    assert np.array_equal(sff_prediction_scaled(tau, 0.0), np.ones_like(tau))
    assert np.allclose(sff_prediction_scaled(np.array([0.1, 0.5]), 60.0), [0.1, 0.5], atol=1e-12)
    ref = np.exp(-4.0) + (1 - np.exp(-4.0)) * 0.25
    assert sff_prediction_scaled(0.25, 4.0) == pytest.approx(ref, abs=1e-15)
    assert sff_prediction_scaled(0.25, 4.0) == pytest.approx(0.263737, abs=5e-7)


@pytest.mark.parametrize("N", [32, 64])
def test_scaled_matches_extrapolated_at_large_n(N):
    # t = N^2 / 4 is past the subsystem Heisenberg time for both sizes
    Gamma, tau = 4.0, 0.25
    eps = theory.eps_for_gamma(Gamma, N, 2, np.sqrt(U.sigma2))
    t = int(tau * N**2)
    ext = sff_prediction(t, N, 2, eps, U, EXTRAPOLATED) / N**2
    clt = abs(abs(characteristic_function(U, eps)) ** (2 * t) - np.exp(-(Gamma**2) * tau))
    assert abs(ext - sff_prediction_scaled(tau, Gamma)) <= clt + 1e-14


def test_scaled_clt_error_shrinks():
    Gamma, tau = 4.0, 0.25
    errs = []
    for N in (16, 32, 64, 128):
        eps = theory.eps_for_gamma(Gamma, N, 2, np.sqrt(U.sigma2))
        t = int(tau * N**2)
        errs.append(abs(sff_prediction(t, N, 2, eps, U, EXTRAPOLATED) / N**2 - sff_prediction_scaled(tau, Gamma)))
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_subfactorials():
    assert [theory.subfactorial(n) for n in range(8)] == [1, 0, 1, 2, 9, 44, 265, 1854]


def test_a_k_examples():
    assert [a_k_closed_form(1, k, 5) for k in range(2)] == [4, 1]
    assert [a_k_closed_form(2, k, 3) for k in range(3)] == [13, 4, 1]
    with pytest.raises(DomainError):
        a_k_closed_form(2, 3, 4)


@pytest.mark.parametrize("m", range(1, 6))
@pytest.mark.parametrize("t", range(1, 13))
def test_a_k_sum_rule(m, t):
    ak = [a_k_closed_form(m, k, t) for k in range(m + 1)]
    assert sum(ak) == math.factorial(m) * t**m
    assert ak[m] == 1
    assert all(a >= 0 for a in ak)


def test_second_moment_coefficients():
    # 2t^2 + (4t^3 - 4t^2) x + (4t^4 - 4t^3 + 2t^2) x^2 with x = |chi|^(2t)
    expected = {(2, 0): 2, (3, 1): 4, (2, 1): -4, (4, 2): 4, (3, 2): -4, (2, 2): 2}
    assert moment_coefficients(2) == expected


@pytest.mark.parametrize("m", [2, 3])
def test_moment_coefficients_match_expansion(m):
    # A_k polynomials by interpolating the closed form at m + 1 points
    ref = {}
    for k in range(m + 1):
        pts = list(range(1, m + 2))
        vals = [a_k_closed_form(m, k, t) for t in pts]
        poly = np.polynomial.polynomial.polyfit(pts, vals, m)
        for p, c in enumerate(np.round(poly).astype(int)):
            if c:
                key = (p + m, m - k)
                ref[key] = ref.get(key, 0) + math.factorial(m) * int(c)
    assert moment_coefficients(m) == ref


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_moment_uncoupled_short(m):
    t = np.arange(1, 15, dtype=float)
    got = moment_prediction(t, m, 50, 0.0, U, SHORT)
    assert np.allclose(got, math.factorial(m) ** 2 * t ** (2 * m), rtol=1e-13)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_moment_fully_random_short(m):
    t = np.arange(1, 15, dtype=float)
    got = moment_prediction(t, m, 50, 1.0, U, SHORT)
    assert np.allclose(got, math.factorial(m) * t**m, rtol=1e-12)


def test_moment_m1_reduces_to_sff():
    t = np.arange(1, 100)
    for mode in (SHORT, EXTRAPOLATED):
        assert np.array_equal(moment_prediction(t, 1, 8, 0.07, U, mode), sff_prediction(t, 8, 2, 0.07, U, mode))


def test_extrapolated_moments_limits():
    N = 6
    t = np.arange(1, 4 * N * N, dtype=float)
    for m in (2, 3):
        unc = moment_prediction(t, m, N, 0.0, U, EXTRAPOLATED)
        assert np.allclose(unc, math.factorial(m) ** 2 * np.minimum(t, N) ** (2 * m), rtol=1e-12)
        full = moment_prediction(t, m, N, 1.0, U, EXTRAPOLATED)
        assert np.allclose(full, math.factorial(m) * np.minimum(t, N * N) ** m, rtol=1e-12, atol=1e-9)
        short = moment_prediction(t[:N], m, N, 0.1, U, SHORT)
        assert np.allclose(moment_prediction(t[:N], m, N, 0.1, U, EXTRAPOLATED), short, rtol=1e-12)


def test_extrapolated_moment_guards():
    with pytest.raises(UnsupportedOrderError):
        moment_prediction(5, 4, 8, 0.1, U, EXTRAPOLATED)
    with pytest.raises(UnsupportedOrderError):
        moment_prediction(5, 2, 8, 0.1, U, EXTRAPOLATED, L=3)


def test_short_moment_extended_uses_enumeration():
    # uncoupled: every tuple fixes everything, so K_2 = (2 t^2)^L
    t = np.arange(1, 4)
    got = moment_prediction(t, 2, 5, 0.0, U, SHORT, L=3)
    assert np.allclose(got, 2 * t**2 * (2 * t**2) ** 2)


def test_lambert_w0_against_scipy():
    # scipy returns nan at the rounded branch point itself
    assert theory.lambert_w0(-1 / np.e) == pytest.approx(-1.0, abs=1e-7)
    for x in [-0.3, -1e-6, 0.0, 1e-8, 0.5, 1.0, 3.0, 1e3, 1e100, 1e300]:
        assert theory.lambert_w0(x) == pytest.approx(special.lambertw(x).real, rel=1e-13, abs=1e-15)
    assert theory.lambert_w0_log(2000.0) == pytest.approx(
        optimize.brentq(lambda w: w + np.log(w) - 2000.0, 1, 2000), rel=1e-14)
    with pytest.raises(DomainError):
        theory.lambert_w0(-1.0)


@settings(max_examples=200)
@given(Gamma=st.floats(0.05, 40), delta=st.floats(1e-6, 0.999))
@example(Gamma=26.3125, delta=0.5)  # argument just below the overflow edge
def test_lambert_residual(Gamma, delta):
    tau = theory.thouless_time_lambert(Gamma, delta)
    assert abs((1 - tau) * np.exp(-(Gamma**2) * tau) - delta) < 1e-10


def test_lambert_examples():
    tau = theory.thouless_time_lambert(5.0, 0.005)
    assert abs((1 - tau) * np.exp(-25 * tau) - 0.005) < 1e-10
    g = np.linspace(3, 8, 200)
    vals = [theory.thouless_time_lambert(x, 0.005) for x in g]
    assert np.all(np.diff(vals) < 0)
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(DomainError):
            theory.thouless_time_lambert(5.0, bad)


def test_lambert_small_delta_tends_to_one():
    vals = [theory.thouless_time_lambert(2.0, d) for d in (1e-2, 1e-4, 1e-8, 1e-12)]
    assert np.all(np.diff(vals) > 0) and vals[-1] > 0.999


def test_thouless_absolute():
    t0, _ = theory.thouless_time_absolute(10, 2, 0.1, U, 100.0)
    assert t0 == pytest.approx(0.0, abs=1e-12)
    _, a = theory.thouless_time_absolute(50, 2, 0.1, U, 1.0)
    _, b = theory.thouless_time_absolute(50, 4, 0.1, U, 1.0)
    assert b == pytest.approx(2 * a)
    with pytest.raises(DivergenceError):
        theory.thouless_time_absolute(10, 2, 0.0, U, 1.0)


def test_thouless_absolute_root_oracle():
    N, eps = 50, 0.1
    x = abs(characteristic_function(U, eps)) ** 2
    root = optimize.brentq(lambda t: (N**2 - t) * x**t - 1.0, 0, N**2 - 1)
    t_exact, _ = theory.thouless_time_absolute(N, 2, eps, U, 1.0)
    assert t_exact > 0
    assert abs(t_exact / root - 1) < 0.05


def test_ehrenfest():
    assert theory.ehrenfest_estimate(50, 9.7, 10.5) == pytest.approx(np.log(50) / (2 * np.log(25.4625)))
    assert theory.ehrenfest_estimate(50, 9.7, 10.5) == pytest.approx(0.604, abs=5e-4)
    assert theory.ehrenfest_estimate(1, 9.7, 10.5) == 0
    for n in np.geomspace(2, 1e6, 30):
        assert theory.ehrenfest_estimate(n, 9.7, 10.5) < n
    with pytest.raises(DomainError):
        theory.ehrenfest_estimate(50, 1.0, 2.0)


def test_transition_parameter():
    assert theory.transition_parameter(8, 2, 0.0, U) == (0.0, 0.0)
    for eps in (1e-2, 1e-3):
        exact, small = theory.transition_parameter(20, 2, eps, U)
        assert small == pytest.approx(400 * eps**2 / 12, rel=1e-14)
        assert abs(exact - small) < 1e-2 * small


@pytest.mark.parametrize("eps", [0.05, 0.2, 0.6])
def test_offdiagonal_variance_monte_carlo(eps):
    mean, se = theory.offdiagonal_variance_mc(8, 2, eps, U, 10_000, np.random.default_rng(int(eps * 100)))
    ref = theory.offdiagonal_variance(8, 2, eps, U)
    assert abs(mean / ref - 1) < 0.02
    assert abs(mean - ref) < 4 * se


def test_finite_and_asymptotic_lambda_converge():
    for N in (8, 32, 128):
        exact, _ = theory.transition_parameter(N, 2, 0.1, U)
        fin = theory.transition_parameter_finite(N, 2, 0.1, U)
        assert abs(fin / exact - 1) < 3 / N


def test_perturbative_closed_form():
    tp = np.linspace(0, 4, 4001)
    assert theory.sff_perturbative(0.0, 0.01) == 1
    assert np.array_equal(theory.sff_perturbative(tp, 0.0), np.ones_like(tp))
    k = theory.sff_perturbative(tp, 0.01)
    i = np.argmin(k)
    assert abs(tp[i] - 1 / np.sqrt(2)) < 1e-3
    assert 1 - k.min() == pytest.approx(2 * np.pi * np.sqrt(0.01 / (2 * np.e)), rel=1e-6)


def test_perturbative_coordinates_agree():
    Gamma = 0.8
    Lam = Gamma**2 / (4 * np.pi**2)
    tau = np.linspace(0, 3, 50)
    assert np.allclose(theory.sff_perturbative_gamma(tau, Gamma), theory.sff_perturbative(Gamma * tau, Lam))
    N, L = 12, 2
    t = np.arange(1, 200)
    assert np.allclose(theory.tau_pert(t, N, L, Lam), Gamma * t / N**L)


@pytest.mark.parametrize("tp", [0.0, 0.3, 0.7, 1.0, 2.0])
def test_perturbation_quadrature(tp):
    q = theory.perturb_integral_numeric(tp, 0.01)
    ref = theory.perturb_integral_closed(tp, 0.01)
    assert abs(q - ref) < 1e-7
    assert q <= 1e-8


def test_perturbation_quadrature_validation():
    with pytest.raises(DomainError):
        theory.perturb_integral_numeric(0.5, 0.0)
    with pytest.raises(DomainError):
        theory.perturb_integral_numeric(-0.5, 0.01)


def test_small_gamma_perturbative_match():
    # both curves linearize to 1 - Gamma^2 delta_tau beyond the subsystem
    # Heisenberg time; compare them on [0, 0.1] after it
    ts = theory.tau_sh(32, 2)
    dtau = np.linspace(0, 0.1, 101)
    for Gamma in (0.1, 0.2, 0.3):
        a = sff_prediction_scaled(ts + dtau, Gamma)
        b = theory.sff_perturbative_gamma(ts + dtau, Gamma)
        assert np.max(np.abs(a - b)) < 0.01 * Gamma**2


def test_theory_curve_rejects_non_finite():
    with pytest.raises(DomainError):
        TheoryCurve([1, 2], [1.0, np.nan], "x")
    c = theory.short_time_curve(np.arange(1, 50), 5, 2, 0.1, U)
    assert c.xname == "tau" and c.values.shape == (49,)
