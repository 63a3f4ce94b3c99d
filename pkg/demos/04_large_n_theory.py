"""Large-N predictions: convex combination, scaling collapse, Thouless time
and the perturbative regime.

Run with ``python3 demos/04_large_n_theory.py``.
"""

import numpy as np

from rmte_sff import PhaseDistribution, theory

U = PhaseDistribution.uniform()

# %% Convex combination
# K(t) = x K_N(t)^2 + (1 - x) K_{N^2}(t), with x = |chi(eps)|^(2t).
N, eps = 50, 0.05
t = np.array([1, 10, 50, 200, 1000, 2500])
print("extrapolated:", np.round(theory.sff_prediction(t, N, 2, eps, U, theory.EXTRAPOLATED), 1))
print("short-time:  ", np.round(theory.sff_prediction(t, N, 2, eps, U, theory.SHORT), 1))

# %% One parameter beyond the subsystem Heisenberg time
# With Gamma = sigma eps N^(L/2) the rescaled curve depends on (tau, Gamma) only.
G = theory.gamma_parameter(N, 2, eps, U.sigma)
tau = np.array([0.05, 0.2, 0.5])
print(f"Gamma = {G:.3f}:", np.round(theory.sff_prediction_scaled(tau, G), 4))
print("N = 50 curve:", np.round(theory.kappa_prediction(tau * N**2, N, 2, eps, U), 4))

# %% Higher moments
for m in (2, 3):
    k = theory.kappa_moment_prediction(tau * N**2, m, N, eps, U)
    print(f"kappa_{m}:", np.round(k, 4))
print("K_2 coefficients {(power of t, power of x): c}:", theory.moment_coefficients(2))

# %% Thouless time from the Lambert W function
for G in (3, 5, 8):
    print(f"Gamma={G}: tau_Th = {theory.thouless_time_lambert(G, 0.005):.4f}")

# %% Perturbative regime at small transition parameter Lambda
lam = 0.005
tp = np.linspace(0, 3, 4)
print("closed form:", np.round(theory.sff_perturbative(tp, lam), 5))
print("integral check at tau_p = 1:", theory.perturb_integral_numeric(1.0, lam),
      theory.perturb_integral_closed(1.0, lam))
print("Lambda for N=32, eps=0.05:", theory.transition_parameter(32, 2, 0.05, U))
