"""Estimating spectral form factor moments and level spacings.

Run with ``python3 demos/03_form_factor_estimation.py``.
"""

import numpy as np

from rmte_sff import EnsembleSpec, estimate_sff, extract_thouless, theory
from rmte_sff.spectra import ks_distance, poisson_cdf, smooth_moving_average, wigner_cdf

# %% The CUE ramp
est = estimate_sff(EnsembleSpec(model="single_cue", N=12, realizations=1000, master_seed=1, t_max=24))
for t in (3, 6, 12, 18):
    i = t - 1
    print(f"CUE(12) K({t}) = {est.K()[i]:6.2f} +- {est.K_stderr()[i]:.2f} (expect {min(t, 12)})")

# %% A weakly coupled bipartite ensemble
# K(t) interpolates between the uncoupled min(t, N)^2 and the full ramp.
N, eps = 8, 0.15
spec = EnsembleSpec(model="rmte", N=N, eps=eps, realizations=400, master_seed=2, moments=(1, 2))
est = estimate_sff(spec)
pred = theory.sff_prediction(est.times, N, 2, eps, spec.phase_dist, theory.EXTRAPOLATED)
for t in (2, 8, 30, 64, 128):
    i = int(np.searchsorted(est.times, t))
    print(f"t={est.times[i]:4d}  K={est.K()[i]:8.2f} +- {est.K_stderr()[i]:6.2f}   theory {pred[i]:8.2f}")

# Rescaled moments kappa_m = (K_m / m!)^(1/m) / N^2, smoothed over a 5% window.
k2 = smooth_moving_average(est.times, est.kappa_m(2))
print("smoothed kappa_2 at tau = 0.5:", round(float(np.interp(0.5, est.tau, k2)), 3))

# %% Thouless time
# First time after which K stays within delta N^2 of the CUE(N^2) ramp.
t_th, tau_th = extract_thouless(est, 0.05, t_min=N)
print(f"t_Th = {t_th}, tau_Th = {tau_th:.3f}")

# %% Level spacings: Poisson without coupling, Wigner with
for eps in (0.0, 0.3):
    spec = EnsembleSpec(model="rmte", N=16, eps=eps, realizations=20, spacing_realizations=20,
                        master_seed=3, t_max=1)
    s = estimate_sff(spec).spacings
    print(f"eps={eps}: KS to Poisson {ks_distance(s, poisson_cdf):.3f}, to Wigner {ks_distance(s, wigner_cdf):.3f}")
