"""Named figure recipes: ensembles, theory overlays and plot layout.

Every recipe runs at a reduced desk-scale size by default; ``paper_scale``
switches to the original system sizes and realization counts, which take
hours to days.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import theory
from ..ensemble import EnsembleSpec
from ..errors import DomainError, ThoulessNotFound
from ..rng import PhaseDistribution
from ..spectra import extract_thouless, smooth_moving_average, wigner_surmise
from .plots import LINEAR, LOGLOG, Series, emit_histogram, emit_plot, series_from_estimate
from .runner import run_cached

UNIFORM = PhaseDistribution.uniform()
ROTOR_SIGMA = np.sqrt(0.5)


@dataclass
class Panel:
    name: str
    specs: list
    kind: str = "kappa"  # kappa | spacing | thouless
    m: int = 1
    style: str = LOGLOG
    overlay: object = None  # callable(spec, est) -> list of TheoryCurve
    alpha: float = None
    title: str = None


@dataclass
class FigureRecipe:
    name: str
    mirrors: str
    description: str
    panels: list = field(default_factory=list)

    @property
    def specs(self):
        out = []
        for p in self.panels:
            out.extend(s for s in p.specs if s not in out)
        return out


def _rmte(N, eps, R, seed, L=2, moments=(1,), **kw):
    model = "rmte" if L == 2 else "rmte_extended"
    return EnsembleSpec(model=model, N=N, L=L, eps=float(eps), dist=UNIFORM, realizations=R,
                        master_seed=seed, moments=tuple(moments), **kw)


def _rotor(N, gamma, R, seed, moments=(1,), **kw):
    return EnsembleSpec(model="kicked_rotor_pair", N=N, gamma=float(gamma), realizations=R,
                        master_seed=seed, moments=tuple(moments), **kw)


def rotor_gamma_for(Gamma, N):
    """``gamma`` with ``sigma (gamma N / 2 pi) N = Gamma`` for arcsine phases."""
    return Gamma * 2 * np.pi / (ROTOR_SIGMA * N**2)


def _eps_curve(m=1):
    def overlay(spec, est):
        t = np.unique(np.round(np.geomspace(1, est.times[-1], 400)))
        vals = theory.kappa_moment_prediction(t, m, spec.N, spec.coupling, spec.phase_dist,
                                              theory.EXTRAPOLATED, spec.eff_L) if m > 1 else \
            theory.kappa_prediction(t, spec.N, spec.eff_L, spec.coupling, spec.phase_dist)
        return [theory.TheoryCurve(t / spec.dim, vals, f"kappa{m}_extrapolated", xname="tau")]
    return overlay


def _scaled_curve(Gamma):
    def overlay(spec, est):
        tau = np.geomspace(theory.tau_sh(spec.N, spec.eff_L), 4.0, 400)
        return [theory.TheoryCurve(tau, theory.sff_prediction_scaled(tau, Gamma), "kappa_scaled",
                                   {"Gamma": Gamma}, "tau")]
    return overlay


def _scaled_moment_curve(Gamma, m, N_ref=400):
    # the extrapolated moment at large N depends on (tau, Gamma) only for
    # tau > tau_SH; evaluate it on a large reference system
    def overlay(spec, est):
        eps = theory.eps_for_gamma(Gamma, N_ref, 2, UNIFORM.sigma)
        tau = np.geomspace(1.0 / N_ref, 4.0, 400)
        t = tau * N_ref**2
        vals = theory.kappa_moment_prediction(t, m, N_ref, eps, UNIFORM)
        return [theory.TheoryCurve(tau, vals, f"kappa{m}_Gamma", {"Gamma": Gamma}, "tau")]
    return overlay


def _heisenberg_guides(specs):
    out = {1.0}
    for s in specs:
        if s.eff_L > 1:
            out.add(theory.tau_sh(s.N, s.eff_L))
    return sorted(out)


def recipes(paper_scale=False):
    """All presets, keyed by name."""
    P = paper_scale
    seed = 20240
    eps_grid = (0.01, 0.02, 0.04, 0.1, 0.3)
    gammas = (1.0, 4.0, 12.0)
    out = {}

    N1, R1 = (50, 20000) if P else (24, 500)
    out["fig1"] = FigureRecipe("fig1", "fig1", "rescaled SFF of the bipartite ensemble for several couplings", [
        Panel("kappa", [_rmte(N1, e, R1, seed) for e in eps_grid], overlay=_eps_curve(1))])

    N2 = 50 if P else 24
    out["fig2"] = FigureRecipe("fig2", "fig2", "level spacings crossing over from Poisson to Wigner", [
        Panel("spacing", [_rmte(N2, e, 100, seed, t_max=1, spacing_realizations=100)
                          for e in (0.0, 0.02, 0.05, 0.2)], kind="spacing", style=LINEAR)])

    sizes, R3 = ((35, 50, 80), 6000) if P else ((16, 24), 500)
    out["fig3"] = FigureRecipe("fig3", "fig3", "collapse onto a single curve at fixed Gamma", [
        Panel(f"Gamma{g:g}", [_rmte(N, theory.eps_for_gamma(g, N, 2, UNIFORM.sigma), R3, seed)
                              for N in sizes], overlay=_scaled_curve(g), title=f"Gamma = {g:g}")
        for g in gammas])

    N4, R4 = (50, 20000) if P else (24, 300)
    g_grid = (2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0)
    out["fig3b"] = FigureRecipe("fig3b", "fig3", "Thouless time against Gamma", [
        Panel("thouless", [_rmte(N4, theory.eps_for_gamma(g, N4, 2, UNIFORM.sigma), R4, seed)
                           for g in g_grid], kind="thouless", style=LINEAR)])

    out["fig4"] = FigureRecipe("fig4", "fig4", "second and third moments for several couplings", [
        Panel(f"kappa{m}", [_rmte(N1, e, R1, seed, moments=(1, 2, 3)) for e in eps_grid],
              m=m, overlay=_eps_curve(m), alpha=0.05) for m in (2, 3)])

    for name, m in (("fig5", 2), ("fig6", 3)):
        out[name] = FigureRecipe(name, name, f"moment {m} collapse at fixed Gamma", [
            Panel(f"Gamma{g:g}", [_rmte(N, theory.eps_for_gamma(g, N, 2, UNIFORM.sigma), R3, seed,
                                        moments=(1, 2, 3)) for N in sizes],
                  m=m, overlay=_scaled_moment_curve(g, m), alpha=0.05, title=f"Gamma = {g:g}")
            for g in gammas])

    N7, R7 = (50, 100000) if P else (20, 2000)
    single = EnsembleSpec(model="single_kicked_rotor", N=N7, realizations=R7, master_seed=seed,
                          spacing_realizations=R7)

    def cue_line(spec, est):
        tau = np.linspace(0, est.tau[-1], 400)
        return [theory.TheoryCurve(tau, np.minimum(tau, 1.0), "cue", xname="tau")]

    out["fig7"] = FigureRecipe("fig7", "fig7", "single kicked rotor against the CUE", [
        Panel("kappa", [single], style=LINEAR, overlay=cue_line),
        Panel("spacing", [single], kind="spacing", style=LINEAR)])

    N8, R8 = (50, 10000) if P else (20, 300)
    rotor_G = (0.5, 1.0, 4.0, 12.0)
    out["fig8"] = FigureRecipe("fig8", "fig8", "coupled kicked rotors for several couplings", [
        Panel("kappa", [_rotor(N8, rotor_gamma_for(g, N8), R8, seed) for g in rotor_G],
              overlay=_eps_curve(1))])
    out["fig9"] = FigureRecipe("fig9", "fig9", "coupled kicked rotor level spacings", [
        Panel("spacing", [_rotor(N8, rotor_gamma_for(g, N8), 100, seed, t_max=1, spacing_realizations=100)
                          for g in (0.0, 1.0, 4.0, 12.0)], kind="spacing", style=LINEAR)])

    rsizes, R10 = ((35, 50, 80), 1000) if P else ((16, 20), 300)
    out["fig10"] = FigureRecipe("fig10", "fig10", "coupled kicked rotors collapse at fixed Gamma", [
        Panel(f"Gamma{g:g}", [_rotor(N, rotor_gamma_for(g, N), R10, seed) for N in rsizes],
              overlay=_scaled_curve(g), title=f"Gamma = {g:g}") for g in gammas])
    out["fig11"] = FigureRecipe("fig11", "fig11", "rotor moments for several couplings", [
        Panel(f"kappa{m}", [_rotor(N8, rotor_gamma_for(g, N8), R8, seed, moments=(1, 2, 3)) for g in rotor_G],
              m=m, overlay=_eps_curve(m), alpha=0.05) for m in (2, 3)])

    ext, R12 = (((10, 4), (20, 3), (80, 2)), 4000) if P else (((10, 3), (24, 2)), 200)
    cap = 10**4 if P else 8192

    def ext_spec(g, N, L, moments=(1,)):
        return _rmte(N, theory.eps_for_gamma(g, N, L, UNIFORM.sigma), R12, seed, L=L,
                     moments=moments, max_dim=cap)

    out["fig13"] = FigureRecipe("fig13", "fig13", "extended ensemble at fixed Gamma", [
        Panel(f"Gamma{g:g}_m{m}", [ext_spec(g, N, L, (1, 2, 3)) for N, L in ext], m=m,
              overlay=_scaled_curve(g) if m == 1 else _scaled_moment_curve(g, m),
              alpha=None if m == 1 else 0.05, title=f"Gamma = {g:g}, m = {m}")
        for g in gammas for m in (1, 2, 3)])

    pert = (((10, 3), (32, 2)) if not P else ((10, 3), (20, 3), (50, 2), (80, 2)))
    out["fig12"] = FigureRecipe("fig12", "fig12", "perturbative regime at small transition parameter", [
        Panel(f"Lambda{lam:g}", [_rmte(N, lambda_eps(lam, N, L), 2000 if P else 300, seed, L=L,
                                       max_dim=cap) for N, L in pert],
              kind="perturbative", style=LINEAR, alpha=0.05, title=f"Lambda = {lam:g}")
        for lam in (0.001, 0.005, 0.01)])
    return out


def lambda_eps(Lambda, N, L, dist=UNIFORM):
    """Coupling with ``N^L (1 - |chi|^2) / 4 pi^2 = Lambda``."""
    from scipy.optimize import brentq

    target = Lambda * 4 * np.pi**2 / float(N) ** L
    f = lambda e: 1 - abs(dist.characteristic_function(e)) ** 2 - target  # noqa: E731
    return float(brentq(f, 0.0, 1.0, xtol=1e-15))


def _pert_series(spec, est, Lambda, alpha):
    sel = est.times >= spec.dim
    tp = theory.tau_pert(est.times[sel], spec.N, spec.eff_L, Lambda)
    y = smooth_moving_average(est.times, est.kappa_m(1), alpha)[sel]
    return Series(f"N={spec.N}, L={spec.eff_L}", tp, y)


def _override(spec, realizations):
    kw = {}
    if realizations is not None:
        kw["realizations"] = realizations
        if spec.spacing_realizations:
            kw["spacing_realizations"] = realizations
    return spec.replace(**kw) if kw else spec


def render(recipe, out, workers=1, realizations=None, progress=None):
    """Run every ensemble of ``recipe`` (reusing cached results) and write
    one SVG per panel under ``out``.  Returns the written paths."""
    out = Path(out)
    cache = out / "runs"
    written = []
    for panel in recipe.panels:
        specs = [_override(s, realizations) for s in panel.specs]
        ests = [run_cached(s, cache, workers, progress)[0] for s in specs]
        path = out / f"{recipe.name}_{panel.name}.svg"
        if panel.kind == "kappa":
            series, overlays = [], []
            for s, e in zip(specs, ests):
                label = _label(s)
                series.append(series_from_estimate(e, panel.m, panel.alpha, label))
                if panel.overlay:
                    overlays.extend(panel.overlay(s, e))
            written += emit_plot(series, overlays, panel.style, path,
                                 guides=_heisenberg_guides(specs),
                                 ylabel=rf"$\kappa_{panel.m}$", title=panel.title)
        elif panel.kind == "spacing":
            samples = {_label(s): e.spacings for s, e in zip(specs, ests)}
            curves = {"Wigner surmise": wigner_surmise, "Poisson": lambda s: np.exp(-s)}
            written += emit_histogram(samples, curves, path)
        elif panel.kind == "thouless":
            g, tau_num = [], []
            for s, e in zip(specs, ests):
                try:
                    tau_num.append(extract_thouless(e, 0.005, t_min=s.N)[1])
                    g.append(s.Gamma)
                except ThoulessNotFound:
                    continue
            gg = np.linspace(min(s.Gamma for s in specs), max(s.Gamma for s in specs), 200)
            curve = theory.TheoryCurve(gg, [theory.thouless_time_lambert(x, 0.005) for x in gg],
                                       "thouless_lambert", xname="Gamma")
            written += emit_plot([Series("numerics", np.array(g), np.array(tau_num))], [curve],
                                 LINEAR, path, xlabel=r"$\Gamma$", ylabel=r"$\tau_{Th}$")
        elif panel.kind == "perturbative":
            lam = float(panel.name.replace("Lambda", ""))
            series = [_pert_series(s, e, lam, panel.alpha) for s, e in zip(specs, ests)]
            tp = np.linspace(0, max(float(s.x.max()) for s in series), 400)
            curve = theory.TheoryCurve(tp, theory.sff_perturbative(tp, lam), "kappa_perturbative",
                                       {"Lambda": lam}, "tau_pert")
            written += emit_plot(series, [curve], LINEAR, path, xlabel=r"$\tau_{pert}$",
                                 title=panel.title)
        else:
            raise DomainError(f"unknown panel kind {panel.kind!r}")
    return written


def _label(spec):
    if spec.model == "kicked_rotor_pair":
        return f"N={spec.N}, gamma={spec.gamma:.4g}"
    if spec.model in ("rmte", "rmte_extended"):
        return f"N={spec.N}, L={spec.eff_L}, eps={spec.eps:.4g}"
    return f"{spec.model} N={spec.N}"
