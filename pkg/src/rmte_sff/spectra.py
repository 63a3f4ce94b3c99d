"""Ensemble-averaged spectral observables: SFF moments, level spacings,
smoothing and numerical Thouless times."""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .errors import DomainError, RealizationError, RmteError, ThoulessNotFound
from .models import eigenphases

BLOCK = 32


@dataclass(frozen=True)
class TimeGrid:
    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.int64)
        if t.ndim != 1 or t.size == 0:
            raise DomainError("time grid must be a non-empty 1d array")
        if t[0] < 1 or np.any(np.diff(t) <= 0):
            raise DomainError("times must be >= 1 and strictly increasing")
        object.__setattr__(self, "times", t)

    def __len__(self):
        return self.times.size

    @classmethod
    def default(cls, t_max, dense_until, max_points=600):
        """Every integer up to ``dense_until``, log-thinned above it."""
        t_max = int(t_max)
        dense = np.arange(1, min(dense_until, t_max) + 1)
        budget = max_points - dense.size
        if t_max <= dense_until or budget <= 0:
            return cls(dense[:max_points] if budget < 0 else dense)
        # rounding merges points at the low end, so oversample and trim
        for n in range(budget, 20 * budget):
            tail = np.unique(np.round(np.geomspace(dense_until, t_max, n + 1)[1:]))
            tail = tail[tail > dense_until]
            if tail.size >= budget or tail.size == t_max - dense_until:
                break
        if tail.size > budget:
            keep = np.round(np.linspace(0, tail.size - 1, budget)).astype(int)
            tail = tail[np.unique(keep)]
        return cls(np.concatenate([dense, tail.astype(np.int64)]))


@dataclass
class SffEstimate:
    """Means and standard errors of ``K_m(t)`` for each moment order."""

    times: np.ndarray
    orders: tuple
    mean: np.ndarray
    stderr: np.ndarray
    N: int
    L: int
    realizations: int
    spacings: np.ndarray = None
    spec: dict = field(default_factory=dict)

    @property
    def dim(self):
        return int(self.N) ** int(self.L)

    @property
    def tau(self):
        return self.times / self.dim

    def row(self, m):
        return list(self.orders).index(m)

    def K(self, m=1):
        return self.mean[self.row(m)]

    def K_stderr(self, m=1):
        return self.stderr[self.row(m)]

    @property
    def kappa(self):
        fact = np.array([math.factorial(m) for m in self.orders], dtype=float)[:, None]
        m = np.asarray(self.orders, dtype=float)[:, None]
        return (np.maximum(self.mean, 0) / fact) ** (1 / m) / self.dim

    @property
    def kappa_stderr(self):
        # delta method: d kappa / dK = kappa / (m K)
        m = np.asarray(self.orders, dtype=float)[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.kappa * self.stderr / (m * self.mean)
        return np.where(self.mean > 0, out, 0.0)

    def kappa_m(self, m=1):
        return self.kappa[self.row(m)]

    def kappa_stderr_m(self, m=1):
        return self.kappa_stderr[self.row(m)]


def trace_powers(phases, t_max, m_max=1):
    """``|sum_j exp(i t phi_j)|^(2m)`` for ``m = 1..m_max``.

    ``t_max`` is an integer (times ``1..t_max``) or an explicit array of
    times.  ``phases`` may be a 1d set or a 2d stack of sets; the result has
    shape ``(..., m_max, n_times)``.
    """
    ph = np.asarray(getattr(phases, "phases", phases), dtype=float)
    times = np.arange(1, int(t_max) + 1) if np.isscalar(t_max) else np.asarray(t_max)
    if times.size == 0 or np.min(times) < 0:
        raise DomainError("need at least one non-negative time")
    if m_max < 1:
        raise DomainError("m_max must be >= 1")
    tr = np.exp(1j * ph[..., None, :] * times[:, None]).sum(axis=-1)
    a2 = tr.real**2 + tr.imag**2
    return np.stack([a2**m for m in range(1, m_max + 1)], axis=-2)


def _block_stats(vals):
    """(count, mean, sum of squared deviations) along axis 0."""
    mean = vals.mean(axis=0)
    m2 = ((vals - mean) ** 2).sum(axis=0)
    return vals.shape[0], mean, m2


def _merge(a, b):
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    delta = mb - ma
    return n, ma + delta * (nb / n), sa + sb + delta**2 * (na * nb / n)


def _tree_reduce(parts):
    parts = list(parts)
    while len(parts) > 1:
        nxt = [_merge(parts[i], parts[i + 1]) for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def _run_block(spec, times, start, stop):
    from .ensemble import EnsembleSpec

    if isinstance(spec, dict):
        spec = EnsembleSpec.from_dict(spec)
    m_max = max(spec.moments)
    rows = [m - 1 for m in spec.moments]
    vals = np.empty((stop - start, len(spec.moments), times.size))
    spacings = []
    for j, idx in enumerate(range(start, stop)):
        try:
            ph = eigenphases(spec.build(idx), spec.eig_method).phases
        except RmteError as exc:
            raise RealizationError(idx, exc) from exc
        vals[j] = trace_powers(ph, times, m_max)[rows]
        if idx < spec.spacing_realizations:
            spacings.append(spacings_from_phases(ph))
    sp = np.concatenate(spacings) if spacings else None
    return _block_stats(vals), sp


def _init_worker():
    os.environ.setdefault("OMP_NUM_THREADS", "1")
    try:
        import torch

        torch.set_num_threads(1)
    except ImportError:
        pass


def estimate_sff(spec, workers=1, progress=None):
    """Ensemble mean and standard error of ``K_m(t)`` on ``spec``'s grid.

    Realizations are processed in fixed blocks of 32 indices; block
    statistics are merged by a fixed pairwise tree, so the result is
    bit-identical for every worker count.
    """
    times = spec.time_grid().times
    R = int(spec.realizations)
    bounds = [(s, min(s + BLOCK, R)) for s in range(0, R, BLOCK)]
    if workers and workers > 1:
        with ProcessPoolExecutor(workers, initializer=_init_worker) as pool:
            futs = [pool.submit(_run_block, spec.to_dict(), times, a, b) for a, b in bounds]
            results = []
            for f in futs:
                results.append(f.result())
                if progress:
                    progress(len(results), len(bounds))
    else:
        results = []
        for a, b in bounds:
            results.append(_run_block(spec, times, a, b))
            if progress:
                progress(len(results), len(bounds))
    n, mean, m2 = _tree_reduce(r[0] for r in results)
    stderr = np.sqrt(m2 / (n - 1) / n)
    sp = [r[1] for r in results if r[1] is not None]
    return SffEstimate(
        times=times,
        orders=tuple(spec.moments),
        mean=mean,
        stderr=stderr,
        N=int(spec.N),
        L=spec.eff_L,
        realizations=R,
        spacings=np.concatenate(sp) if sp else None,
        spec=spec.to_dict(),
    )


def spacings_from_phases(phases):
    """Nearest-neighbour spacings including the wrap-around one, scaled so
    that their mean is exactly one."""
    ph = np.sort(np.asarray(getattr(phases, "phases", phases), dtype=float))
    if ph.size < 2:
        raise DomainError("need at least two phases")
    d = np.diff(ph, append=ph[0] + 2 * np.pi)
    return d * (ph.size / d.sum())


@dataclass(frozen=True)
class SpacingHistogram:
    edges: np.ndarray
    density: np.ndarray
    samples: np.ndarray
    scale: float

    @property
    def total_probability(self):
        return float(np.sum(self.density * np.diff(self.edges)))


def level_spacings(phases, bins=60, s_max=None):
    s = np.concatenate([spacings_from_phases(p) for p in np.atleast_2d(
        np.asarray(getattr(phases, "phases", phases), dtype=float))])
    dim = np.atleast_2d(np.asarray(getattr(phases, "phases", phases))).shape[1]
    top = s_max if s_max is not None else max(float(s.max()), 1e-12)
    density, edges = np.histogram(s, bins=bins, range=(0.0, top), density=True)
    return SpacingHistogram(edges, density, s, dim / (2 * np.pi))


def wigner_surmise(s):
    """CUE spacing density ``(32 / pi^2) s^2 exp(-4 s^2 / pi)``."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("spacing must be >= 0")
    out = 32 / np.pi**2 * s**2 * np.exp(-4 * s**2 / np.pi)
    return out[()] if out.ndim == 0 else out


def wigner_cdf(s):
    s = np.maximum(np.asarray(s, dtype=float), 0.0)
    return special.erf(2 * s / np.sqrt(np.pi)) - 4 / np.pi * s * np.exp(-4 * s**2 / np.pi)


def poisson_cdf(s):
    return -np.expm1(-np.maximum(np.asarray(s, dtype=float), 0.0))


def ks_distance(samples, cdf):
    return float(stats.kstest(np.asarray(samples, dtype=float), cdf).statistic)


def smooth_moving_average(t, values, alpha=0.05):
    """Mean of ``values`` over the grid points in ``[t (1 - alpha), t (1 + alpha)]``.

    Works along the last axis of ``values``; windows are truncated at the
    ends of the grid.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.size == 0:
        raise DomainError("empty series")
    if not 0 < alpha <= 0.5:
        raise DomainError("alpha must lie in (0, 0.5]")
    a = alpha * t
    slack = 1e-9 * np.maximum(t, 1.0)
    lo = np.searchsorted(t, t - a - slack, side="left")
    hi = np.searchsorted(t, t + a + slack, side="right")
    out = np.empty_like(v)
    for i in range(t.size):
        out[..., i] = v[..., lo[i]:hi[i]].mean(axis=-1)
    return out


def extract_thouless(estimate, delta, mode="relative", run_length=5, alpha=0.05, t_min=None):
    """First grid time after which ``K(t) - min(t, N^L)`` stays below the
    threshold for ``run_length`` consecutive points.

    ``mode="relative"`` uses the threshold ``delta N^L``, ``"absolute"``
    uses ``delta`` itself.  Returns ``(t_Th, tau_Th)``.
    """
    if delta <= 0:
        raise DomainError("delta must be positive")
    if run_length < 1:
        raise DomainError("run_length must be >= 1")
    t = np.asarray(estimate.times)
    dim = estimate.dim
    if t[-1] < dim:
        raise DomainError(f"grid ends at t={t[-1]} before the Heisenberg time {dim}")
    dev = smooth_moving_average(t, estimate.K(1) - np.minimum(t, dim), alpha)
    if mode == "relative":
        thr = delta * dim
    elif mode == "absolute":
        thr = delta
    else:
        raise DomainError(f"unknown mode {mode!r}")
    start = 0 if t_min is None else int(np.searchsorted(t, t_min))
    below = dev < thr
    for i in range(start, t.size - run_length + 1):
        if below[i:i + run_length].all():
            return int(t[i]), t[i] / dim
    raise ThoulessNotFound(
        f"deviation never stays below {thr:.4g} for {run_length} points",
        float(np.min(dev[start:])) if start < t.size else float("nan"),
    )
