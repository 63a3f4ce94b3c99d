"""Closed-form large-N predictions for the spectral form factor of coupled
chaotic systems and the tools to evaluate them."""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import AccuracyError, DivergenceError, DomainError, UnsupportedOrderError
from .rng import characteristic_function

SHORT = "short"
EXTRAPOLATED = "extrapolated"


def _scalar(x):
    return x[()] if isinstance(x, np.ndarray) and x.ndim == 0 else x


@dataclass(frozen=True)
class ScalingParams:
    N: int
    L: int
    eps: float
    sigma: float

    @property
    def Gamma(self):
        return self.sigma * self.eps * self.N ** (self.L / 2)

    @property
    def Lambda(self):
        return self.Gamma**2 / (4 * np.pi**2)

    @property
    def dim(self):
        return self.N**self.L


def gamma_parameter(N, L, eps, sigma):
    return ScalingParams(N, L, eps, sigma).Gamma


def eps_for_gamma(Gamma, N, L, sigma):
    """Coupling strength realizing a given ``Gamma = sigma eps N^(L/2)``."""
    return Gamma / (sigma * N ** (L / 2))


def tau_sh(N, L):
    """Subsystem Heisenberg time ``t = N`` in units of ``N^L``."""
    return float(N) ** (1 - L)


@dataclass
class TheoryCurve:
    x: np.ndarray
    values: np.ndarray
    tag: str
    params: dict = field(default_factory=dict)
    xname: str = "t"

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise DomainError(f"non-finite values in theory curve {self.tag}")


def sff_cue(M, t):
    """CUE(M) form factor ``min(t, M)``."""
    if M < 1:
        raise DomainError("M must be >= 1")
    return _scalar(np.minimum(np.asarray(t, dtype=float), M))


def _chi_abs2(eps, dist):
    return float(abs(characteristic_function(dist, eps)) ** 2)


def sff_prediction(t, N, L, eps, dist, mode=SHORT):
    """Convex combination of the uncoupled and fully random form factors.

    Short-time: ``x t^L + (1 - x) t``; extrapolated:
    ``x K_N(t)^L + (1 - x) K_{N^L}(t)``, with ``x = |chi(eps)|^(2t)``.
    """
    t = np.asarray(t, dtype=float)
    x = _chi_abs2(eps, dist) ** t
    if mode == SHORT:
        out = x * t**L + (1 - x) * t
    elif mode == EXTRAPOLATED:
        out = x * np.minimum(t, N) ** L + (1 - x) * np.minimum(t, N**L)
    else:
        raise DomainError(f"unknown mode {mode!r}")
    return _scalar(out)


def kappa_prediction(t, N, L, eps, dist, mode=EXTRAPOLATED):
    """Rescaled first moment ``K / N^L``."""
    return sff_prediction(t, N, L, eps, dist, mode) / N**L


def sff_prediction_scaled(tau, Gamma, L=2, N=None):
    """``exp(-Gamma^2 tau) + (1 - exp(-Gamma^2 tau)) min(tau, 1)``.

    Valid beyond the subsystem Heisenberg time where ``K_N^L / N^L = 1``.
    With ``N`` given the uncoupled term keeps its exact finite-N ramp
    ``min(tau N^(L-1), 1)^L`` instead.
    """
    tau = np.asarray(tau, dtype=float)
    x = np.exp(-(Gamma**2) * tau)
    plateau = 1.0 if N is None else np.minimum(tau * float(N) ** (L - 1), 1.0) ** L
    return _scalar(x * plateau + (1 - x) * np.minimum(tau, 1.0))


@lru_cache(maxsize=None)
def subfactorial(n):
    """Number of derangements ``!n``."""
    if n < 0:
        raise DomainError("subfactorial of a negative number")
    a, b = 1, 0
    if n == 0:
        return 1
    for k in range(2, n + 1):
        a, b = b, (k - 1) * (a + b)
    return b


def a_k_closed_form(m, k, t):
    """Number of elements of ``G_m`` with exactly ``k t`` fixed points."""
    if not 0 <= k <= m:
        raise DomainError(f"need 0 <= k <= m, got k={k}, m={m}")
    if m < 1 or t < 1:
        raise DomainError("need m >= 1 and t >= 1")
    return sum(
        math.comb(m, l) * math.comb(l, k) * subfactorial(m - l) * t ** (m - l) * (t - 1) ** (l - k)
        for l in range(k, m + 1)
    )


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _poly_pow(a, n):
    out = [1]
    for _ in range(n):
        out = _poly_mul(out, a)
    return out


@lru_cache(maxsize=None)
def a_k_polynomial(m, k):
    """Integer coefficients of ``A_k(t)`` in increasing powers of ``t``."""
    total = [0] * (m + 1)
    for l in range(k, m + 1):
        c = math.comb(m, l) * math.comb(l, k) * subfactorial(m - l)
        term = _poly_mul([0] * (m - l) + [1], _poly_pow([-1, 1], l - k))
        for i, v in enumerate(term):
            total[i] += c * v
    return tuple(total)


@lru_cache(maxsize=None)
def moment_coefficients(m):
    """``K_m = sum c[l, j] t^l x^j`` with ``x = |chi|^(2t)`` (bipartite).

    Returns a dict ``{(l, j): c}`` of nonzero integer coefficients.
    """
    out = {}
    mf = math.factorial(m)
    for k in range(m + 1):
        for i, c in enumerate(a_k_polynomial(m, k)):
            if c:
                key = (i + m, m - k)
                out[key] = out.get(key, 0) + mf * c
    return {key: v for key, v in out.items() if v}


def moment_prediction(t, m, N, eps, dist, mode=SHORT, L=2):
    """Large-N moment ``K_m(t) = <|tr U^t|^(2m)>``.

    Short-time form ``m! t^m sum_k A_k(t) x^(m-k)``.  The extrapolated form
    replaces every monomial ``t^l`` of that expansion by
    ``K_{N^2}(t)^(2m-l) K_N(t)^(2(l-m))``; it is only available for
    bipartite systems and ``m <= 3``.
    """
    t = np.asarray(t, dtype=float)
    if m < 1:
        raise DomainError("moment order must be >= 1")
    if m == 1:
        return sff_prediction(t, N, L, eps, dist, mode)
    x = _chi_abs2(eps, dist) ** t
    if mode == SHORT:
        if L == 2:
            out = sum(c * t**l * x**j for (l, j), c in moment_coefficients(m).items())
        else:
            from .combinatorics import a_k_extended_enumerate

            ts = np.atleast_1d(t)
            vals = []
            for ti, xi in zip(ts, np.atleast_1d(x)):
                ak = a_k_extended_enumerate(m, int(ti), L)
                vals.append(math.factorial(m) * ti**m * sum(a * xi ** (m - k) for k, a in enumerate(ak)))
            out = np.asarray(vals).reshape(t.shape)
        return _scalar(out)
    if mode != EXTRAPOLATED:
        raise DomainError(f"unknown mode {mode!r}")
    if m > 3:
        raise UnsupportedOrderError(f"no extrapolated formula for moment order {m}")
    if L != 2:
        raise UnsupportedOrderError("extrapolated higher moments are bipartite only")
    kn = np.minimum(t, N)
    kn2 = np.minimum(t, N**2)
    out = sum(c * kn2 ** (2 * m - l) * kn ** (2 * (l - m)) * x**j
              for (l, j), c in moment_coefficients(m).items())
    return _scalar(out)


def kappa_moment_prediction(t, m, N, eps, dist, mode=EXTRAPOLATED, L=2):
    """Rescaled moment ``(K_m / m!)^(1/m) / N^L``."""
    k = moment_prediction(t, m, N, eps, dist, mode, L)
    return (np.asarray(k) / math.factorial(m)) ** (1 / m) / N**L


def lambert_w0(x, tol=1e-13, maxiter=100):
    """Principal branch of the Lambert W function by Halley iteration.

    Starts from ``log(1 + x)`` for ``x >= 0`` and from the branch-point
    series for ``-1/e <= x < 0``.
    """
    x = float(x)
    if x < -1 / math.e:
        raise DomainError("W0 is real only for x >= -1/e")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    if x > 1e10:
        # w exp(w) overflows the Halley step near the top of the double range
        return lambert_w0_log(math.log(x))
    if x >= 0:
        w = math.log1p(x)
    else:
        p = math.sqrt(max(2 * (math.e * x + 1), 0.0))
        w = -1 + p - p * p / 3 + 11 / 72 * p**3
        if w <= -1:
            return -1.0
    for _ in range(maxiter):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1
        if wp1 == 0:
            break
        step = f / (ew * wp1 - (w + 2) * f / (2 * wp1))
        w -= step
        if abs(step) <= tol * (1 + abs(w)):
            return w
    return w


def lambert_w0_log(log_x, tol=1e-14, maxiter=100):
    """``W0(exp(log_x))`` for arguments too large to form, from
    ``w + log(w) = log_x`` by Newton iteration."""
    if log_x < 1:
        return lambert_w0(math.exp(log_x))
    w = log_x - math.log(log_x)
    for _ in range(maxiter):
        step = (w + math.log(w) - log_x) / (1 + 1 / w)
        w -= step
        if abs(step) <= tol * abs(w):
            break
    return w


def thouless_time_lambert(Gamma, delta):
    """Root of ``(1 - tau) exp(-Gamma^2 tau) = delta``:
    ``tau = 1 - W0(delta Gamma^2 exp(Gamma^2)) / Gamma^2``."""
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    if Gamma <= 0:
        raise DomainError("Gamma must be positive")
    g2 = float(Gamma) ** 2
    log_x = math.log(delta) + math.log(g2) + g2
    w = lambert_w0(math.exp(log_x)) if log_x < 20 else lambert_w0_log(log_x)
    return 1.0 - w / g2


def thouless_time_absolute(N, L, eps, dist, Delta):
    """Time at which ``N^L |chi|^(2t)`` falls to ``Delta``.

    Returns ``(t_exact, t_large_N)`` where the second form drops ``Delta``.
    """
    c = abs(characteristic_function(dist, eps))
    if c >= 1:
        raise DivergenceError("|chi| = 1: the uncoupled system never thermalizes")
    if Delta <= 0:
        raise DomainError("Delta must be positive")
    if c == 0:
        return 0.0, 0.0
    lc = math.log(c)
    return (math.log(Delta) - L * math.log(N)) / (2 * lc), L * math.log(N) / (2 * abs(lc))


def ehrenfest_estimate(N, kA, kB):
    """``ln(N) / (2 ln(kA kB / 4))``."""
    if kA * kB <= 4:
        raise DomainError("kA kB must exceed 4 for a chaotic estimate")
    return math.log(N) / (2 * math.log(kA * kB / 4))


def transition_parameter(N, L, eps, dist):
    """``(Lambda_exact, Lambda_small_eps)``:
    ``N^L (1 - |chi|^2) / 4 pi^2`` and ``sigma^2 eps^2 N^L / 4 pi^2``."""
    dim = float(N) ** L
    exact = dim * (1 - _chi_abs2(eps, dist)) / (4 * np.pi**2)
    small = dist.sigma2 * eps**2 * dim / (4 * np.pi**2)
    return exact, small


def offdiagonal_variance(N, L, eps, dist):
    """Mean squared off-diagonal coupling element in the uncoupled
    eigenbasis, ``(1 - (2/(N+1))^L)(1 - |chi|^2) / (N^L - 1)``, without the
    large-N simplification."""
    dim = float(N) ** L
    return (1 - (2 / (N + 1)) ** L) * (1 - _chi_abs2(eps, dist)) / (dim - 1)


def transition_parameter_finite(N, L, eps, dist):
    """``nu^2 / D^2`` with ``D = 2 pi / N^L`` from :func:`offdiagonal_variance`."""
    dim = float(N) ** L
    return offdiagonal_variance(N, L, eps, dist) * dim**2 / (4 * np.pi**2)


def offdiagonal_variance_mc(N, L, eps, dist, samples, rng):
    """Monte Carlo estimate of the mean squared off-diagonal coupling element.

    Each sample draws an uncoupled eigenbasis ``W = w_1 x ... x w_L`` and a
    phase vector; the diagonal weight ``d = sum_I |z_II|^2`` follows from
    ``z_II = sum_K |W_KI|^2 exp(i eps xi_K)`` and row normalization gives
    the off-diagonal sum.  Returns ``(mean, stderr)``.
    """
    from functools import reduce

    from .rng import as_generator, sample_coupling_phases, sample_cue

    gen = as_generator(rng)
    dim = N**L
    vals = np.empty(samples)
    for i in range(samples):
        w = [np.abs(sample_cue(N, gen)) ** 2 for _ in range(L)]
        p = reduce(np.kron, w)
        xi = sample_coupling_phases(dim, dist, gen)
        z = p.T @ np.exp(1j * eps * xi)
        d = float(np.sum(np.abs(z) ** 2))
        vals[i] = (dim - d) / (dim**2 - dim)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(samples))


def tau_pert(t, N, L, Lambda):
    """``sqrt(Lambda) D t`` with ``D = 2 pi / N^L``."""
    return np.sqrt(Lambda) * 2 * np.pi * np.asarray(t, dtype=float) / float(N) ** L


def sff_perturbative(tau_p, Lambda):
    """``1 - 2 pi sqrt(Lambda) tau_p exp(-tau_p^2)``."""
    tau_p = np.asarray(tau_p, dtype=float)
    return _scalar(1 - 2 * np.pi * np.sqrt(Lambda) * tau_p * np.exp(-(tau_p**2)))


def sff_perturbative_gamma(tau, Gamma):
    """Same curve in ``(tau, Gamma)``: ``1 - Gamma^2 tau exp(-(Gamma tau)^2)``,
    identical to :func:`sff_perturbative` at ``tau_p = Gamma tau``."""
    tau = np.asarray(tau, dtype=float)
    return _scalar(1 - Gamma**2 * tau * np.exp(-((Gamma * tau) ** 2)))


def perturb_integral_closed(tau_p, Lambda):
    return _scalar(-2 * np.pi * np.sqrt(Lambda) * np.asarray(tau_p, float) * np.exp(-np.asarray(tau_p, float) ** 2))


def _radial_weight(u):
    """``u exp(-u^2/4) int_0^u exp(z^2/4) dz`` by adaptive quadrature;
    tends to 2 for large ``u``."""
    if u == 0:
        return 0.0
    # z = u - s puts the peak of the integrand at s = 0, where it decays
    # like exp(-u s / 2)
    top = min(u, 200.0 / u)
    val, _ = integrate.quad(lambda s: np.exp(s * (s - 2 * u) / 4), 0.0, top,
                            epsabs=1e-15, epsrel=1e-13, limit=200)
    return u * val


def perturb_integral_numeric(tau_p, Lambda, tol=1e-8):
    """Quadrature value of
    ``sqrt(Lambda) int dz int_0^inf dw cos(tau_p sqrt(z^2 + 4 w)) exp(-w)``.

    The z-integral converges only in the Abel sense.  Substituting
    ``u = sqrt(z^2 + 4 w)`` and swapping the order of integration gives
    ``int_0^inf cos(tau_p u) F(u) du`` with
    ``F(u) = u exp(-u^2/4) int_0^u exp(z^2/4) dz``.  ``F`` tends to 2, and
    that constant integrates to zero against the cosine in the same Abel
    sense, so it is subtracted.  The outer Fourier integral runs through
    QUADPACK's QAWF and the inner one through adaptive Gauss-Kronrod.
    """
    if Lambda <= 0:
        raise DomainError("Lambda must be positive")
    if tau_p < 0:
        raise DomainError("tau_p must be >= 0")

    def f(u):
        return _radial_weight(u) - 2.0

    if tau_p == 0:
        head, e1 = integrate.quad(f, 0, 50.0, epsabs=tol / 10, limit=200)
        tail, e2 = integrate.quad(f, 50.0, np.inf, epsabs=tol / 10, limit=200)
        val, err = head + tail, e1 + e2
    else:
        val, err, *_ = integrate.quad(f, 0, np.inf, weight="cos", wvar=tau_p,
                                      epsabs=tol / 10, limlst=200, limit=500,
                                      full_output=1)
    val *= np.sqrt(Lambda)
    err *= np.sqrt(Lambda)
    if not np.isfinite(val) or err > tol:
        raise AccuracyError(f"perturbation integral error estimate {err:.3g} above {tol}",
                            estimate=float(val), residual=float(err))
    return float(val)


def short_time_curve(times, N, L, eps, dist, mode=EXTRAPOLATED, m=1):
    vals = kappa_moment_prediction(times, m, N, eps, dist, mode, L) if m > 1 else \
        kappa_prediction(times, N, L, eps, dist, mode)
    return TheoryCurve(np.asarray(times) / N**L, vals, f"kappa{m}_{mode}",
                       {"N": N, "L": L, "eps": eps, "dist": dist.to_dict(), "m": m}, "tau")
