"""Post-processing of stored estimates: collapse tests across system sizes."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError


@dataclass
class CollapseReport:
    passed: bool
    fraction_over: float
    n_points: int
    threshold: float = 3.0
    max_allowed: float = 0.05
    pairs: list = field(default_factory=list)

    def __str__(self):
        verdict = "PASS" if self.passed else "FAIL"
        return (f"collapse {verdict}: {self.fraction_over:.3%} of {self.n_points} points "
                f"exceed {self.threshold} standard errors (allowed {self.max_allowed:.0%})")


def _interp_log(x_new, x, y):
    return np.interp(np.log(x_new), np.log(x), y)


def standardized_differences(a, b, tau_min, m=1):
    """``|kappa_a - kappa_b| / sqrt(se_a^2 + se_b^2)`` on ``a``'s grid points
    inside the common range above ``tau_min``; ``b`` is interpolated in
    ``log tau``."""
    ta, tb = a.tau, b.tau
    lo = max(ta[0], tb[0])
    hi = min(ta[-1], tb[-1])
    sel = (ta > tau_min) & (ta >= lo) & (ta <= hi)
    if not np.any(sel):
        raise DomainError(f"tau grids do not overlap above tau_min={tau_min}")
    tau = ta[sel]
    ka, sa = a.kappa_m(m)[sel], a.kappa_stderr_m(m)[sel]
    kb = _interp_log(tau, tb, b.kappa_m(m))
    sb = _interp_log(tau, tb, b.kappa_stderr_m(m))
    den = np.sqrt(sa**2 + sb**2)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(den > 0, np.abs(ka - kb) / den, np.where(ka == kb, 0.0, np.inf))
    return tau, z


def collapse_check(estimates, tau_min, m=1, threshold=3.0, max_fraction=0.05):
    """Pass when fewer than ``max_fraction`` of all pairwise standardized
    differences above ``tau_min`` exceed ``threshold``."""
    if len(estimates) < 2:
        raise DomainError("collapse_check needs at least two estimates")
    total, over, pairs = 0, 0, []
    for i in range(len(estimates)):
        for j in range(i + 1, len(estimates)):
            tau, z = standardized_differences(estimates[i], estimates[j], tau_min, m)
            n_over = int(np.count_nonzero(z > threshold))
            pairs.append({"pair": (i, j), "points": int(z.size), "over": n_over,
                          "max_z": float(np.max(z))})
            total += z.size
            over += n_over
    frac = over / total
    return CollapseReport(frac < max_fraction, frac, total, threshold, max_fraction, pairs)
