"""The commutant ``G_m`` of the m-fold periodic shift inside ``S_{mt}``,
its fixed-point statistics, and brute-force oracles for them.

Permutations are image arrays over ``0..n-1`` and compose as
``(a o b)(x) = a(b(x))``.  A point ``x = s + n t`` sits at position ``s``
of copy ``n``.
"""

import itertools
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DomainError

MAX_BRUTE_POINTS = 9
MAX_ELEMENTS = 10**7


def compose_perm(a, b):
    """``a o b`` for image arrays."""
    return np.asarray(a)[np.asarray(b)]


def invert_perm(a):
    a = np.asarray(a)
    out = np.empty_like(a)
    out[a] = np.arange(a.size)
    return out


def is_permutation(a):
    a = np.asarray(a)
    return a.ndim == 1 and np.array_equal(np.sort(a), np.arange(a.size))


@dataclass(frozen=True)
class GmElement:
    """``(rho, eta_{r_0}, ..., eta_{r_{m-1}})``: a permutation of the m
    copies together with a cyclic shift inside each copy."""

    rho: tuple
    shifts: tuple

    def __post_init__(self):
        object.__setattr__(self, "rho", tuple(int(x) for x in self.rho))
        object.__setattr__(self, "shifts", tuple(int(x) for x in self.shifts))
        if len(self.rho) != len(self.shifts):
            raise DomainError("rho and shifts must have the same length")
        if not is_permutation(self.rho):
            raise DomainError(f"rho={self.rho} is not a permutation")
        if any(r < 0 for r in self.shifts):
            raise DomainError("shifts must be reduced to [0, t)")

    @property
    def m(self):
        return len(self.rho)

    @classmethod
    def identity(cls, m):
        return cls(tuple(range(m)), (0,) * m)

    def reduced(self, t):
        return GmElement(self.rho, tuple(r % t for r in self.shifts))


def eta(t, r=1, m=1):
    """``eta_r^{(x) m}``: shift every copy cyclically by ``r``."""
    x = np.arange(m * t)
    s, n = x % t, x // t
    return (s + r) % t + n * t


def embed(elem, t):
    """Image array of ``mu(s + n t) = ((s + r_n) mod t) + rho(n) t``."""
    if t < 1:
        raise DomainError("t must be >= 1")
    m = elem.m
    x = np.arange(m * t)
    s, n = x % t, x // t
    shifts = np.asarray(elem.shifts, dtype=np.int64)
    rho = np.asarray(elem.rho, dtype=np.int64)
    return (s + shifts[n]) % t + rho[n] * t


def compose(a, b, t):
    """Group product with ``embed(compose(a, b)) = embed(a) o embed(b)``."""
    if a.m != b.m:
        raise DomainError("elements of different G_m")
    rho = tuple(a.rho[b.rho[n]] for n in range(a.m))
    shifts = tuple((b.shifts[n] + a.shifts[b.rho[n]]) % t for n in range(a.m))
    return GmElement(rho, shifts)


def inverse(a, t):
    rho_inv = invert_perm(a.rho)
    # mu^-1 maps copy rho(n) back to n, undoing shift r_n
    shifts = tuple((-a.shifts[rho_inv[k]]) % t for k in range(a.m))
    return GmElement(tuple(int(v) for v in rho_inv), shifts)


def group_elements(m, t):
    """All ``m! t^m`` elements of ``G_m``."""
    for rho in itertools.permutations(range(m)):
        for shifts in itertools.product(range(t), repeat=m):
            yield GmElement(rho, shifts)


def group_order(m, t):
    return math.factorial(m) * t**m


def commutant_bruteforce(m, t):
    """All ``mu`` in ``S_{mt}`` commuting with ``eta_1^{(x) m}``, found by
    checking every permutation of ``mt`` points."""
    n = m * t
    if n > MAX_BRUTE_POINTS:
        raise CapacityError(f"mt = {n} exceeds the brute-force limit of {MAX_BRUTE_POINTS} points",
                            limit=MAX_BRUTE_POINTS)
    e = eta(t, 1, m)
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int8).reshape(-1, n)
    # mu(eta(x)) == eta(mu(x)) for all x
    ok = np.all(perms[:, e] == e[perms], axis=1)
    return {tuple(int(v) for v in p) for p in perms[ok]}


def fixed_point_count(elem, t):
    """Number of points fixed by ``embed(elem, t)``, counted directly."""
    img = embed(elem, t)
    return int(np.count_nonzero(img == np.arange(img.size)))


def fixed_blocks(elem):
    """Bit mask of copies ``n`` with ``rho(n) = n`` and ``r_n = 0``."""
    return sum(1 << n for n in range(elem.m) if elem.rho[n] == n and elem.shifts[n] == 0)


def _check_guard(count, what):
    if count > MAX_ELEMENTS:
        raise CapacityError(f"{what} needs {count} elements, above the guard of {MAX_ELEMENTS}",
                            limit=MAX_ELEMENTS)


def _all_shifts(m, t):
    """Every shift vector, in ``itertools.product`` order."""
    return np.indices((t,) * m, dtype=np.int32).reshape(m, -1).T


def _fixed_counts_by_rho(rho, t):
    """Fixed-point counts of ``(rho, shifts)`` for every shift vector, from
    the embedded images, in ``itertools.product`` order."""
    m = len(rho)
    x = np.arange(m * t)
    s, n = x % t, x // t
    rho = np.asarray(rho)
    out = np.empty(t**m, dtype=np.int64)
    all_shifts = _all_shifts(m, t)
    chunk = max(1, 2**22 // max(m * t, 1))
    for a in range(0, all_shifts.shape[0], chunk):
        sh = all_shifts[a:a + chunk]
        img = (s[None, :] + sh[:, n]) % t + rho[n][None, :] * t
        out[a:a + chunk] = np.count_nonzero(img == x[None, :], axis=1)
    return all_shifts, out


def a_k_enumerate(m, t):
    """``A_k(t)``: number of elements of ``G_m`` with exactly ``k t`` fixed
    points, by enumerating the group and counting fixed points of each
    embedded permutation."""
    if m < 1 or t < 1:
        raise DomainError("need m >= 1 and t >= 1")
    _check_guard(group_order(m, t), "a_k_enumerate")
    counts = np.zeros(m + 1, dtype=np.int64)
    for rho in itertools.permutations(range(m)):
        _, fp = _fixed_counts_by_rho(rho, t)
        counts += np.bincount(fp // t, minlength=m + 1)
    return tuple(int(c) for c in counts)


def fixed_mask_distribution(m, t):
    """``{mask: count}`` of fixed-copy masks over ``G_m``, by enumeration."""
    _check_guard(group_order(m, t), "fixed_mask_distribution")
    dist = Counter()
    weights = 1 << np.arange(m)
    starts = np.arange(m) * t
    for rho in itertools.permutations(range(m)):
        shifts = _all_shifts(m, t)
        # a copy is fixed as a whole or not at all, so the image of its
        # first point decides
        img = shifts % t + np.asarray(rho) * t
        masks = (img == starts).astype(np.int64) @ weights
        vals, cnt = np.unique(masks, return_counts=True)
        for v, c in zip(vals.tolist(), cnt.tolist()):
            dist[v] += c
    return dict(dist)


def a_k_extended_enumerate(m, t, L):
    """``A_k(t)`` for ``L`` subsystems: the number of ``(L-1)``-tuples of
    ``G_m`` elements whose common fixed set has ``k t`` points.

    Points fixed by an element form whole copies, so the common fixed set
    of a tuple is the intersection of the members' fixed-copy masks.  The
    histogram over tuples is accumulated by repeatedly combining the
    per-element mask histogram under intersection, which counts every
    tuple exactly once.
    """
    if L < 2:
        raise DomainError("L must be >= 2")
    if m < 1 or t < 1:
        raise DomainError("need m >= 1 and t >= 1")
    _check_guard(group_order(m, t) ** (L - 1), "a_k_extended_enumerate")
    single = fixed_mask_distribution(m, t)
    acc = dict(single)
    for _ in range(L - 2):
        nxt = Counter()
        for a, ca in acc.items():
            for b, cb in single.items():
                nxt[a & b] += ca * cb
        acc = dict(nxt)
    counts = [0] * (m + 1)
    for mask, c in acc.items():
        counts[bin(mask).count("1")] += c
    return tuple(counts)


def phase_average_exponent(mu, nu, t):
    """Exponent ``n`` in ``<exp(i eps theta)> = |chi|^(2n)`` for the phase
    ``theta = sum_s xi_{i_s j_s} - xi_{i_{mu^-1(s)} j_{nu^-1(s)}}``.

    The labels ``i_s``, ``j_s`` are distinct symbols, so every phase is an
    independent variable; ``theta`` is reduced term by term and the
    surviving ``+xi`` and ``-xi`` terms each contribute a factor ``chi`` or
    its conjugate.
    """
    mu_img = embed(mu, t) if isinstance(mu, GmElement) else np.asarray(mu)
    nu_img = embed(nu, t) if isinstance(nu, GmElement) else np.asarray(nu)
    mu_inv, nu_inv = invert_perm(mu_img), invert_perm(nu_img)
    theta = Counter()
    for s in range(mu_img.size):
        theta[(s, s)] += 1
        theta[(int(mu_inv[s]), int(nu_inv[s]))] -= 1
    plus = sum(c for c in theta.values() if c > 0)
    minus = -sum(c for c in theta.values() if c < 0)
    if plus != minus or any(abs(c) > 1 for c in theta.values()):
        raise DomainError("phase does not reduce to independent +/- pairs")
    return plus
