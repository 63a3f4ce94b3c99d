"""Deterministic random sampling: Haar unitaries and coupling phases.

Every realization of an ensemble owns an :class:`RngStream` identified by a
master seed and a stream index.  The pair is hashed through
:class:`numpy.random.SeedSequence`, so realizations are reproducible
bit-for-bit no matter how they are scheduled across workers.
"""

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DimensionError, DomainError

UNIFORM = "uniform"
ARCSINE = "arcsine"
POINT = "point"


@dataclass(frozen=True)
class PhaseDistribution:
    """Law of the i.i.d. coupling phases.

    ``kind`` is one of ``"uniform"`` (uniform on ``[-halfwidth, halfwidth]``),
    ``"arcsine"`` (law of ``cos(eta)`` with ``eta`` uniform on ``[-pi, pi]``)
    or ``"point"`` (point mass at zero).
    """

    kind: str = UNIFORM
    halfwidth: float = np.pi

    def __post_init__(self):
        if self.kind not in (UNIFORM, ARCSINE, POINT):
            raise DomainError(f"unknown phase distribution kind {self.kind!r}")
        if self.kind == UNIFORM and not self.halfwidth > 0:
            raise DomainError("uniform halfwidth must be positive")

    @classmethod
    def uniform(cls, halfwidth=np.pi):
        return cls(UNIFORM, float(halfwidth))

    @classmethod
    def arcsine(cls):
        return cls(ARCSINE, 1.0)

    @classmethod
    def point_mass(cls):
        return cls(POINT, 0.0)

    @property
    def sigma2(self):
        """Variance of the law."""
        if self.kind == UNIFORM:
            return self.halfwidth**2 / 3.0
        if self.kind == ARCSINE:
            return 0.5
        return 0.0

    @property
    def sigma(self):
        return float(np.sqrt(self.sigma2))

    def sample(self, rng, size):
        gen = as_generator(rng)
        if self.kind == UNIFORM:
            return gen.uniform(-self.halfwidth, self.halfwidth, size)
        if self.kind == ARCSINE:
            return np.cos(gen.uniform(-np.pi, np.pi, size))
        return np.zeros(size)

    def characteristic_function(self, eps):
        return characteristic_function(self, eps)

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == UNIFORM:
            d["halfwidth"] = self.halfwidth
        return d

    @classmethod
    def from_dict(cls, d):
        if isinstance(d, str):
            d = {"kind": d}
        kind = d.get("kind", UNIFORM)
        if kind == UNIFORM:
            return cls.uniform(d.get("halfwidth", np.pi))
        if kind == ARCSINE:
            return cls.arcsine()
        if kind == POINT:
            return cls.point_mass()
        raise DomainError(f"unknown phase distribution kind {kind!r}")


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream for one realization."""

    master_seed: int
    stream_index: int = 0

    def generator(self):
        seq = np.random.SeedSequence(
            entropy=int(self.master_seed) & 0xFFFFFFFFFFFFFFFF,
            spawn_key=(int(self.stream_index) & 0xFFFFFFFFFFFFFFFF,),
        )
        return np.random.Generator(np.random.PCG64(seq))


def as_generator(rng):
    """Accept an RngStream, a Generator or an int seed."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_cue(n, rng):
    """Draw an ``n x n`` Haar-random unitary.

    Ginibre matrix, QR factorization, then each column of Q is multiplied by
    the phase of the matching diagonal entry of R.  Without that correction
    the result is not Haar distributed.
    """
    n = int(n)
    if n < 1:
        raise DimensionError(f"CUE dimension must be >= 1, got {n}")
    gen = as_generator(rng)
    z = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    z *= np.sqrt(0.5)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def sample_coupling_phases(total_dim, dist, rng):
    total_dim = int(total_dim)
    if total_dim < 1:
        raise DimensionError(f"phase vector length must be >= 1, got {total_dim}")
    return dist.sample(rng, total_dim)


def characteristic_function(dist, eps):
    """Exact ``<exp(i eps xi)>`` of the phase law, vectorized in ``eps``.

    Uniform on ``[-a, a]`` gives ``sin(a eps) / (a eps)``; the arcsine law
    gives the Bessel function ``J0(eps)``; the point mass gives 1.
    """
    eps = np.asarray(eps, dtype=float)
    if dist.kind == UNIFORM:
        # np.sinc(x) = sin(pi x) / (pi x)
        out = np.sinc(dist.halfwidth * eps / np.pi)
    elif dist.kind == ARCSINE:
        out = special.j0(eps)
    else:
        out = np.ones_like(eps)
    out = out.astype(complex)
    return out[()] if out.ndim == 0 else out
