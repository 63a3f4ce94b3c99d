"""Floquet operators: (extended) random matrix transition ensemble and
coupled kicked rotors, plus eigenphase extraction."""

import os
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.linalg as sla

from .errors import AccuracyError, CapacityError, ConvergenceError, DomainError
from .rng import PhaseDistribution, as_generator, sample_coupling_phases, sample_cue

DEFAULT_MAX_DIM = 8192
DEFAULT_KA = 9.7
DEFAULT_KB = 10.5
PHASE_TOL = 1e-8

# global rotations tried before falling back to the general eigensolver
_CAYLEY_ROTATIONS = (0.5718, 2.3171, -1.2437)


@dataclass(frozen=True)
class RmteParams:
    N: int
    L: int = 2
    eps: float = 0.0
    dist: PhaseDistribution = field(default_factory=PhaseDistribution.uniform)

    def __post_init__(self):
        if int(self.N) < 1:
            raise DomainError("N must be >= 1")
        if int(self.L) < 1:
            raise DomainError("L must be >= 1")
        if self.eps < 0:
            raise DomainError("eps must be >= 0")

    @property
    def dim(self):
        return int(self.N) ** int(self.L)


@dataclass(frozen=True)
class KickedRotorParams:
    N: int
    gamma: float = 0.0
    kA: float = DEFAULT_KA
    kB: float = DEFAULT_KB

    def __post_init__(self):
        if int(self.N) < 2:
            raise DomainError("kicked rotor needs N >= 2")
        if self.gamma < 0:
            raise DomainError("gamma must be >= 0")

    @property
    def dim(self):
        return int(self.N) ** 2


@dataclass(frozen=True)
class BlochPhases:
    theta_qA: float
    theta_qB: float
    theta_pA: float
    theta_pB: float

    def __post_init__(self):
        for name in ("theta_qA", "theta_qB", "theta_pA", "theta_pB"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise DomainError(f"{name}={v} outside [0, 1)")
            if v in (0.0, 0.5):
                raise DomainError(f"{name}={v} leaves an antiunitary symmetry intact")

    @classmethod
    def random(cls, rng):
        gen = as_generator(rng)
        while True:
            th = gen.random(4)
            if not np.any((th == 0.0) | (th == 0.5)):
                return cls(*map(float, th))


@dataclass(frozen=True)
class FloquetOperator:
    """Dense unitary with provenance.

    ``factors`` and ``coupling`` keep the tensor structure
    ``U = diag(coupling) (factors[0] x ... x factors[-1])`` when known;
    ``coupling`` is None for an uncoupled product.
    """

    matrix: np.ndarray
    provenance: dict = field(default_factory=dict)
    factors: tuple = ()
    coupling: np.ndarray = None

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def dim(self):
        return self.matrix.shape[0]


@dataclass(frozen=True)
class EigenphaseSet:
    phases: np.ndarray
    dim: int
    unitarity_residual: float = 0.0
    method: str = ""

    def __len__(self):
        return self.dim


def _check_capacity(dim, max_dim):
    if max_dim is not None and dim > max_dim:
        raise CapacityError(
            f"Hilbert space dimension {dim} exceeds the cap of {max_dim}", limit=max_dim
        )


def unitarity_residual(matrix):
    """``max |U^dag U - I|`` elementwise."""
    m = np.asarray(matrix)
    g = m.conj().T @ m
    g[np.diag_indices_from(g)] -= 1.0
    return float(np.max(np.abs(g)))


def build_rmte(params, rng, max_dim=DEFAULT_MAX_DIM):
    """Sample ``U = D (U_1 x ... x U_L)`` with ``D = diag(exp(i eps xi))``.

    The L CUE(N) factors are drawn first, then the N**L coupling phases, all
    from the same stream.  Phases are drawn even at ``eps = 0`` so ensembles
    at different couplings share their subsystem draws.
    """
    N, L = int(params.N), int(params.L)
    dim = N**L
    _check_capacity(dim, max_dim)
    gen = as_generator(rng)
    factors = tuple(sample_cue(N, gen) for _ in range(L))
    xi = sample_coupling_phases(dim, params.dist, gen)
    w = reduce(np.kron, factors)
    coupling = None
    if params.eps != 0.0:
        coupling = np.exp(1j * params.eps * xi)
        w = w * coupling[:, None]
    prov = {
        "model": "rmte",
        "N": N,
        "L": L,
        "eps": float(params.eps),
        "dist": params.dist.to_dict(),
    }
    if isinstance(rng, (int, np.integer)) or hasattr(rng, "master_seed"):
        prov["seed"] = getattr(rng, "master_seed", rng)
        prov["stream"] = getattr(rng, "stream_index", 0)
    return FloquetOperator(w, prov, factors, coupling)


def rotor_grids(N, theta_q, theta_p):
    n = np.arange(N)
    return (n + theta_q) / N, (n + theta_p) / N


def single_rotor(N, k, theta_q, theta_p):
    """One kicked-rotor Floquet matrix in the position basis.

    ``U = G^dag diag(exp(-i pi N p^2)) G diag(exp(-2 pi i N V(q)))`` with the
    overlap ``G[n, m] = <p_n|q_m> = exp(-2 pi i N p_n q_m) / sqrt(N)`` and
    ``V(q) = k cos(2 pi q) / (4 pi^2)``.
    """
    q, p = rotor_grids(N, theta_q, theta_p)
    g = np.exp(-2j * np.pi * N * np.outer(p, q)) / np.sqrt(N)
    kick = np.exp(-1j * (k * N / (2 * np.pi)) * np.cos(2 * np.pi * q))
    kinetic = np.exp(-1j * np.pi * N * p**2)
    return ((g.conj().T * kinetic) @ g) * kick[None, :]


def build_single_rotor(N, k, theta_q, theta_p):
    u = single_rotor(N, k, theta_q, theta_p)
    prov = {"model": "single_rotor", "N": int(N), "k": float(k),
            "theta_q": float(theta_q), "theta_p": float(theta_p)}
    return FloquetOperator(u, prov, (u,), None)


def build_kicked_rotor_pair(params, bloch, max_dim=DEFAULT_MAX_DIM):
    """Coupled kicked rotors ``U = U_c (U_A x U_B)`` on the N^2 product grid."""
    N = int(params.N)
    _check_capacity(N * N, max_dim)
    ua = single_rotor(N, params.kA, bloch.theta_qA, bloch.theta_pA)
    ub = single_rotor(N, params.kB, bloch.theta_qB, bloch.theta_pB)
    w = np.kron(ua, ub)
    coupling = None
    if params.gamma != 0.0:
        qa, _ = rotor_grids(N, bloch.theta_qA, bloch.theta_pA)
        qb, _ = rotor_grids(N, bloch.theta_qB, bloch.theta_pB)
        arg = np.cos(2 * np.pi * (qa[:, None] + qb[None, :])).ravel()
        coupling = np.exp(-1j * params.gamma * N / (2 * np.pi) * arg)
        w = w * coupling[:, None]
    prov = {
        "model": "kicked_rotor_pair",
        "N": N,
        "gamma": float(params.gamma),
        "kA": float(params.kA),
        "kB": float(params.kB),
        "bloch": [bloch.theta_qA, bloch.theta_qB, bloch.theta_pA, bloch.theta_pB],
    }
    return FloquetOperator(w, prov, (ua, ub), coupling)


def wrap_phases(phases):
    """Map angles into ``[-pi, pi)``."""
    out = np.mod(np.asarray(phases, dtype=float) + np.pi, 2 * np.pi) - np.pi
    # mod can round up to exactly 2 pi
    out[out >= np.pi] -= 2 * np.pi
    return out


def _general_phases(u):
    try:
        lam = np.linalg.eigvals(u)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    return np.angle(lam), float(np.max(np.abs(np.abs(lam) - 1.0)))


def _trace_residual(u, phases):
    n = u.shape[0]
    z = np.exp(1j * phases)
    r1 = abs(z.sum() - np.trace(u))
    r2 = abs((z * z).sum() - np.sum(u * u.T))
    return float(max(r1, r2) / n)


_torch = None


def _torch_module():
    global _torch
    if _torch is None:
        if os.environ.get("RMTE_SFF_BACKEND", "auto") == "scipy":
            _torch = False
        else:
            try:
                import torch

                _torch = torch
            except ImportError:
                _torch = False
    return _torch


def _cayley_tangents(u, alpha, backend):
    """Eigenvalues ``tan(theta / 2)`` of the Cayley transform of
    ``exp(-i alpha) u``; Hermitian, so a symmetric solver applies."""
    n = u.shape[0]
    v = u * np.exp(-1j * alpha)
    torch = _torch_module() if backend in ("auto", "torch") else False
    if torch:
        t = torch.from_numpy(np.ascontiguousarray(v))
        eye = torch.eye(n, dtype=t.dtype)
        x = torch.linalg.solve(eye + t, eye - t)
        h = 1j * x
        h = 0.5 * (h + h.conj().T)
        return torch.linalg.eigvalsh(h).numpy()
    vh = v.conj().T
    s = (v - vh) / 2j
    b = (v + vh) / 2
    b[np.diag_indices(n)] += 1.0
    return sla.eigh(s, b, eigvals_only=True, check_finite=False,
                    overwrite_a=True, overwrite_b=True)


def _cayley_phases(u, backend="auto"):
    last = None
    for alpha in _CAYLEY_ROTATIONS:
        try:
            lam = _cayley_tangents(u, alpha, backend)
        except (np.linalg.LinAlgError, RuntimeError, ValueError) as exc:
            last = exc
            continue
        phases = alpha + 2.0 * np.arctan(lam)
        res = _trace_residual(u, phases)
        if res <= PHASE_TOL:
            return phases, res
        last = res
    return None, last


def eigenphases(op, method="auto", backend="auto"):
    """Sorted eigenphases in ``[-pi, pi)`` of a Floquet operator.

    ``method``:
      * ``"general"``: dense non-Hermitian eigensolver; the residual is
        ``max | |lambda| - 1 |``.
      * ``"cayley"``: Hermitian eigenproblem of the Cayley transform
        ``i (1 - U)(1 + U)^-1`` after a global phase rotation, with
        eigenphases ``2 arctan(lambda)``.  Several times faster than the
        general solver; accuracy is checked against ``tr U`` and
        ``tr U^2`` and the general solver takes over if that check fails.
      * ``"auto"``: eigenphase sums of the factors for uncoupled products,
        otherwise ``"cayley"``.
    """
    u = op.matrix if isinstance(op, FloquetOperator) else np.asarray(op)
    n = u.shape[0]
    prov = getattr(op, "provenance", {})
    factors = getattr(op, "factors", ())
    if method == "auto" and factors and op.coupling is None and len(factors) > 1:
        parts = [eigenphases(f, "general").phases for f in factors]
        total = reduce(np.add.outer, parts).ravel()
        phases = np.sort(wrap_phases(total))
        return EigenphaseSet(phases, n, 0.0, "factors")

    if method in ("auto", "cayley") and n > 1:
        phases, res = _cayley_phases(u, backend)
        if phases is not None:
            return EigenphaseSet(np.sort(wrap_phases(phases)), n, res, "cayley")
        method = "general"
    if method not in ("general", "auto", "cayley"):
        raise DomainError(f"unknown eigenphase method {method!r}")

    try:
        phases, res = _general_phases(u)
    except ConvergenceError as exc:
        raise ConvergenceError(f"eigensolver failed for {prov or 'matrix'}: {exc}") from exc
    if res > PHASE_TOL:
        raise AccuracyError(
            f"eigenvalues off the unit circle by {res:.3g} for {prov or 'matrix'}",
            residual=res,
        )
    return EigenphaseSet(np.sort(wrap_phases(phases)), n, res, "general")


MAGIC = b"EIGPHS01"


def save_eigenphases(path, phases):
    """Write one or more eigenphase sets of equal dimension.

    Layout: 8-byte magic ``EIGPHS01``, little-endian uint64 dimension, then
    little-endian float64 records of ``dim`` phases each.
    """
    arr = np.atleast_2d(np.asarray(getattr(phases, "phases", phases), dtype="<f8"))
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(np.uint64(arr.shape[1]).astype("<u8").tobytes())
        fh.write(arr.tobytes())


def load_eigenphases(path):
    """Read a file written by :func:`save_eigenphases`; returns ``(records, dim)``."""
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) != 16 or head[:8] != MAGIC:
            raise ValueError(f"{path}: not an eigenphase dump")
        dim = int(np.frombuffer(head[8:], dtype="<u8")[0])
        body = np.frombuffer(fh.read(), dtype="<f8")
    if dim == 0 or body.size % dim:
        raise ValueError(f"{path}: truncated eigenphase dump")
    return body.reshape(-1, dim).astype(float)
