"""Experiment description: which model, which sizes, how many realizations."""

import json
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .errors import CapacityError, ConfigError, RmteError
from .models import (
    DEFAULT_KA,
    DEFAULT_KB,
    DEFAULT_MAX_DIM,
    BlochPhases,
    FloquetOperator,
    KickedRotorParams,
    RmteParams,
    build_kicked_rotor_pair,
    build_rmte,
    build_single_rotor,
)
from .rng import PhaseDistribution, RngStream, sample_cue

MODELS = ("rmte", "rmte_extended", "kicked_rotor_pair", "single_cue", "single_kicked_rotor")
RMTE_MODELS = ("rmte", "rmte_extended")
ROTOR_MODELS = ("kicked_rotor_pair", "single_kicked_rotor")


@dataclass(frozen=True)
class EnsembleSpec:
    """Everything needed to reproduce one ensemble run.

    ``N`` is the subsystem dimension (the matrix size for the single-system
    controls).  ``t_max`` defaults to four Heisenberg times; integer times
    up to ``dense_until`` (default ``4 N``) are all kept and the rest is
    thinned logarithmically to at most ``max_points`` grid points in total.
    """

    model: str = "rmte"
    N: int = 16
    L: int = 2
    eps: float = 0.0
    gamma: float = 0.0
    dist: PhaseDistribution = field(default_factory=PhaseDistribution.uniform)
    kA: float = DEFAULT_KA
    kB: float = DEFAULT_KB
    realizations: int = 100
    master_seed: int = 0
    t_max: int = None
    dense_until: int = None
    max_points: int = 600
    moments: tuple = (1,)
    alpha: float = 0.05
    spacing_realizations: int = 0
    eig_method: str = "auto"
    max_dim: int = DEFAULT_MAX_DIM
    out: str = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.model not in MODELS:
            raise ConfigError("model", f"unknown model {self.model!r}; choose from {MODELS}")
        if int(self.N) < 1:
            raise ConfigError("N", "must be >= 1")
        if self.model in ROTOR_MODELS and int(self.N) < 2:
            raise ConfigError("N", "kicked rotors need N >= 2")
        if self.model == "rmte" and int(self.L) != 2:
            raise ConfigError("L", "bipartite rmte needs L = 2; use rmte_extended")
        if self.model == "rmte_extended" and int(self.L) < 2:
            raise ConfigError("L", "must be >= 2")
        if self.model not in RMTE_MODELS and self.eps != 0.0:
            raise ConfigError("eps", f"eps only applies to rmte models, not {self.model}")
        if self.model != "kicked_rotor_pair" and self.gamma != 0.0:
            raise ConfigError("gamma", "gamma only applies to kicked_rotor_pair")
        if self.eps < 0:
            raise ConfigError("eps", "must be >= 0")
        if self.gamma < 0:
            raise ConfigError("gamma", "must be >= 0")
        if int(self.realizations) < 2:
            raise ConfigError("realizations", "need at least 2 realizations")
        if not self.moments or any(m not in (1, 2, 3) for m in self.moments):
            raise ConfigError("moments", "orders must be a non-empty subset of {1, 2, 3}")
        if not 0 < self.alpha <= 0.5:
            raise ConfigError("alpha", "must lie in (0, 0.5]")
        if self.t_max is not None and int(self.t_max) < 1:
            raise ConfigError("t_max", "must be >= 1")
        if int(self.max_points) < 2:
            raise ConfigError("max_points", "must be >= 2")
        if self.eig_method not in ("auto", "cayley", "general"):
            raise ConfigError("eig_method", "must be auto, cayley or general")
        if int(self.spacing_realizations) < 0:
            raise ConfigError("spacing_realizations", "must be >= 0")
        if self.max_dim is not None and self.dim > int(self.max_dim):
            raise CapacityError(f"dimension {self.dim} exceeds max_dim={self.max_dim}", int(self.max_dim))

    @property
    def eff_L(self):
        """Number of tensor factors; 1 for the single-system controls."""
        if self.model in RMTE_MODELS:
            return int(self.L)
        if self.model == "kicked_rotor_pair":
            return 2
        return 1

    @property
    def dim(self):
        return int(self.N) ** self.eff_L

    @property
    def sigma(self):
        if self.model in RMTE_MODELS:
            return self.dist.sigma
        if self.model == "kicked_rotor_pair":
            return PhaseDistribution.arcsine().sigma
        return 0.0

    @property
    def coupling(self):
        """Effective phase-coupling strength; for rotors ``gamma N / 2 pi``."""
        if self.model == "kicked_rotor_pair":
            return self.gamma * self.N / (2 * np.pi)
        return self.eps

    @property
    def phase_dist(self):
        if self.model == "kicked_rotor_pair":
            return PhaseDistribution.arcsine()
        return self.dist

    @property
    def Gamma(self):
        return self.sigma * self.coupling * self.N ** (self.eff_L / 2)

    def time_grid(self):
        from .spectra import TimeGrid

        t_max = int(self.t_max) if self.t_max is not None else 4 * self.dim
        dense = int(self.dense_until) if self.dense_until is not None else 4 * int(self.N)
        return TimeGrid.default(t_max, dense, int(self.max_points))

    def build(self, index):
        """Floquet operator of realization ``index``."""
        stream = RngStream(int(self.master_seed), int(index))
        if self.model in RMTE_MODELS:
            p = RmteParams(int(self.N), int(self.L), float(self.eps), self.dist)
            return build_rmte(p, stream, self.max_dim)
        if self.model == "kicked_rotor_pair":
            p = KickedRotorParams(int(self.N), float(self.gamma), self.kA, self.kB)
            return build_kicked_rotor_pair(p, BlochPhases.random(stream), self.max_dim)
        if self.model == "single_cue":
            u = sample_cue(int(self.N), stream)
            return FloquetOperator(u, {"model": "single_cue", "N": int(self.N)})
        gen = stream.generator()
        b = BlochPhases.random(gen)
        return build_single_rotor(int(self.N), self.kA, b.theta_qA, b.theta_pA)

    def replace(self, **kw):
        return replace(self, **kw)

    def to_dict(self):
        d = asdict(self)
        d["dist"] = self.dist.to_dict()
        d["moments"] = list(self.moments)
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            name = sorted(extra)[0]
            raise ConfigError(name, "unknown field")
        d = dict(d)
        if "dist" in d and not isinstance(d["dist"], PhaseDistribution):
            try:
                d["dist"] = PhaseDistribution.from_dict(d["dist"])
            except RmteError as exc:
                raise ConfigError("dist", str(exc)) from exc
        if "moments" in d:
            d["moments"] = tuple(int(m) for m in d["moments"])
        for key in ("N", "L", "realizations", "master_seed", "max_points", "spacing_realizations"):
            if key in d:
                try:
                    d[key] = int(d[key])
                except (TypeError, ValueError) as exc:
                    raise ConfigError(key, f"expected an integer, got {d[key]!r}") from exc
        for key in ("eps", "gamma", "kA", "kB", "alpha"):
            if key in d:
                try:
                    d[key] = float(d[key])
                except (TypeError, ValueError) as exc:
                    raise ConfigError(key, f"expected a number, got {d[key]!r}") from exc
        return cls(**d)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("<config>", f"invalid JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError("<config>", "top level must be an object")
        return cls.from_dict(d)
