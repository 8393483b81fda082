"""Experiment configuration: parsing, validation and construction of the model objects."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bases import ClosingParams, ShiftSpace, TorusMap
from .cocycles import ConstantCocycle, LocallyConstantCocycle, TorusSmoothCocycle
from .errors import ConfigError
from .linalg import operator_from_json
from .measures import Bernoulli, LebesgueTorus, Markov, check_compatible, default_sampler

HORIZON_KEYS = ("n", "replicas", "k_max", "N_min", "truncation_N", "depth")
DEFAULT_HORIZONS = {"n": 1000, "replicas": 8, "k_max": 8, "N_min": 0, "truncation_N": 200, "depth": 8}
SECTIONS = ("theorem", "lyapunov", "jsr", "corollary")
SEED_MAX = 2 ** 64


@dataclass
class ExperimentConfig:
    base: dict
    cocycle: dict
    measure: dict
    eps: float
    horizons: dict
    seed: int = 0
    output_dir: str = "output"
    theorem: dict = field(default_factory=dict)
    lyapunov: dict = field(default_factory=dict)
    jsr: dict = field(default_factory=dict)
    corollary: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("base", "cocycle", "measure", "horizons", *SECTIONS):
            if not isinstance(getattr(self, name), dict):
                raise ConfigError(f"'{name}' must be an object")
        if isinstance(self.eps, bool) or not isinstance(self.eps, (int, float)) or not self.eps > 0:
            raise ConfigError(f"eps must be a positive number, got {self.eps!r}")
        unknown = set(self.horizons) - set(HORIZON_KEYS)
        if unknown:
            raise ConfigError(f"unknown horizons {sorted(unknown)}")
        for k, v in self.horizons.items():
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"horizon {k} must be an integer")
            if v <= 0 and k != "N_min" or v < 0:
                raise ConfigError(f"horizon {k} must be positive, got {v}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < SEED_MAX:
            raise ConfigError("seed must be an integer in [0, 2^64)")
        if not isinstance(self.output_dir, str) or not self.output_dir:
            raise ConfigError("output_dir must be a non-empty string")

    def horizon(self, key):
        return self.horizons.get(key, DEFAULT_HORIZONS[key])

    def to_dict(self) -> dict:
        d = {"base": self.base, "cocycle": self.cocycle, "measure": self.measure, "eps": self.eps,
             "horizons": self.horizons, "seed": self.seed, "output_dir": self.output_dir}
        for s in SECTIONS:
            if getattr(self, s):
                d[s] = getattr(self, s)
        return copy.deepcopy(d)

    @classmethod
    def from_dict(cls, d) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        required = ("base", "cocycle", "measure", "eps", "horizons")
        missing = [k for k in required if k not in d]
        if missing:
            raise ConfigError(f"missing config keys {missing}")
        extra = set(d) - set(required) - {"seed", "output_dir", *SECTIONS}
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        return cls(**copy.deepcopy(d))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def loads(cls, text: str) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        return cls.loads(text)

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()


def _closing(d):
    c = d.get("closing")
    if c is None:
        return None
    return ClosingParams(float(c["D"]), float(c["gamma"]), float(c["delta0"]))


def build_base(d: dict):
    kind = d.get("kind")
    kw = {k: d[k] for k in ("metric_base", "horizon") if k in d}
    if kind == "full_shift":
        return ShiftSpace.full(int(d.get("alphabet", 2)), closing=_closing(d), **kw)
    if kind == "sft":
        return ShiftSpace(d["transition"], closing=_closing(d), **kw)
    if kind == "torus":
        return TorusMap(d["matrix"], closing=_closing(d))
    raise ConfigError(f"unknown base kind {kind!r}")


def _gen_kw(d):
    out = {k: d[k] for k in ("norm", "holder_alpha", "holder_M", "lambda_prime", "chi_prime") if k in d}
    return out


def build_cocycle(d: dict, base=None):
    kind = d.get("kind")
    kw = _gen_kw(d)
    if kind == "constant":
        return ConstantCocycle(operator_from_json(d["matrix"]), **kw)
    if kind == "locally_constant":
        if "matrices" in d:
            ops = [operator_from_json(m) for m in d["matrices"]]
            gen = LocallyConstantCocycle.from_list(ops, alphabet_size=d.get("alphabet"), **kw)
        else:
            table = {w: operator_from_json(m) for w, m in d["table"].items()}
            if isinstance(base, ShiftSpace):
                kw.setdefault("metric_base", base.metric_base)
            gen = LocallyConstantCocycle(table, memory=int(d.get("memory", 0)),
                                         alphabet_size=d.get("alphabet"), **kw)
        if isinstance(base, ShiftSpace):
            gen.check_coverage(base)
        return gen
    if kind == "torus_smooth":
        return TorusSmoothCocycle(operator_from_json(d["base_matrix"]), float(d["eta"]), d["frequencies"], **kw)
    raise ConfigError(f"unknown cocycle kind {kind!r}")


def build_sampler(d: dict, base, seed: int):
    kind = d.get("kind", "default")
    if kind == "default":
        s = default_sampler(base, seed)
    elif kind == "bernoulli":
        s = Bernoulli(tuple(d["probabilities"]), seed)
    elif kind == "markov":
        if "stationary" in d:
            s = Markov(d["matrix"], d["stationary"], seed)
        else:
            s = Markov.from_matrix(d["matrix"], seed)
    elif kind == "lebesgue_torus":
        s = LebesgueTorus(seed)
    else:
        raise ConfigError(f"unknown measure kind {kind!r}")
    check_compatible(s, base)
    return s


def build(config: ExperimentConfig):
    """``(base, generator, sampler)`` or :class:`ConfigError` describing what failed."""
    try:
        base = build_base(config.base)
        gen = build_cocycle(config.cocycle, base)
        sampler = build_sampler(config.measure, base, config.seed)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{type(exc).__name__}: {exc}") from exc
    if isinstance(base, TorusMap) and gen.kind == "locally_constant":
        raise ConfigError("locally constant cocycles need a shift base")
    if isinstance(base, ShiftSpace) and gen.kind == "torus_smooth":
        raise ConfigError("torus_smooth cocycles need a torus base")
    if isinstance(base, TorusMap) and gen.kind == "torus_smooth" and gen.frequencies.size != base.dim:
        raise ConfigError("frequency vector does not match the torus dimension")
    return base, gen, sampler


def stage_seed(seed: int, stage: int) -> int:
    """Independent 63-bit seed for one pipeline stage."""
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(stage,)).generate_state(1, np.uint64)[0] >> 1)
