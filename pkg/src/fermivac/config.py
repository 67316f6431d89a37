"""Experiment configuration: YAML document plus ``key=value`` overrides."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

import yaml

from .lattice import LatticeConfig, build_mode_basis

EXPERIMENTS = ("spectrum", "schwinger", "gauge-pump", "response", "polarization")
RECIPES = ("rho_dot", "L_dot")
BAND_EDGE_TOL = 1e-9


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str | None = None
    N_s: int = 3
    L: float = 2 * math.pi
    m: float = 1.0
    q: float = 1.0
    dt: float = 1e-3
    t_i: float = 0.0
    t_f: float = 2.0
    E_c: float | None = None
    f: list = field(default_factory=lambda: [0.1, 1.0, 10.0])
    chi_recipe: str = "rho_dot"
    epsilon: float = 0.02
    k_squared: float = 0.0
    Lambda: list = field(default_factory=lambda: [10.0, 100.0, 1000.0])
    ward_samples: int = 100
    random_states: int = 5
    seed: int = 0
    output: str = "out"

    @property
    def lattice(self) -> LatticeConfig:
        return LatticeConfig(sites=self.N_s, length=self.L, mass=self.m, charge=self.q)

    def echo(self) -> dict:
        """Config as reported; the output path is left out so reports do not depend on it."""
        out = asdict(self)
        out.pop("output")
        return out


FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}


def _flatten(doc: dict) -> dict:
    # one level of grouping tables is allowed, e.g. lattice: {N_s: 5}
    flat = {}
    for key, value in doc.items():
        if isinstance(value, dict):
            for sub, v in value.items():
                flat[str(sub)] = v
        else:
            flat[str(key)] = value
    return flat


def _real(name, value, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{name}: must be finite, got {value}")
    if positive and not value > 0:
        raise ConfigError(f"{name}: must be > 0, got {value}")
    return value


def _integer(name, value, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{name}: must be >= {minimum}, got {value}")
    return value


def _real_list(name, value, positive=False):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{name}: expected a non-empty list of numbers, got {value!r}")
    return [_real(f"{name}[{i}]", v, positive) for i, v in enumerate(value)]


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.experiment is not None and cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: must be one of {', '.join(EXPERIMENTS)}, got {cfg.experiment!r}")
    cfg.N_s = _integer("N_s", cfg.N_s, minimum=1)
    if cfg.N_s % 2 == 0:
        raise ConfigError(f"N_s: must be odd, got {cfg.N_s}")
    cfg.L = _real("L", cfg.L, positive=True)
    cfg.m = _real("m", cfg.m, positive=True)
    cfg.q = _real("q", cfg.q, positive=True)
    cfg.dt = _real("dt", cfg.dt, positive=True)
    cfg.t_i = _real("t_i", cfg.t_i)
    cfg.t_f = _real("t_f", cfg.t_f)
    if not cfg.t_f > cfg.t_i:
        raise ConfigError(f"t_f: must exceed t_i = {cfg.t_i}, got {cfg.t_f}")
    steps = (cfg.t_f - cfg.t_i) / cfg.dt
    if abs(steps - round(steps)) > 1e-6:
        raise ConfigError(f"dt: (t_f - t_i) / dt must be an integer, got {steps}")
    if cfg.E_c is not None:
        cfg.E_c = _real("E_c", cfg.E_c, positive=True)
        if not cfg.E_c > cfg.m:
            raise ConfigError(f"E_c: must exceed m = {cfg.m}, got {cfg.E_c}")
        energies = build_mode_basis(cfg.lattice).energies
        if any(abs(e - cfg.E_c) <= BAND_EDGE_TOL for e in energies):
            raise ConfigError(f"E_c: coincides with a mode energy (ambiguous band edge), got {cfg.E_c}")
    cfg.f = _real_list("f", cfg.f)
    if cfg.chi_recipe not in RECIPES:
        raise ConfigError(f"chi_recipe: must be one of {', '.join(RECIPES)}, got {cfg.chi_recipe!r}")
    cfg.epsilon = _real("epsilon", cfg.epsilon, positive=True)
    cfg.k_squared = _real("k_squared", cfg.k_squared)
    if cfg.k_squared >= 4 * cfg.m**2:
        raise ConfigError(f"k_squared: must lie below the pair threshold 4 m^2 = {4 * cfg.m**2}")
    cfg.Lambda = _real_list("Lambda", cfg.Lambda, positive=True)
    for lam in cfg.Lambda:
        if lam < 2 * cfg.m:
            raise ConfigError(f"Lambda: every cutoff must be >= 2m = {2 * cfg.m}, got {lam}")
    cfg.ward_samples = _integer("ward_samples", cfg.ward_samples, minimum=1)
    cfg.random_states = _integer("random_states", cfg.random_states, minimum=0)
    cfg.seed = _integer("seed", cfg.seed, minimum=0)
    if not isinstance(cfg.output, str) or not cfg.output:
        raise ConfigError(f"output: expected a directory path, got {cfg.output!r}")
    return cfg


def parse_override(item: str) -> tuple[str, object]:
    """'key=value' with the value read as YAML, so numbers and lists parse naturally."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form key=value")
    key, raw = item.split("=", 1)
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{key}: cannot parse value {raw!r}: {exc}") from None
    return key.strip(), value


def parse_config(text: str = "", overrides: list[str] | None = None, experiment: str | None = None) -> ExperimentConfig:
    try:
        doc = yaml.safe_load(text) if text and text.strip() else {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config document: {exc}") from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping of keys to values")
    values = _flatten(doc)
    for item in overrides or []:
        key, value = parse_override(item)
        values[key] = value
    unknown = sorted(set(values) - FIELD_NAMES)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if experiment is not None:
        values["experiment"] = experiment
    return validate(ExperimentConfig(**values))


def load_config(path, overrides=None, experiment=None) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    return parse_config(text, overrides, experiment)
