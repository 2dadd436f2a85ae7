"""Run configuration: INI file with one section per module.

Example::

    [problem]
    name = example2
    variant = stated

    [spectral]
    K = 100
    N = 1000

    [coefficients]
    L = 100

    [noise]
    epsilons = 1e-1, 1e-2, 1e-3
    seeds = 1-10
    phi_mode = signed
    gnorm_sqrt_pi = false

    [regularization]
    rules = apriori, aposteriori
    tau = 1.1

    [output]
    dir = out

Unset keys take the reference experiment values. For custom problems
``a`` is ``constant C``, ``affine ALPHA BETA`` or ``csv PATH``; ``phi`` is
``constant C``, ``polynomial C0 C1 ...``, ``exp-minus-one`` or ``csv PATH``;
``g`` and the optional ``f`` are CSV paths.
"""
from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

from ..errors import ConfigError, DomainError
from ..noise import PHI_MODES
from ..regularization import APosteriori, APriori, Fixed, PowerLaw, RegularizationRule
from ..spectral import DEFAULT_TRUNCATION
from .problems import defaults_for

REFERENCE_EPSILONS = (5e-1, 1e-1, 5e-2, 1e-2, 5e-3, 1e-3, 5e-4, 1e-4, 5e-5, 1e-5)
REFERENCE_SEEDS = tuple(range(1, 11))
RULE_NAMES = ("apriori", "aposteriori", "paper-formula", "fixed")
PROBLEMS = ("example1", "example2", "custom")
REFERENCE_RULES = ("apriori", "paper-formula", "aposteriori")


@dataclass(frozen=True)
class RunConfig:
    problem: str = "example1"
    variant: Optional[str] = None
    K: int = 100
    L: int = 100
    T: float = 1.0
    N: int = DEFAULT_TRUNCATION
    epsilons: tuple[float, ...] = REFERENCE_EPSILONS
    seeds: tuple[int, ...] = REFERENCE_SEEDS
    rules: tuple[str, ...] = ("apriori", "aposteriori")
    tau: Optional[float] = None
    M: Optional[float] = None
    k: Optional[float] = None
    mu: Optional[float] = None
    power_coefficient: Optional[float] = None
    power_exponent: Optional[float] = None
    phi_mode: str = "signed"
    gnorm_sqrt_pi: bool = False
    out_dir: str = "out"
    a: Optional[str] = None
    phi: Optional[str] = None
    g: Optional[str] = None
    f: Optional[str] = None
    base_dir: str = field(default=".", compare=False)

    def validate(self) -> "RunConfig":
        if self.problem not in PROBLEMS:
            raise ConfigError(f"problem must be one of {PROBLEMS}, got {self.problem!r}")
        if self.K < 2:
            raise ConfigError(f"K must be >= 2, got {self.K}")
        if self.L < 2 or self.L % 2:
            raise ConfigError(f"L must be even and >= 2, got {self.L}")
        if self.N < 1:
            raise ConfigError(f"N must be >= 1, got {self.N}")
        if not self.T > 0:
            raise ConfigError(f"T must be positive, got {self.T}")
        if not self.epsilons:
            raise ConfigError("at least one noise level is required")
        if any(not e > 0 for e in self.epsilons):
            raise ConfigError(f"noise levels must be positive, got {self.epsilons}")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if any(s < 0 for s in self.seeds):
            raise ConfigError("seeds must be non-negative")
        if not self.rules:
            raise ConfigError("at least one regularisation rule is required")
        for r in self.rules:
            if r not in RULE_NAMES:
                raise ConfigError(f"unknown rule {r!r}; choose from {RULE_NAMES}")
        if len(set(self.rules)) != len(self.rules):
            raise ConfigError(f"duplicate rules in {self.rules}")
        if self.phi_mode not in PHI_MODES:
            raise ConfigError(f"phi_mode must be one of {PHI_MODES}, got {self.phi_mode!r}")
        if self.problem == "custom" and not (self.a and self.phi and self.g):
            raise ConfigError("custom problems need a, phi and g")
        self.resolve_rules()
        return self

    def resolve_rules(self) -> dict[str, RegularizationRule]:
        d = defaults_for(self.problem)
        out: dict[str, RegularizationRule] = {}
        try:
            for name in self.rules:
                if name == "apriori":
                    out[name] = APriori(self._or(self.M, d.M), self._or(self.k, d.k))
                elif name == "aposteriori":
                    out[name] = APosteriori(self._or(self.tau, d.tau))
                elif name == "fixed":
                    if self.mu is None:
                        raise ConfigError("rule 'fixed' needs mu")
                    out[name] = Fixed(self.mu)
                else:
                    if self.power_coefficient is not None and self.power_exponent is not None:
                        out[name] = PowerLaw(self.power_coefficient, self.power_exponent)
                    elif d.power_law is not None:
                        out[name] = d.power_law
                    else:
                        raise ConfigError("rule 'paper-formula' needs power_coefficient and power_exponent")
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
        return out

    @staticmethod
    def _or(value, default):
        return default if value is None else value

    def path(self, p: str) -> Path:
        q = Path(p)
        return q if q.is_absolute() else Path(self.base_dir) / q

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        d["epsilons"] = list(self.epsilons)
        d["seeds"] = list(self.seeds)
        d["rules"] = list(self.rules)
        return d

    def reference_table(self) -> "RunConfig":
        """Preset with the reference noise levels, ten seeds and all three table rules."""
        return replace(self, epsilons=REFERENCE_EPSILONS, seeds=REFERENCE_SEEDS, rules=REFERENCE_RULES)


def parse_seeds(text: str) -> tuple[int, ...]:
    """``"1-10"``, ``"1, 4, 7"`` or a mix of both."""
    seeds: list[int] = []
    try:
        for part in text.replace(" ", "").split(","):
            if not part:
                continue
            lo, sep, hi = part.partition("-")
            if sep:
                seeds.extend(range(int(lo), int(hi) + 1))
            else:
                seeds.append(int(part))
    except ValueError:
        raise ConfigError(f"cannot parse seed list {text!r}") from None
    return tuple(seeds)


def parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.replace(" ", "").split(",") if p)
    except ValueError:
        raise ConfigError(f"cannot parse number list {text!r}") from None


def parse_names(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


_SCHEMA = {
    "problem": {"name": ("problem", str), "variant": ("variant", str), "a": ("a", str),
                "phi": ("phi", str), "g": ("g", str), "f": ("f", str)},
    "spectral": {"K": ("K", int), "N": ("N", int)},
    "coefficients": {"L": ("L", int), "T": ("T", float)},
    "noise": {"epsilons": ("epsilons", parse_floats), "seeds": ("seeds", parse_seeds),
              "phi_mode": ("phi_mode", str), "gnorm_sqrt_pi": ("gnorm_sqrt_pi", "bool")},
    "regularization": {"rules": ("rules", parse_names), "tau": ("tau", float), "M": ("M", float),
                       "k": ("k", float), "mu": ("mu", float),
                       "power_coefficient": ("power_coefficient", float),
                       "power_exponent": ("power_exponent", float)},
    "output": {"dir": ("out_dir", str)},
}


def load_config(path, base: Optional[RunConfig] = None) -> RunConfig:
    """Read an INI file on top of ``base`` (default: reference values).

    Relative data paths are resolved against the file's directory.
    """
    path = Path(path)
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        with path.open(encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    updates: dict = {"base_dir": str(path.parent)}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
        keys = _SCHEMA[section]
        for key, raw in parser.items(section):
            if key not in keys:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
            fname, conv = keys[key]
            try:
                updates[fname] = parser.getboolean(section, key) if conv == "bool" else conv(raw)
            except ValueError as exc:
                raise ConfigError(f"{path}: bad value for {section}.{key}: {exc}") from None
    return replace(base or RunConfig(), **updates)
