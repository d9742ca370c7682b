"""Run configuration shared by the CLI and the verification suite."""

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import ConfigurationError
from .rng import DEFAULT_SEED

COMMANDS = ("phi", "poisson", "semilinear", "verify", "convergence")
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    command: str
    s: float = 0.25
    dim: int = 2
    nodes: int = 256
    beta: float = 2.0
    r0: list = field(default_factory=list)
    eps: list = field(default_factory=lambda: [0.1])
    p: float = 2.0
    source: str = "two-minus-r-squared"
    h1: str = "constant:1"
    h2: str = "constant:1"
    seed: int = DEFAULT_SEED
    out: str = None
    format: str = "json"
    allow_large_s: bool = False
    trials: int = 20
    timings: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigurationError(f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise ConfigurationError(f"format must be csv or json, got {self.format!r}")
        if not (0.0 < self.s < 1.0):
            raise ConfigurationError(f"s must lie in (0, 1), got {self.s}")
        if self.s > 0.5 and not self.allow_large_s:
            raise ConfigurationError(f"s = {self.s} > 1/2 needs --allow-large-s")
        if int(self.dim) != self.dim or self.dim < 2:
            raise ConfigurationError(f"dim must be an integer >= 2, got {self.dim}")
        if int(self.nodes) != self.nodes or self.nodes < 8:
            raise ConfigurationError(f"nodes must be an integer >= 8, got {self.nodes}")
        if self.beta < 1.0:
            raise ConfigurationError(f"beta must be >= 1, got {self.beta}")
        if any(not (0.0 < r <= 1.0) for r in self.r0):
            raise ConfigurationError("truncation radii must lie in (0, 1]")
        if any(e < 0.0 for e in self.eps) or not self.eps:
            raise ConfigurationError("ε values must be nonnegative and at least one given")
        if not self.p > 1.0:
            raise ConfigurationError(f"p must exceed 1, got {self.p}")
        if not (0 <= int(self.seed) < 2 ** 64):
            raise ConfigurationError("seed must be a 64-bit unsigned integer")
        if self.trials < 1:
            raise ConfigurationError("trials must be >= 1")

    @classmethod
    def from_mapping(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown configuration keys: {sorted(unknown)}")
        data = dict(data)
        for key in ("r0", "eps"):
            if key in data and not isinstance(data[key], list):
                data[key] = [data[key]]
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from None

    def as_dict(self, include_output=False):
        d = asdict(self)
        if not include_output:
            d.pop("out")
        d.pop("timings")
        return d


def load_config_file(path):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigurationError("config file must hold a JSON object")
    return data
