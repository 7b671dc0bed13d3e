"""Run-time settings: module defaults, overridden by a ``key = value`` file
named in ``$CYCLESTAB_CONFIG``, overridden in turn by command-line flags."""
from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, fields, replace

from .designers import DEFAULT_MAX_ORDER, VerifyOptions
from .domains import PROBES_BOUNDARY, PROBES_INTERIOR
from .duality import OMISSION_TOLERANCE, WINDING_SAMPLES
from .poly import STRICTNESS
from .simulator import CONVERGENCE_TOLERANCE, ESCAPE_RADIUS

ENV_VAR = "CYCLESTAB_CONFIG"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    strictness: float = STRICTNESS
    omission_tolerance: float = OMISSION_TOLERANCE
    convergence_tolerance: float = CONVERGENCE_TOLERANCE
    winding_samples: int = WINDING_SAMPLES
    boundary_probes: int = PROBES_BOUNDARY
    interior_probes: int = PROBES_INTERIOR
    boundary_resolution: int = 512
    max_order: int = DEFAULT_MAX_ORDER
    escape_radius: float = ESCAPE_RADIUS

    def __post_init__(self):
        for name in ("strictness", "omission_tolerance", "convergence_tolerance", "escape_radius"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("winding_samples", "boundary_probes", "max_order", "boundary_resolution"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.interior_probes < 0:
            raise ConfigError("interior_probes must be non-negative")

    def verify_options(self) -> VerifyOptions:
        return VerifyOptions(
            self.strictness,
            self.omission_tolerance,
            self.winding_samples,
            self.boundary_probes,
            self.interior_probes,
        )

    def updated(self, **overrides) -> "Config":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def parse_config(text: str) -> dict:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string("[cyclestab]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    types = {f.name: f.type for f in fields(Config)}
    out = {}
    for key, raw in cp["cyclestab"].items():
        if key not in types:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            out[key] = int(raw) if types[key] in (int, "int") else float(raw)
        except ValueError:
            raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return out


def load_config(path: str | None = None) -> Config:
    path = path or os.environ.get(ENV_VAR)
    if not path:
        return Config()
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return Config(**parse_config(text))
