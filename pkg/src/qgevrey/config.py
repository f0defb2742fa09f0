"""Run configuration: tolerances and output switches, JSON round-trippable."""
from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field

ENV_VAR = "QGEVREY_CONFIG"


@dataclass(frozen=True)
class Config:
    tol: float = 1e-10              # quadrature relative tolerance
    theta_tol: float = 1e-12
    residual_cap: float = 0.5
    tol_s: float = 1e-3
    delta: float = 0.05
    half_opening: float = 0.8 * math.pi
    alpha_cap: float = 4.0
    log_A_cap: float = 3.0
    n_max: int = 12
    theta_method: str = "series"
    output_dir: str = "."
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("tol", "theta_tol", "residual_cap", "tol_s", "delta", "half_opening",
                     "alpha_cap", "log_A_cap"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ValueError(f"config field {name} must be positive, got {v!r}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.theta_method not in ("series", "product"):
            raise ValueError(f"theta_method must be 'series' or 'product', got {self.theta_method!r}")
        if int(self.n_max) < 0:
            raise ValueError("n_max must be non-negative")

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "Config":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)

    def replace(self, **changes) -> "Config":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    @classmethod
    def load(cls, path=None) -> "Config":
        """From ``path``, else the file named by ``$QGEVREY_CONFIG``, else defaults."""
        path = path or os.environ.get(ENV_VAR)
        if not path:
            return cls()
        with open(path) as fh:
            return cls.from_json(json.load(fh))
