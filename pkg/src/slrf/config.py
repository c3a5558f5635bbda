"""Run configuration for lattice and finite-difference Ricci flow runs."""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Any

METHODS = ("slrf-v1", "slrf-v2", "fd")
TIMESTEP_MODES = ("courant-squared", "paper-literal")
R_SEEDS = ("analytic", "legs")
FD_SCHEMES = ("rk4", "ftcs")
FD_FORMS = ("sqrt", "literal")

PRESETS: dict[str, dict[str, Any]] = {
    "sphere": {"c3": 0.0, "c5": 0.0, "stop_factor": 200.0},
    "single-dumbbell": {"c3": 0.766, "c5": -0.091, "stop_factor": 400.0},
    "double-dumbbell": {"c3": 0.021, "c5": 0.598, "stop_factor": 400.0},
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class FlowConfig:
    c3: float = 0.0
    c5: float = 0.0
    N: int = 100
    delta_theta: float = 2 * math.pi / 256
    courant_factor: float | None = None
    timestep_mode: str = "courant-squared"
    ghost_depth: int = 4
    interp_start: int = 2
    regrid_every: int = 10
    stop_factor: float = 200.0
    method: str = "slrf-v1"
    snapshot_every: int | None = None
    snapshot_dt: float | None = None
    max_steps: int | None = None
    t_end: float | None = None
    r_seed: str = "analytic"
    fd_scheme: str = "rk4"
    fd_dt: float | None = None
    fd_form: str = "sqrt"
    tol_embed: float = 1e-9

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.timestep_mode not in TIMESTEP_MODES:
            raise ConfigError(f"unknown timestep_mode {self.timestep_mode!r}")
        if self.r_seed not in R_SEEDS:
            raise ConfigError(f"unknown r_seed {self.r_seed!r}")
        if self.fd_scheme not in FD_SCHEMES:
            raise ConfigError(f"unknown fd_scheme {self.fd_scheme!r}")
        if self.fd_form not in FD_FORMS:
            raise ConfigError(f"unknown fd_form {self.fd_form!r}")
        if not 0 < self.interp_start < self.ghost_depth:
            raise ConfigError("need 0 < interp_start < ghost_depth")
        if self.courant_factor is not None and not self.courant_factor > 0:
            raise ConfigError("courant_factor must be positive")
        if not self.stop_factor > 1:
            raise ConfigError("stop_factor must exceed 1")
        if not 0 < self.delta_theta <= math.pi / 8:
            raise ConfigError("delta_theta must lie in (0, pi/8]")
        if self.regrid_every < 0:
            raise ConfigError("regrid_every must be >= 0 (0 disables regridding)")
        if abs(1 + 3 * self.c3 + 5 * self.c5) < 1e-12:
            raise ConfigError("1 + 3*c3 + 5*c5 must be nonzero")
        if self.method == "fd":
            if self.N < 2 * self.ghost_depth + 3:
                raise ConfigError("fd grid too coarse for the pole stencils")
        else:
            if self.N < 8 or self.N % 2:
                raise ConfigError("N must be even and >= 8")
            if not self.ghost_depth < self.N / 2:
                raise ConfigError("ghost_depth must be < N/2")
        for name in ("snapshot_every", "max_steps"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.snapshot_dt is not None and not self.snapshot_dt > 0:
            raise ConfigError("snapshot_dt must be positive")
        if self.fd_dt is not None and not self.fd_dt > 0:
            raise ConfigError("fd_dt must be positive")

    @property
    def C(self) -> float:
        """Courant factor; the default depends on the integrator's stability range."""
        if self.courant_factor is not None:
            return self.courant_factor
        if self.method == "fd":
            return 0.4 if self.fd_scheme == "rk4" else 0.2
        return 0.1

    @property
    def n_g(self) -> int:
        return self.interp_start

    @property
    def m_g(self) -> int:
        return self.ghost_depth

    def with_(self, **changes: Any) -> "FlowConfig":
        return replace(self, **changes)


def _field_types() -> dict[str, str]:
    return {f.name: str(f.type) for f in fields(FlowConfig)}


def coerce(name: str, raw: str) -> Any:
    """Convert a textual value to the type of FlowConfig field `name`."""
    types = _field_types()
    if name not in types:
        raise ConfigError(f"unknown config key {name!r}")
    kind = types[name]
    raw = raw.strip()
    if "None" in kind and raw.lower() in ("", "none"):
        return None
    try:
        if kind.startswith("int"):
            return int(raw)
        if kind.startswith("float"):
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc
    return raw


def parse_config_text(text: str) -> dict[str, Any]:
    """Parse `key = value` lines; `#` starts a comment."""
    out: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, value = (p.strip() for p in line.split("=", 1))
        out[key] = coerce(key, value)
    return out


def format_config(config: FlowConfig) -> str:
    lines = []
    for f in fields(FlowConfig):
        v = getattr(config, f.name)
        lines.append(f"{f.name} = {'none' if v is None else repr(v) if isinstance(v, float) else v}")
    return "\n".join(lines) + "\n"


def build_config(preset: str | None = None, **overrides: Any) -> FlowConfig:
    values: dict[str, Any] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        values.update(PRESETS[preset])
    values.update({k: v for k, v in overrides.items()})
    try:
        return FlowConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
