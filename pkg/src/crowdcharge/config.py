"""Simulation parameters and the ``key = value`` config file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

from .protocols import PROTOCOLS


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    m: int = 100
    num_locations: int = 5
    stay_min: int = 10
    stay_max: int = 30
    beta: float = 0.2
    # SOC percentage points per minute of contact.
    alpha: float = 0.5
    e_min: float = 20.0
    e_max: float = 80.0
    p_r: float = 20.0
    c_max: int = 500
    t_min: int = 1
    iteration_minutes: int = 60
    iterations: int = 30
    seed: int = 1
    runs: int = 10
    protocol: str = "pba-wna"
    # Idle usage per iteration, in SOC percent, for nodes that do not exchange.
    # Energy never flows back in, so any positive value empties the crowd
    # over a long enough horizon.
    usage_drain: float = 0.0
    initial_soc_range: tuple[float, float] = (0.0, 100.0)
    # None means [0, c_max // 2].
    initial_cycles_range: tuple[int, int] | None = None
    alg2_peer_rule: str = "closest"
    exclude_current_location: bool = False
    balance_tolerance: float = 1.0

    def __post_init__(self):
        self.validate()

    @property
    def cycles_range(self) -> tuple[int, int]:
        if self.initial_cycles_range is None:
            return 0, self.c_max // 2
        return self.initial_cycles_range

    def validate(self) -> None:
        problems = []
        for name in ("m", "num_locations", "stay_min", "c_max", "t_min", "iteration_minutes", "runs"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be >= 1")
        if self.iterations < 0:
            problems.append("iterations must be >= 0")
        if self.stay_max < self.stay_min:
            problems.append("stay_max must be >= stay_min")
        if not 0 <= self.beta < 1:
            problems.append("beta must lie in [0, 1)")
        if self.alpha <= 0:
            problems.append("alpha must be > 0")
        if self.p_r <= 0:
            problems.append("p_r must be > 0")
        if not 0 < self.e_min < self.e_max < 100:
            problems.append("need 0 < e_min < e_max < 100")
        if self.usage_drain < 0 or self.usage_drain > 100:
            problems.append("usage_drain must lie in [0, 100]")
        if self.balance_tolerance < 0:
            problems.append("balance_tolerance must be >= 0")
        lo, hi = self.initial_soc_range
        if not 0 <= lo <= hi <= 100:
            problems.append("initial_soc_range must satisfy 0 <= lo <= hi <= 100")
        clo, chi = self.cycles_range
        if not 0 <= clo <= chi <= self.c_max:
            problems.append("initial_cycles_range must satisfy 0 <= lo <= hi <= c_max")
        if self.protocol not in PROTOCOLS:
            problems.append(f"protocol must be one of {', '.join(PROTOCOLS)}")
        if self.alg2_peer_rule not in ("closest", "farthest"):
            problems.append("alg2_peer_rule must be 'closest' or 'farthest'")
        if problems:
            raise ConfigError("invalid configuration: " + "; ".join(problems))

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)


_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def _parse_value(name: str, kind: Any, text: str):
    kind = str(kind)
    try:
        if "None" in kind and text.lower() == "none":
            return None
        if "tuple" in kind:
            parts = [p.strip() for p in text.strip("()[] ").split(",")]
            if len(parts) != 2:
                raise ValueError("expected two comma-separated values")
            conv = int if "int" in kind else float
            return conv(parts[0]), conv(parts[1])
        if kind == "bool":
            return _BOOL[text.lower()]
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        return text
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad value for {name}: {text!r} ({exc})") from None


def parse_config(text: str, base: SimConfig | None = None, source: str = "<config>") -> SimConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys are errors."""
    kinds = {f.name: f.type for f in fields(SimConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in kinds:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = _parse_value(key, kinds[key], val)
    base = base or SimConfig()
    return base.replace(**values)


def load_config(path: str | Path) -> SimConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, source=str(path))


def dump_config(config: SimConfig) -> str:
    lines = []
    for f in fields(config):
        v = getattr(config, f.name)
        if v is None:
            v = "none"
        elif isinstance(v, tuple):
            v = f"{v[0]}, {v[1]}"
        elif isinstance(v, bool):
            v = str(v).lower()
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
