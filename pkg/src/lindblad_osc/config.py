"""Run configuration: a flat ``key=value`` file format plus named presets.

Blank lines and lines starting with ``#`` are ignored. Temperature is given
by one of ``coth_eps``, ``T`` (with the configured hbar, k) or
``tau = 2kT/(hbar omega)``; naming two of them in the same layer is an
error, and a later layer (file over preset, flags over file) replaces the
temperature of an earlier one. With none of them coth_eps = 2 is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Any, Iterable, Mapping

import numpy as np

from .core import BathSpec, InitialStateSpec, OscillatorParams, Scenario, R_LIMIT

__all__ = ["ConfigError", "RunConfig", "PRESETS", "SWEEP_AXES", "parse_config", "dump_config"]

SWEEP_AXES = ("coth_eps", "delta", "r", "mu", "lambda")
MAX_GRID_CELLS = 10**7
DEFAULT_COTH = 2.0


class ConfigError(ValueError):
    """Bad configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"config key {key!r}: {message}")
        self.key = key


# file key -> attribute name
_KEYS = {
    "omega": "omega",
    "lambda": "lam",
    "mu": "mu",
    "delta": "delta",
    "r": "r",
    "coth_eps": "coth_eps",
    "T": "T",
    "tau": "tau",
    "hbar": "hbar",
    "m": "m",
    "k": "k",
    "t_start": "t_start",
    "t_end": "t_end",
    "n_points": "n_points",
    "sweep": "sweep",
    "sweep_min": "sweep_min",
    "sweep_max": "sweep_max",
    "sweep_n": "sweep_n",
    "out": "out",
    "format": "format",
}
_ATTR_TO_KEY = {v: k for k, v in _KEYS.items()}
_INT_ATTRS = {"n_points", "sweep_n"}
_STR_ATTRS = {"sweep", "out", "format"}
_OPTIONAL_ATTRS = {"coth_eps", "T", "tau", "out"}
_TEMPERATURE_ATTRS = ("coth_eps", "T", "tau")


@dataclass(frozen=True)
class RunConfig:
    omega: float = 1.0
    lam: float = 0.1
    mu: float = 0.0
    delta: float = 2.0
    r: float = 0.0
    coth_eps: float | None = None
    T: float | None = None
    tau: float | None = None
    hbar: float = 1.0
    m: float = 1.0
    k: float = 1.0
    t_start: float = 0.0
    t_end: float = 40.0
    n_points: int = 201
    sweep: str = "coth_eps"
    sweep_min: float = 1.0
    sweep_max: float = 10.0
    sweep_n: int = 46
    out: str | None = None
    format: str = "csv"

    def set(self, key: str, raw: str) -> "RunConfig":
        """Return a copy with ``key`` (file spelling) parsed from ``raw``."""
        if key not in _KEYS:
            raise ConfigError(key, "unknown key")
        attr = _KEYS[key]
        raw = raw.strip()
        if attr in _OPTIONAL_ATTRS and raw.lower() in ("", "none"):
            return replace(self, **{attr: None})
        if attr in _TEMPERATURE_ATTRS:
            cleared = {a: None for a in _TEMPERATURE_ATTRS}
            return replace(self, **cleared).set_value(key, attr, raw)
        return self.set_value(key, attr, raw)

    def set_value(self, key: str, attr: str, raw: str) -> "RunConfig":
        if attr in _STR_ATTRS:
            value: Any = raw
        elif attr in _INT_ATTRS:
            try:
                value = int(raw)
            except ValueError:
                raise ConfigError(key, f"could not parse {raw!r} as an integer") from None
        else:
            try:
                value = float(raw)
            except ValueError:
                raise ConfigError(key, f"could not parse {raw!r} as a number") from None
            if not math.isfinite(value):
                raise ConfigError(key, f"must be finite, got {raw!r}")
        return replace(self, **{attr: value})

    def update(self, items: Iterable[tuple[str, str]]) -> "RunConfig":
        items = list(items)
        temps = [key for key, _ in items if _KEYS.get(key) in _TEMPERATURE_ATTRS]
        if len(set(temps)) > 1:
            raise ConfigError(temps[1], f"temperature given twice ({' and '.join(temps)})")
        cfg = self
        for key, raw in items:
            cfg = cfg.set(key, raw)
        return cfg

    def validate(self) -> "RunConfig":
        """Check the structural invariants; physics constraints are left to the caller."""
        given = [k for k in ("coth_eps", "T", "tau") if getattr(self, k) is not None]
        if len(given) > 1:
            raise ConfigError(given[1], f"temperature given twice ({' and '.join(given)})")
        if self.coth_eps is not None and self.coth_eps < 1:
            raise ConfigError("coth_eps", "must be >= 1")
        if self.T is not None and self.T < 0:
            raise ConfigError("T", "must be >= 0")
        if self.tau is not None and self.tau < 0:
            raise ConfigError("tau", "must be >= 0")
        if not self.t_start >= 0:
            raise ConfigError("t_start", "must be >= 0")
        if not self.t_end > self.t_start:
            raise ConfigError("t_end", "must exceed t_start")
        if self.n_points < 2:
            raise ConfigError("n_points", "must be >= 2")
        if self.format != "csv":
            raise ConfigError("format", f"only 'csv' is supported, got {self.format!r}")
        if self.sweep not in SWEEP_AXES:
            raise ConfigError("sweep", f"must be one of {', '.join(SWEEP_AXES)}")
        if self.sweep_n < 1:
            raise ConfigError("sweep_n", "must be >= 1")
        if self.sweep_max < self.sweep_min:
            raise ConfigError("sweep_max", "must be >= sweep_min")
        lo, hi = self.sweep_min, self.sweep_max
        bounds_ok = {
            "coth_eps": lo >= 1.0,
            "delta": lo > 0.0,
            "r": -R_LIMIT < lo and hi < R_LIMIT,
            "lambda": lo >= 0.0,
            "mu": True,
        }[self.sweep]
        if not bounds_ok:
            raise ConfigError("sweep_min", f"sweep range [{lo}, {hi}] leaves the domain of {self.sweep}")
        if self.n_points * self.sweep_n > MAX_GRID_CELLS:
            raise ConfigError("sweep_n", f"grid exceeds {MAX_GRID_CELLS} cells")
        return self

    def params(self) -> OscillatorParams:
        return OscillatorParams(
            omega=self.omega, lam=self.lam, mu=self.mu, hbar=self.hbar, mass=self.m, boltzmann_k=self.k
        )

    def bath(self, params: OscillatorParams | None = None) -> BathSpec:
        if self.T is not None:
            return BathSpec.from_temperature(self.T, params or self.params())
        if self.tau is not None:
            return BathSpec.from_tau(self.tau)
        return BathSpec(DEFAULT_COTH if self.coth_eps is None else self.coth_eps)

    def reduced_temperature(self) -> float:
        """tau = 2kT/(hbar omega) as configured (exact when given as tau or T)."""
        if self.tau is not None:
            return self.tau
        if self.T is not None:
            return 2.0 * self.k * self.T / (self.hbar * self.omega)
        return self.bath().tau

    def initial(self) -> InitialStateSpec:
        return InitialStateSpec(self.delta, self.r)

    def scenario(self) -> Scenario:
        params = self.params()
        return Scenario(params, self.bath(params), self.initial())

    def times(self) -> list[float]:
        return [float(t) for t in np.linspace(self.t_start, self.t_end, self.n_points)]

    def axis_values(self) -> list[float]:
        return [float(v) for v in np.linspace(self.sweep_min, self.sweep_max, self.sweep_n)]

    def with_axis(self, value: float) -> "RunConfig":
        attr = _KEYS[self.sweep]
        if attr == "coth_eps":
            return replace(self, coth_eps=value, T=None, tau=None)
        return replace(self, **{attr: value})


def _preset(**kw: Any) -> RunConfig:
    return RunConfig(**kw)


PRESETS: Mapping[str, RunConfig] = {
    # U and sigma over (t, coth eps) for mu = 0, r = 0, delta = 2
    "squeezed-coth-sweep": _preset(delta=2.0, mu=0.0, r=0.0, sweep="coth_eps", sweep_min=1.0, sweep_max=10.0),
    # over (t, delta) at coth eps = 2
    "squeezed-delta-sweep": _preset(coth_eps=2.0, mu=0.0, r=0.0, sweep="delta", sweep_min=0.2, sweep_max=5.0, sweep_n=49),
    # over (t, coth eps) with mu = 0.08; coth eps < 5/3 is outside the thermal-bath domain
    "coupled-coth-sweep": _preset(delta=2.0, mu=0.08, r=0.0, sweep="coth_eps", sweep_min=2.0, sweep_max=10.0, sweep_n=41),
    "correlated-coth-sweep": _preset(delta=2.0, mu=0.08, r=0.8, sweep="coth_eps", sweep_min=2.0, sweep_max=10.0, sweep_n=41),
    "correlated-delta-sweep": _preset(coth_eps=2.0, mu=0.08, r=0.8, sweep="delta", sweep_min=0.2, sweep_max=5.0, sweep_n=49),
    "high-temperature-coherent": _preset(delta=1.0, r=0.0, mu=0.0, tau=10.0),
}


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    cfg = base or RunConfig()
    items = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(line.split()[0], f"line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        items.append((key.strip(), value))
    return cfg.update(items)


def dump_config(cfg: RunConfig) -> str:
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        lines.append(f"{_ATTR_TO_KEY[f.name]}={value!r}" if isinstance(value, float) else f"{_ATTR_TO_KEY[f.name]}={value}")
    return "\n".join(lines) + "\n"
