"""Timescales and regimes of the quantum to classical transition.

The decoherence time t_d is the instant at which the linear growth term of
the short-time uncertainty equals the initial minimum-uncertainty value,
i.e. thermal fluctuations have become as large as the quantum ones. After
t_d the system is thermal but out of equilibrium; after a few relaxation
times 1/lam it reaches the Bose-Einstein equilibrium, which is classical
(Maxwell-Boltzmann) only at high temperature.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .core import BathSpec, InitialStateSpec, LindbladError, OscillatorParams, Scenario
from .uncertainty import heisenberg_closed_form

__all__ = [
    "NoRelaxation",
    "DecompositionUndefined",
    "RegimeLabel",
    "Timescales",
    "ShortTimeEstimate",
    "FluctuationDecomposition",
    "short_time_slope",
    "short_time_uncertainty",
    "decoherence_time",
    "decoherence_time_zero_temperature",
    "decoherence_time_high_temperature",
    "relaxation_time",
    "timescales",
    "fluctuation_decomposition",
    "fluctuation_crossover_time",
    "classify_regime",
    "EQUILIBRIUM_FACTOR",
    "CLASSICAL_COTH",
]

# Equilibrium is declared after this many relaxation times.
EQUILIBRIUM_FACTOR = 5.0
# (kT/omega)^2 is within 1% of (hbar^2/4) coth^2(eps) from here on.
CLASSICAL_COTH = 10.0

THERMAL_CROSSOVER = "thermal fluctuations overtake quantum fluctuations"
QUANTUM_GROWTH = "quantum-fluctuation growth time"
NO_CROSSOVER = "no crossover"


class NoRelaxation(LindbladError):
    pass


class DecompositionUndefined(LindbladError):
    pass


class RegimeLabel(enum.IntEnum):
    """Regimes in the order a fixed scenario passes through them."""

    QuantumDominated = 0
    ThermalNonEquilibrium = 1
    QuantumStatisticalEquilibrium = 2
    ClassicalMB = 3


@dataclass(frozen=True)
class Timescales:
    t_d: float
    t_rel: float
    t_d_kind: str = THERMAL_CROSSOVER

    @property
    def ratio(self) -> float:
        """t_d / t_rel; nan when both are infinite."""
        if math.isinf(self.t_d) and math.isinf(self.t_rel):
            return math.nan
        return self.t_d / self.t_rel


@dataclass(frozen=True)
class ShortTimeEstimate:
    t: float
    value: float
    in_regime: bool


def _growth_rate(params: OscillatorParams, initial: InitialStateSpec, coth_eps: float) -> float:
    """lam (delta + q) coth + mu (delta - q) coth - 2 lam, q = 1/(delta(1-r^2))."""
    delta, r = initial.delta, initial.r
    r2 = r * r
    excess = ((delta - 1.0) * (delta - 1.0) + r2 / (1.0 - r2)) / delta
    diff = delta - initial.q
    return params.lam * (excess * coth_eps + 2.0 * (coth_eps - 1.0)) + params.mu * diff * coth_eps


def short_time_slope(s: Scenario) -> float:
    """d sigma/dt at t = 0 (equal to dU/dt at t = 0 when r = 0)."""
    hbar = s.params.hbar
    return 0.5 * hbar * hbar * _growth_rate(s.params, s.initial, s.bath.coth_eps)


def short_time_uncertainty(s: Scenario, t: float) -> ShortTimeEstimate:
    """Linearized uncertainty (hbar^2/4)(1 + 2 B t).

    ``in_regime`` is False once t exceeds 1% of both 1/lam and 1/Omega.
    """
    B = _growth_rate(s.params, s.initial, s.bath.coth_eps)
    limit = 0.01 * min(
        math.inf if s.params.lam == 0 else 1.0 / s.params.lam, 1.0 / s.params.Omega
    )
    hbar = s.params.hbar
    return ShortTimeEstimate(t, 0.25 * hbar * hbar * (1.0 + 2.0 * B * t), t <= limit)


def decoherence_time(s: Scenario) -> float:
    """t_d = 1 / (2 B); infinite when the uncertainty does not grow (B <= 0)."""
    B = _growth_rate(s.params, s.initial, s.bath.coth_eps)
    if B <= 0.0:
        return math.inf
    return 1.0 / (2.0 * B)


def decoherence_time_zero_temperature(params: OscillatorParams, initial: InitialStateSpec) -> float:
    """t_d at T = 0 (mu must vanish there). Driven by quantum fluctuations alone."""
    if params.mu != 0.0:
        raise LindbladError("T = 0 requires mu = 0")
    return decoherence_time(Scenario(params, BathSpec(1.0), initial))


def decoherence_time_high_temperature(
    params: OscillatorParams, initial: InitialStateSpec, tau: float
) -> float:
    """High-temperature t_d = hbar w / (4 kT [lam (delta + q) + mu (delta - q)]).

    ``tau = 2kT/(hbar w)`` is the reduced temperature; for a coherent state
    this is hbar w / (8 kT lam).
    """
    if not tau > 0:
        raise LindbladError(f"tau must be > 0, got {tau!r}")
    q = initial.q
    hw = params.hbar * params.omega
    kT = 0.5 * tau * hw
    rate = params.lam * (initial.delta + q) + params.mu * (initial.delta - q)
    if rate <= 0.0:
        return math.inf
    return hw / (4.0 * kT * rate)


def relaxation_time(params: OscillatorParams) -> float:
    if params.lam <= 0.0:
        raise NoRelaxation("lam = 0: the closed oscillator never relaxes")
    return 1.0 / params.lam


def timescales(s: Scenario) -> Timescales:
    t_d = decoherence_time(s)
    t_rel = math.inf if s.params.lam == 0.0 else relaxation_time(s.params)
    if math.isinf(t_d):
        kind = NO_CROSSOVER
    elif s.bath.coth_eps == 1.0:
        kind = QUANTUM_GROWTH
    else:
        kind = THERMAL_CROSSOVER
    return Timescales(t_d, t_rel, kind)


@dataclass(frozen=True)
class FluctuationDecomposition:
    """Split of U(t) for an initial Glauber coherent state.

    With mu = 0, sqrt(U) = (hbar/2)[quantum_share + thermal_share] where
    quantum_share = e^{-2 lam t} and thermal_share = coth(eps)(1 - e^{-2 lam t}).
    ``quantum`` = (hbar^2/4) e^{-4 lam t} is the pure-state part of U and
    ``thermal`` = U - quantum is everything the bath added.
    """

    t: float
    quantum_share: float
    thermal_share: float
    quantum: float
    thermal: float

    @property
    def total(self) -> float:
        return self.quantum + self.thermal


def _require_decomposable(s: Scenario) -> None:
    if s.initial.delta != 1.0 or s.initial.r != 0.0:
        raise DecompositionUndefined("quantum/thermal split is defined only for delta = 1, r = 0")


def fluctuation_decomposition(s: Scenario, t: float) -> FluctuationDecomposition:
    _require_decomposable(s)
    lam, c = s.params.lam, s.bath.coth_eps
    e = math.exp(-2.0 * lam * t)
    u = -math.expm1(-2.0 * lam * t)
    U = heisenberg_closed_form(s, t)
    quantum = 0.25 * s.params.hbar ** 2 * e * e
    return FluctuationDecomposition(t, e, c * u, quantum, U - quantum)


def fluctuation_crossover_time(s: Scenario) -> float:
    """Time at which the thermal part of U equals the quantum part (mu = 0)."""
    _require_decomposable(s)
    if s.params.mu != 0.0:
        raise DecompositionUndefined("closed-form crossover needs mu = 0")
    if s.params.lam == 0.0:
        return math.inf
    c = s.bath.coth_eps
    return math.log1p((math.sqrt(2.0) - 1.0) / c) / (2.0 * s.params.lam)


def classify_regime(
    s: Scenario,
    t: float,
    equilibrium_factor: float = EQUILIBRIUM_FACTOR,
    classical_coth: float = CLASSICAL_COTH,
) -> RegimeLabel:
    scales = timescales(s)
    if t < scales.t_d:
        return RegimeLabel.QuantumDominated
    if t < equilibrium_factor * scales.t_rel:
        return RegimeLabel.ThermalNonEquilibrium
    if s.bath.coth_eps >= classical_coth:
        return RegimeLabel.ClassicalMB
    return RegimeLabel.QuantumStatisticalEquilibrium
