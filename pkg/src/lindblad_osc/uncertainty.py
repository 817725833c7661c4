"""Heisenberg and Schrodinger uncertainty functions.

Closed forms are evaluated in the variables e = exp(-2 lam t) and
u = 1 - e (taken from expm1). Writing the equilibrium-approach part as

    e^2 [1 - S c + c^2] + e c (S - 2c) + c^2  =  (e + c u)^2 + (S - 2) c e u

removes the O(coth^2) cancellation of the expanded form, and every
special case below is a literal substitution into the general
expression: evaluating the general function at r = 0, mu = 0 or
delta = 1 performs the same floating-point operations as the
corresponding special form.

All functions return dimensioned values (action squared); the bracketed
dimensionless part is multiplied by hbar^2/4 at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .core import (
    BathSpec,
    CovarianceState,
    LindbladError,
    OscillatorParams,
    Scenario,
    ThermalBathInvalid,
)
from .dynamics import InvalidTime, TWO_PI, propagate_exact

__all__ = [
    "InvalidState",
    "UnsupportedForHeisenbergClosedForm",
    "NotApplicable",
    "UncertaintyPoint",
    "uncertainty_of_state",
    "uncertainty_at",
    "heisenberg_closed_form",
    "schrodinger_closed_form",
    "heisenberg_uncertainty",
    "asymptotic_uncertainty",
    "maxwell_boltzmann_uncertainty",
    "zero_coupling_heisenberg",
    "zero_coupling_schrodinger",
    "heisenberg_coherent",
    "heisenberg_mu0",
    "heisenberg_coherent_mu0",
    "heisenberg_zero_temperature",
    "schrodinger_squeezed",
    "schrodinger_coherent",
    "schrodinger_mu0",
    "schrodinger_squeezed_mu0",
    "schrodinger_coherent_mu0",
    "schrodinger_zero_temperature",
]


class InvalidState(LindbladError):
    pass


class UnsupportedForHeisenbergClosedForm(LindbladError):
    """U(t) has a closed form only for an uncorrelated initial state (r = 0)."""


class NotApplicable(LindbladError):
    """A special-case form was called outside its parameter restriction."""


@dataclass(frozen=True)
class UncertaintyPoint:
    t: float | None
    U: float
    sigma: float
    r_t: float
    hbar: float = 1.0

    @property
    def excess(self) -> float:
        """sigma - hbar^2/4; non-negative for physical states."""
        return self.sigma - 0.25 * self.hbar * self.hbar


def uncertainty_of_state(
    x: CovarianceState, hbar: float = 1.0, t: float | None = None
) -> UncertaintyPoint:
    if not (x.sigma_qq > 0 and x.sigma_pp > 0):
        raise InvalidState(f"variances must be positive, got {x.sigma_qq!r}, {x.sigma_pp!r}")
    U = x.sigma_qq * x.sigma_pp
    return UncertaintyPoint(
        t=t,
        U=U,
        sigma=U - x.sigma_pq * x.sigma_pq,
        r_t=x.sigma_pq / math.sqrt(U),
        hbar=hbar,
    )


def uncertainty_at(s: Scenario, t: float) -> UncertaintyPoint:
    """Uncertainty functions from the exact propagator."""
    x = propagate_exact(s.x0, s.params, s.diffusion, t)
    return uncertainty_of_state(x, s.params.hbar, t)


class _Terms(NamedTuple):
    e: float  # exp(-2 lam t)
    u: float  # 1 - e
    c: float  # coth(eps)
    s2: float  # sin(2 Omega t)
    cs: float  # cos(2 Omega t)
    v: float  # 1 - cos(2 Omega t), from the half angle
    k2: float  # (omega/Omega)^2
    m: float  # mu/Omega
    quarter_h2: float


def _terms(params: OscillatorParams, bath: BathSpec, t: float) -> _Terms:
    if not (t >= 0.0 and math.isfinite(t)):
        raise InvalidTime(f"t must be finite and >= 0, got {t!r}")
    Om = params.Omega
    theta = math.fmod(2.0 * Om * t, TWO_PI)
    half = math.sin(0.5 * theta)
    k = params.omega / Om
    return _Terms(
        e=math.exp(-2.0 * params.lam * t),
        u=-math.expm1(-2.0 * params.lam * t),
        c=bath.coth_eps,
        s2=math.sin(theta),
        cs=math.cos(theta),
        v=2.0 * half * half,
        k2=k * k,
        m=params.mu / Om,
        quarter_h2=0.25 * params.hbar * params.hbar,
    )


def _excess_spread(delta: float, r: float) -> float:
    """delta + 1/(delta(1-r^2)) - 2, written without cancellation."""
    r2 = r * r
    return ((delta - 1.0) * (delta - 1.0) + r2 / (1.0 - r2)) / delta


def _spread_difference(delta: float, r: float) -> float:
    return delta - 1.0 / (delta * (1.0 - r * r))


def _require_zero_t_consistency(s: Scenario) -> None:
    if s.bath.coth_eps == 1.0 and s.params.mu != 0.0:
        raise ThermalBathInvalid("T = 0 (coth_eps = 1) requires mu = 0")


def schrodinger_closed_form(s: Scenario, t: float) -> float:
    """sigma(t) = s_qq s_pp - s_pq^2 for any correlated coherent initial state."""
    _require_zero_t_consistency(s)
    p, delta, r = s.params, s.initial.delta, s.initial.r
    z = _terms(p, s.bath, t)
    e, u, c = z.e, z.u, z.c
    Sm2 = _excess_spread(delta, r)
    Dm = _spread_difference(delta, r)
    w = z.m * z.m * z.v
    M = z.m * z.s2
    R = 2.0 * r / math.sqrt(1.0 - r * r) * z.m * (p.omega / p.Omega) * z.v
    base = (e + c * u) * (e + c * u) + c * e * u * Sm2
    coupled = e * c * ((Sm2 - 2.0 * (c - 1.0)) * w + Dm * M + R)
    return z.quarter_h2 * (base + coupled)


def _heisenberg_osc(z: _Terms, delta: float, Sm2: float, Dm: float) -> float:
    """Coefficient of exp(-4 lam t) carrying the squeezing oscillations."""
    a = delta - z.c
    b = 1.0 / delta - z.c
    return (
        0.25
        * z.k2
        * (
            z.k2 * Dm * Dm * z.s2 * z.s2
            + z.m * z.m * z.v * (4.0 * a * b * z.v - 2.0 * Dm * Dm * z.cs)
            + 2.0 * z.m * Dm * (Sm2 - 2.0 * (z.c - 1.0)) * z.s2 * z.v
        )
    )


def heisenberg_closed_form(s: Scenario, t: float) -> float:
    """U(t) = s_qq s_pp for an uncorrelated (r = 0) squeezed initial state."""
    if s.initial.r != 0.0:
        raise UnsupportedForHeisenbergClosedForm(
            f"closed-form U(t) requires r = 0, got r = {s.initial.r}; use heisenberg_uncertainty"
        )
    _require_zero_t_consistency(s)
    delta = s.initial.delta
    z = _terms(s.params, s.bath, t)
    e, u, c = z.e, z.u, z.c
    Sm2 = _excess_spread(delta, 0.0)
    Dm = _spread_difference(delta, 0.0)
    w = z.m * z.m * z.v
    M = z.m * z.s2
    base = (e + c * u) * (e + c * u) + c * e * u * Sm2
    coupled = e * c * ((Sm2 - 2.0 * (c - 1.0)) * w + Dm * M)
    return z.quarter_h2 * (base + coupled + e * e * _heisenberg_osc(z, delta, Sm2, Dm))


def heisenberg_uncertainty(s: Scenario, t: float) -> float:
    """U(t): closed form when r = 0, otherwise from the exact propagator."""
    if s.initial.r == 0.0:
        return heisenberg_closed_form(s, t)
    return uncertainty_at(s, t).U


def asymptotic_uncertainty(bath: BathSpec, hbar: float = 1.0) -> float:
    """Long-time value (hbar^2/4) coth^2(eps) shared by U and sigma."""
    return 0.25 * hbar * hbar * bath.coth_eps * bath.coth_eps


def maxwell_boltzmann_uncertainty(params: OscillatorParams, bath: BathSpec) -> float:
    """Classical equipartition value (kT/omega)^2."""
    kT = params.boltzmann_k * bath.temperature(params)
    return (kT / params.omega) ** 2


def zero_coupling_heisenberg(delta: float, omega: float, hbar: float, t: float) -> float:
    """U(t) of the closed oscillator (lam = mu = 0) from a squeezed state."""
    if not delta > 0:
        raise NotApplicable(f"delta must be > 0, got {delta!r}")
    theta = math.fmod(2.0 * omega * t, TWO_PI)
    Dm = delta - 1.0 / delta
    sn = math.sin(theta)
    return 0.25 * hbar * hbar * (1.0 + 0.25 * Dm * Dm * sn * sn)


def zero_coupling_schrodinger(hbar: float = 1.0) -> float:
    return 0.25 * hbar * hbar


# Special cases. Each is the general closed form with the stated restriction
# substituted by hand; they exist as cross-checks and for readability.


def _need(cond: bool, what: str) -> None:
    if not cond:
        raise NotApplicable(f"special form requires {what}")


def schrodinger_squeezed(s: Scenario, t: float) -> float:
    """sigma(t) for r = 0."""
    _need(s.initial.r == 0.0, "r = 0")
    _require_zero_t_consistency(s)
    delta = s.initial.delta
    z = _terms(s.params, s.bath, t)
    e, u, c = z.e, z.u, z.c
    Sm2 = (delta - 1.0) * (delta - 1.0) / delta
    Dm = delta - 1.0 / delta
    base = (e + c * u) * (e + c * u) + c * e * u * Sm2
    coupled = e * c * ((Sm2 - 2.0 * (c - 1.0)) * (z.m * z.m * z.v) + Dm * (z.m * z.s2))
    return z.quarter_h2 * (base + coupled)


def schrodinger_coherent(s: Scenario, t: float) -> float:
    """sigma(t) for a Glauber coherent state (delta = 1, r = 0)."""
    _need(s.initial.r == 0.0 and s.initial.delta == 1.0, "delta = 1, r = 0")
    _require_zero_t_consistency(s)
    z = _terms(s.params, s.bath, t)
    e, u, c = z.e, z.u, z.c
    return z.quarter_h2 * ((e + c * u) * (e + c * u) + e * c * (-2.0 * (c - 1.0) * (z.m * z.m * z.v)))


def schrodinger_mu0(s: Scenario, t: float) -> float:
    """sigma(t) for mu = 0 and any (delta, r)."""
    _need(s.params.mu == 0.0, "mu = 0")
    z = _terms(s.params, s.bath, t)
    e, u, c = z.e, z.u, z.c
    Sm2 = _excess_spread(s.initial.delta, s.initial.r)
    return z.quarter_h2 * ((e + c * u) * (e + c * u) + c * e * u * Sm2)


def schrodinger_squeezed_mu0(s: Scenario, t: float) -> float:
    _need(s.params.mu == 0.0 and s.initial.r == 0.0, "mu = 0, r = 0")
    delta = s.initial.delta
    z = _terms(s.params, s.bath, t)
    e, u, c = z.e, z.u, z.c
    return z.quarter_h2 * ((e + c * u) * (e + c * u) + c * e * u * ((delta - 1.0) * (delta - 1.0) / delta))


def schrodinger_coherent_mu0(s: Scenario, t: float) -> float:
    """(hbar^2/4) [e + coth(eps) (1 - e)]^2, identical to U(t) in this case."""
    _need(
        s.params.mu == 0.0 and s.initial.r == 0.0 and s.initial.delta == 1.0,
        "mu = 0, r = 0, delta = 1",
    )
    z = _terms(s.params, s.bath, t)
    amp = z.e + z.c * z.u
    return z.quarter_h2 * (amp * amp)


def schrodinger_zero_temperature(s: Scenario, t: float) -> float:
    """sigma_0(t) at T = 0 (mu = 0 forced): pure decay, no oscillation."""
    _need(s.bath.coth_eps == 1.0 and s.params.mu == 0.0, "coth_eps = 1, mu = 0")
    z = _terms(s.params, s.bath, t)
    Sm2 = _excess_spread(s.initial.delta, s.initial.r)
    return z.quarter_h2 * (1.0 + Sm2 * z.e * z.u)


def heisenberg_coherent(s: Scenario, t: float) -> float:
    """U(t) for delta = 1, r = 0 and any mu."""
    _need(s.initial.r == 0.0 and s.initial.delta == 1.0, "delta = 1, r = 0")
    _require_zero_t_consistency(s)
    z = _terms(s.params, s.bath, t)
    e, u, c = z.e, z.u, z.c
    cm1 = c - 1.0
    amp = e + c * u
    return z.quarter_h2 * (
        amp * amp
        - 2.0 * e * c * cm1 * (z.m * z.m * z.v)
        + e * e * cm1 * cm1 * z.k2 * z.m * z.m * z.v * z.v
    )


def heisenberg_mu0(s: Scenario, t: float) -> float:
    """U(t) for mu = 0, r = 0, any delta."""
    _need(s.params.mu == 0.0 and s.initial.r == 0.0, "mu = 0, r = 0")
    delta = s.initial.delta
    z = _terms(s.params, s.bath, t)
    e, u, c = z.e, z.u, z.c
    Sm2 = (delta - 1.0) * (delta - 1.0) / delta
    Dm = delta - 1.0 / delta
    base = (e + c * u) * (e + c * u) + c * e * u * Sm2
    return z.quarter_h2 * (base + e * e * (0.25 * (Dm * Dm * z.s2 * z.s2)))


def heisenberg_coherent_mu0(s: Scenario, t: float) -> float:
    """(hbar^2/4) [e + coth(eps) (1 - e)]^2: quantum amplitude e plus thermal amplitude."""
    _need(
        s.params.mu == 0.0 and s.initial.r == 0.0 and s.initial.delta == 1.0,
        "mu = 0, r = 0, delta = 1",
    )
    z = _terms(s.params, s.bath, t)
    amp = z.e + z.c * z.u
    return z.quarter_h2 * (amp * amp)


def heisenberg_zero_temperature(s: Scenario, t: float) -> float:
    """U_0(t) at T = 0: decay plus sin^2(2 omega t) oscillation for delta != 1."""
    _need(
        s.bath.coth_eps == 1.0 and s.params.mu == 0.0 and s.initial.r == 0.0,
        "coth_eps = 1, mu = 0, r = 0",
    )
    delta = s.initial.delta
    z = _terms(s.params, s.bath, t)
    Sm2 = (delta - 1.0) * (delta - 1.0) / delta
    Dm = delta - 1.0 / delta
    return z.quarter_h2 * (1.0 + Sm2 * z.e * z.u + 0.25 * z.e * z.e * Dm * Dm * z.s2 * z.s2)
