"""Domain types and validity constraints for the Lindblad damped oscillator.

All quantities carry their natural units; with the defaults hbar = k = m = 1
and omega = 1 every formula reduces to its dimensionless form (time in
units of 1/omega, action in units of hbar).

Temperature is stored as ``coth_eps = coth(hbar*omega / 2kT)`` because every
closed form depends on it only through that factor.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, replace as dc_replace
from typing import Iterator

__all__ = [
    "LindbladError",
    "InvalidParameters",
    "ThermalBathInvalid",
    "InvalidInitialState",
    "ConstraintViolation",
    "OscillatorParams",
    "BathSpec",
    "DiffusionCoefficients",
    "CovarianceState",
    "InitialStateSpec",
    "Scenario",
    "ConstraintCheck",
    "ValidityReport",
    "coth_from_temperature",
    "temperature_from_coth",
    "thermal_diffusion",
    "check_fundamental_constraints",
    "check_thermal_validity",
    "check_positivity_functional",
    "check_initial_positivity",
    "initial_covariance",
]

# |r| at or above this is rejected: sigma_pp(0) diverges as |r| -> 1.
R_LIMIT = 0.999999
# coth(eps) == 1 to double precision for eps beyond this.
_EPS_SATURATION = 30.0
# Equality cases (T = 0, coherent states) sit exactly on the constraint
# boundaries; allow this many ulps of the compared magnitudes.
_BOUNDARY_ULPS = 16


def _at_least(lhs: float, rhs: float) -> bool:
    slack = _BOUNDARY_ULPS * sys.float_info.epsilon * max(abs(lhs), abs(rhs))
    return lhs >= rhs - slack


class LindbladError(ValueError):
    """Base class for every domain error raised by this package."""


class InvalidParameters(LindbladError):
    pass


class ThermalBathInvalid(LindbladError):
    """Thermal diffusion coefficients cannot satisfy the positivity constraints."""


class InvalidInitialState(LindbladError):
    pass


class ConstraintViolation(LindbladError):
    """Explicit diffusion coefficients break the complete-positivity constraints."""


@dataclass(frozen=True)
class OscillatorParams:
    """Physical constants and dynamical parameters of the open oscillator.

    ``lam`` is the friction constant and ``mu`` the coefficient of the
    ``(qp + pq)/2`` term of the Hamiltonian. Only the underdamped case
    ``omega > |mu|`` is supported.
    """

    omega: float = 1.0
    lam: float = 0.1
    mu: float = 0.0
    hbar: float = 1.0
    mass: float = 1.0
    boltzmann_k: float = 1.0

    def __post_init__(self) -> None:
        for name in ("omega", "hbar", "mass", "boltzmann_k"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidParameters(f"{name} must be finite and > 0, got {value!r}")
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise InvalidParameters(f"lam must be finite and >= 0, got {self.lam!r}")
        if not math.isfinite(self.mu):
            raise InvalidParameters(f"mu must be finite, got {self.mu!r}")
        if not self.omega > abs(self.mu):
            raise InvalidParameters(
                f"underdamped regime requires omega > |mu| (omega={self.omega}, mu={self.mu})"
            )

    @property
    def Omega(self) -> float:
        """Shifted frequency sqrt(omega^2 - mu^2)."""
        return math.sqrt(self.omega * self.omega - self.mu * self.mu)

    @property
    def zero_coupling(self) -> bool:
        return self.lam == 0.0 and self.mu == 0.0


def coth_from_temperature(
    temperature: float, omega: float = 1.0, hbar: float = 1.0, boltzmann_k: float = 1.0
) -> float:
    """Return coth(hbar*omega / 2kT); T = 0 maps to exactly 1."""
    if temperature < 0 or not math.isfinite(temperature):
        raise InvalidParameters(f"temperature must be finite and >= 0, got {temperature!r}")
    if temperature == 0:
        return 1.0
    eps = hbar * omega / (2.0 * boltzmann_k * temperature)
    if eps > _EPS_SATURATION:
        return 1.0
    return 1.0 / math.tanh(eps)


def temperature_from_coth(
    coth_eps: float, omega: float = 1.0, hbar: float = 1.0, boltzmann_k: float = 1.0
) -> float:
    if coth_eps < 1:
        raise InvalidParameters(f"coth_eps must be >= 1, got {coth_eps!r}")
    if coth_eps == 1:
        return 0.0
    eps = math.atanh(1.0 / coth_eps)
    return hbar * omega / (2.0 * boltzmann_k * eps)


@dataclass(frozen=True)
class BathSpec:
    """Bath temperature, parameterized by coth_eps = coth(hbar*omega/2kT) >= 1."""

    coth_eps: float = 2.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.coth_eps) and self.coth_eps >= 1.0):
            raise InvalidParameters(f"coth_eps must be finite and >= 1, got {self.coth_eps!r}")

    @classmethod
    def from_temperature(cls, temperature: float, params: OscillatorParams) -> "BathSpec":
        return cls(
            coth_from_temperature(temperature, params.omega, params.hbar, params.boltzmann_k)
        )

    @classmethod
    def from_tau(cls, tau: float) -> "BathSpec":
        """Build from the reduced temperature tau = 2kT/(hbar*omega)."""
        if tau < 0:
            raise InvalidParameters(f"tau must be >= 0, got {tau!r}")
        if tau == 0 or 1.0 / tau > _EPS_SATURATION:
            return cls(1.0)
        return cls(1.0 / math.tanh(1.0 / tau))

    @property
    def eps(self) -> float:
        """hbar*omega/2kT; infinite at T = 0."""
        return math.inf if self.coth_eps == 1.0 else math.atanh(1.0 / self.coth_eps)

    @property
    def tau(self) -> float:
        """Reduced temperature 2kT/(hbar*omega) = 1/eps."""
        return 0.0 if self.coth_eps == 1.0 else 1.0 / self.eps

    def temperature(self, params: OscillatorParams) -> float:
        return temperature_from_coth(self.coth_eps, params.omega, params.hbar, params.boltzmann_k)


@dataclass(frozen=True)
class DiffusionCoefficients:
    """Diffusion coefficients of the master equation.

    The positivity constraints involve the friction constant as well, so
    they are checked by the consumers (see ``check_fundamental_constraints``).
    Instances built with :meth:`unchecked` are exempt: they exist to explore
    parameter sets that violate complete positivity.
    """

    D_pp: float
    D_qq: float
    D_pq: float = 0.0
    checked: bool = field(default=True, compare=False)

    @classmethod
    def unchecked(cls, D_pp: float, D_qq: float, D_pq: float = 0.0) -> "DiffusionCoefficients":
        return cls(D_pp, D_qq, D_pq, checked=False)

    @property
    def is_zero(self) -> bool:
        return self.D_pp == 0.0 and self.D_qq == 0.0 and self.D_pq == 0.0


@dataclass(frozen=True)
class CovarianceState:
    """Second moments (sigma_qq, sigma_pp, sigma_pq) at one instant."""

    sigma_qq: float
    sigma_pp: float
    sigma_pq: float

    def determinant(self) -> float:
        return self.sigma_qq * self.sigma_pp - self.sigma_pq * self.sigma_pq

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.sigma_qq, self.sigma_pp, self.sigma_pq)


@dataclass(frozen=True)
class InitialStateSpec:
    """Correlated coherent initial state: squeezing delta > 0 and correlation |r| < 1."""

    delta: float = 1.0
    r: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise InvalidInitialState(f"delta must be finite and > 0, got {self.delta!r}")
        if not (math.isfinite(self.r) and abs(self.r) < R_LIMIT):
            raise InvalidInitialState(f"|r| must be < {R_LIMIT}, got {self.r!r}")

    @property
    def q(self) -> float:
        """1/(delta (1 - r^2)), the momentum-spread factor."""
        return 1.0 / (self.delta * (1.0 - self.r * self.r))


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    passed: bool
    margin: float
    detail: str = ""

    def __str__(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        text = f"{flag}  {self.name}  margin={self.margin:.6g}"
        return f"{text}  ({self.detail})" if self.detail else text


@dataclass(frozen=True)
class ValidityReport:
    checks: tuple[ConstraintCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def __bool__(self) -> bool:
        return self.ok

    def __iter__(self) -> Iterator[ConstraintCheck]:
        return iter(self.checks)

    @property
    def failures(self) -> tuple[ConstraintCheck, ...]:
        return tuple(c for c in self.checks if not c.passed)

    def __getitem__(self, name: str) -> ConstraintCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __str__(self) -> str:
        return "\n".join(str(c) for c in self.checks)


def thermal_diffusion(
    params: OscillatorParams, bath: BathSpec, check: bool = True
) -> DiffusionCoefficients:
    """Diffusion coefficients whose asymptotic state is the Gibbs state.

    Raises ThermalBathInvalid when either coefficient would be non-positive,
    except for zero coupling (lam = mu = 0) which gives all zeros. With
    ``check=False`` the raw values come back as unchecked coefficients, for
    reporting how far a parameter set is from the allowed region.
    """
    lam, mu = params.lam, params.mu
    if params.zero_coupling:
        return DiffusionCoefficients(0.0, 0.0, 0.0)
    if not check:
        hm_omega = params.hbar * params.mass * params.omega
        c = bath.coth_eps
        return DiffusionCoefficients.unchecked(
            0.5 * (lam + mu) * hm_omega * c,
            0.5 * (lam - mu) * (params.hbar / (params.mass * params.omega)) * c,
        )
    if lam <= mu:
        raise ThermalBathInvalid(f"thermal bath requires lam > mu (lam={lam}, mu={mu}): D_qq <= 0")
    if lam + mu <= 0:
        raise ThermalBathInvalid(f"thermal bath requires lam > -mu (lam={lam}, mu={mu}): D_pp <= 0")
    hm_omega = params.hbar * params.mass * params.omega
    c = bath.coth_eps
    D_pp = 0.5 * (lam + mu) * hm_omega * c
    D_qq = 0.5 * (lam - mu) * (params.hbar / (params.mass * params.omega)) * c
    return DiffusionCoefficients(D_pp, D_qq, 0.0)


def check_fundamental_constraints(
    d: DiffusionCoefficients, lam: float, hbar: float = 1.0
) -> ValidityReport:
    det = d.D_pp * d.D_qq - d.D_pq * d.D_pq
    bound = lam * lam * hbar * hbar / 4.0
    return ValidityReport(
        (
            ConstraintCheck("D_pp > 0", d.D_pp > 0, d.D_pp),
            ConstraintCheck("D_qq > 0", d.D_qq > 0, d.D_qq),
            ConstraintCheck(
                "D_pp*D_qq - D_pq^2 >= lam^2 hbar^2/4",
                _at_least(det, bound),
                det - bound,
                f"{det:.6g} vs {bound:.6g}",
            ),
        )
    )


def check_thermal_validity(params: OscillatorParams, bath: BathSpec) -> ValidityReport:
    """Conditions under which the thermal coefficients satisfy the positivity constraints.

    Zero coupling (lam = mu = 0) is the closed oscillator and passes with a
    single informational check.
    """
    lam, mu, c = params.lam, params.mu, bath.coth_eps
    if params.zero_coupling:
        return ValidityReport(
            (ConstraintCheck("zero coupling (closed system)", True, 0.0, "lam = mu = 0"),)
        )
    lhs = (lam * lam - mu * mu) * c * c
    rhs = lam * lam
    checks = [
        ConstraintCheck("lam > mu", lam > mu, lam - mu),
        ConstraintCheck(
            "thermal bath: (lam^2 - mu^2) coth^2(eps) >= lam^2",
            lam > mu and _at_least(lhs, rhs),
            lhs - rhs,
            f"{lhs:.6g} vs {rhs:.6g}",
        ),
    ]
    if c == 1.0:
        checks.append(ConstraintCheck("T = 0 requires mu = 0", mu == 0.0, -abs(mu)))
    return ValidityReport(tuple(checks))


def check_positivity_functional(
    x: CovarianceState,
    d: DiffusionCoefficients,
    lam: float,
    hbar: float = 1.0,
    params: OscillatorParams | None = None,
    bath: BathSpec | None = None,
) -> ValidityReport:
    """Complete-positivity restriction D_pp s_qq + D_qq s_pp - 2 D_pq s_pq >= hbar^2 lam / 2.

    Passing ``params`` and ``bath`` adds the same inequality written with the
    thermal coefficients substituted.
    """
    lhs = d.D_pp * x.sigma_qq + d.D_qq * x.sigma_pp - 2.0 * d.D_pq * x.sigma_pq
    rhs = hbar * hbar * lam / 2.0
    checks = [
        ConstraintCheck(
            "D_pp s_qq + D_qq s_pp - 2 D_pq s_pq >= hbar^2 lam/2",
            _at_least(lhs, rhs),
            lhs - rhs,
            f"{lhs:.6g} vs {rhs:.6g}",
        )
    ]
    if params is not None and bath is not None:
        mw = params.mass * params.omega
        lhs_t = (
            (params.lam + params.mu) * mw * x.sigma_qq + (params.lam - params.mu) * x.sigma_pp / mw
        ) * bath.coth_eps
        rhs_t = params.hbar * params.lam
        checks.append(
            ConstraintCheck(
                "thermal positivity: [(lam+mu) m w s_qq + (lam-mu) s_pp/(m w)] coth >= hbar lam",
                _at_least(lhs_t, rhs_t),
                lhs_t - rhs_t,
            )
        )
    return ValidityReport(tuple(checks))


def check_initial_positivity(
    params: OscillatorParams, bath: BathSpec, spec: InitialStateSpec
) -> ConstraintCheck:
    """Thermal positivity condition evaluated on the correlated coherent state at t = 0."""
    lam, mu = params.lam, params.mu
    lhs = ((lam + mu) * spec.delta + (lam - mu) * spec.q) * bath.coth_eps
    return ConstraintCheck(
        "initial state: [(lam+mu) delta + (lam-mu)/(delta(1-r^2))] coth >= 2 lam",
        _at_least(lhs, 2.0 * lam),
        lhs - 2.0 * lam,
    )


def initial_covariance(spec: InitialStateSpec, params: OscillatorParams) -> CovarianceState:
    """Second moments of the correlated coherent state; a minimum-uncertainty state."""
    hbar, mw = params.hbar, params.mass * params.omega
    one_minus_r2 = 1.0 - spec.r * spec.r
    return CovarianceState(
        sigma_qq=hbar * spec.delta / (2.0 * mw),
        sigma_pp=hbar * mw / (2.0 * spec.delta * one_minus_r2),
        sigma_pq=hbar * spec.r / (2.0 * math.sqrt(one_minus_r2)),
    )


@dataclass(frozen=True)
class Scenario:
    """Parameters, bath and initial state; rejected unless the thermal bath is valid."""

    params: OscillatorParams = field(default_factory=OscillatorParams)
    bath: BathSpec = field(default_factory=BathSpec)
    initial: InitialStateSpec = field(default_factory=InitialStateSpec)

    def __post_init__(self) -> None:
        report = check_thermal_validity(self.params, self.bath)
        if not report.ok:
            names = ", ".join(c.name for c in report.failures)
            raise ThermalBathInvalid(f"scenario violates: {names}")

    @property
    def diffusion(self) -> DiffusionCoefficients:
        return thermal_diffusion(self.params, self.bath)

    @property
    def x0(self) -> CovarianceState:
        return initial_covariance(self.initial, self.params)

    def replace(self, **changes: float) -> "Scenario":
        """Copy with flat field overrides, e.g. ``s.replace(r=0.0, mu=0.0)``."""
        groups = {
            "params": {f for f in OscillatorParams.__dataclass_fields__},
            "bath": {"coth_eps"},
            "initial": {"delta", "r"},
        }
        parts = {"params": {}, "bath": {}, "initial": {}}
        for key, value in changes.items():
            for group, names in groups.items():
                if key in names:
                    parts[group][key] = value
                    break
            else:
                raise TypeError(f"unknown scenario field {key!r}")
        return Scenario(
            dc_replace(self.params, **parts["params"]),
            dc_replace(self.bath, **parts["bath"]),
            dc_replace(self.initial, **parts["initial"]),
        )
