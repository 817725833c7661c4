"""Exact and numerical propagation of the second moments.

The variances obey a closed linear system dX/dt = A X + D in the scaled
variables X = (m w s_qq, s_pp/(m w), s_pq). The drift matrix is
diagonalized by a fixed matrix T with T^2 = I, so the exact propagator is
T exp(Kt) T with K diagonal. ``propagate_ode`` integrates the same system
with classical RK4 and never touches T or K; it is the cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .core import (
    ConstraintViolation,
    CovarianceState,
    DiffusionCoefficients,
    LindbladError,
    OscillatorParams,
    check_fundamental_constraints,
)

__all__ = [
    "OverdampedUnsupported",
    "NoAsymptoticState",
    "InvalidTime",
    "NumericalInconsistency",
    "StepTooLarge",
    "ScaledCovariance",
    "ModalDecomposition",
    "drift_matrix",
    "diffusion_vector",
    "modal_decomposition",
    "asymptotic_state",
    "propagate_exact",
    "propagate_exact_many",
    "propagate_ode",
    "propagate_ode_many",
    "default_step",
]

TWO_PI = 2.0 * math.pi
_IDENTITY_TOL = 1e-12
_IMAG_TOL = 1e-10


class OverdampedUnsupported(LindbladError):
    pass


class NoAsymptoticState(LindbladError):
    pass


class InvalidTime(LindbladError):
    pass


class NumericalInconsistency(LindbladError):
    """An internal identity failed by more than rounding can explain."""


class StepTooLarge(LindbladError):
    pass


@dataclass(frozen=True)
class ScaledCovariance:
    """Covariances in action units: x1 = m w s_qq, x2 = s_pp/(m w), x3 = s_pq."""

    x1: float
    x2: float
    x3: float

    @classmethod
    def from_state(cls, x: CovarianceState, params: OscillatorParams) -> "ScaledCovariance":
        mw = params.mass * params.omega
        return cls(mw * x.sigma_qq, x.sigma_pp / mw, x.sigma_pq)

    def to_state(self, params: OscillatorParams) -> CovarianceState:
        mw = params.mass * params.omega
        return CovarianceState(self.x1 / mw, self.x2 * mw, self.x3)

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3])


def drift_matrix(params: OscillatorParams) -> np.ndarray:
    lam, mu, w = params.lam, params.mu, params.omega
    return np.array(
        [
            [-2.0 * (lam - mu), 0.0, 2.0 * w],
            [0.0, -2.0 * (lam + mu), -2.0 * w],
            [-w, w, -2.0 * lam],
        ]
    )


def diffusion_vector(params: OscillatorParams, d: DiffusionCoefficients) -> np.ndarray:
    mw = params.mass * params.omega
    return np.array([2.0 * mw * d.D_qq, 2.0 * d.D_pp / mw, 2.0 * d.D_pq])


@dataclass(frozen=True, eq=False)
class ModalDecomposition:
    """Eigen-decomposition A = T K T of the drift matrix, with T^2 = I.

    Build through :func:`modal_decomposition`, which verifies both identities.
    """

    T: np.ndarray
    K: np.ndarray
    Omega: float
    lam: float

    @property
    def rates(self) -> np.ndarray:
        """Diagonal of K: -2(lam - i Omega), -2(lam + i Omega), -2 lam."""
        return np.diag(self.K)

    def exp_kt(self, t: float) -> np.ndarray:
        """Diagonal of exp(K t), with the phase 2 Omega t reduced modulo 2 pi."""
        decay = math.exp(-2.0 * self.lam * t)
        phase = math.fmod(2.0 * self.Omega * t, TWO_PI)
        rot = complex(math.cos(phase), math.sin(phase))
        return np.array([decay * rot, decay * rot.conjugate(), decay + 0j])

    def propagator(self, t: float) -> np.ndarray:
        """T exp(Kt) T, complex; its imaginary part vanishes up to rounding."""
        return (self.T * self.exp_kt(t)) @ self.T


def _build_modal(params: OscillatorParams) -> ModalDecomposition:
    lam, mu, w = params.lam, params.mu, params.omega
    if not w > abs(mu):
        raise OverdampedUnsupported(f"omega > |mu| required (omega={w}, mu={mu})")
    Om = params.Omega
    iOm = 1j * Om
    T = np.array(
        [
            [mu + iOm, mu - iOm, 2.0 * w],
            [mu - iOm, mu + iOm, 2.0 * w],
            [-w, -w, -2.0 * mu],
        ]
    ) / (2j * Om)
    K = np.diag([-2.0 * (lam - iOm), -2.0 * (lam + iOm), -2.0 * lam + 0j])

    A = drift_matrix(params)
    scale = max(1.0, float(np.abs(A).max()))
    err_sq = float(np.abs(T @ T - np.eye(3)).max())
    err_tkt = float(np.abs(T @ K @ T - A).max())
    if err_sq > _IDENTITY_TOL * scale or err_tkt > _IDENTITY_TOL * scale:
        raise NumericalInconsistency(
            f"modal identities violated: |T^2 - I| = {err_sq:.3g}, |TKT - A| = {err_tkt:.3g}"
        )
    T.setflags(write=False)
    K.setflags(write=False)
    return ModalDecomposition(T=T, K=K, Omega=Om, lam=lam)


@lru_cache(maxsize=256)
def modal_decomposition(params: OscillatorParams) -> ModalDecomposition:
    return _build_modal(params)


def _require_d(params: OscillatorParams, d: DiffusionCoefficients) -> None:
    if params.lam == 0.0:
        if not d.is_zero:
            raise ConstraintViolation("lam = 0 (closed system) requires zero diffusion coefficients")
        return
    if d.checked:
        report = check_fundamental_constraints(d, params.lam, params.hbar)
        if not report.ok:
            names = ", ".join(c.name for c in report.failures)
            raise ConstraintViolation(
                f"diffusion coefficients violate {names}; use DiffusionCoefficients.unchecked "
                "for diagnostic runs"
            )


def _asymptotic_vector(params: OscillatorParams, d: DiffusionCoefficients) -> np.ndarray:
    if params.lam <= 0.0:
        raise NoAsymptoticState("lam = 0: K is singular and no stationary state exists")
    modal = modal_decomposition(params)
    dvec = diffusion_vector(params, d)
    x_inf = -((modal.T * (1.0 / modal.rates)) @ modal.T) @ dvec
    return x_inf.real


def asymptotic_state(params: OscillatorParams, d: DiffusionCoefficients) -> CovarianceState:
    """Stationary second moments -T K^{-1} T D; independent of the initial state."""
    _require_d(params, d)
    x = _asymptotic_vector(params, d)
    return ScaledCovariance(*(float(v) for v in x)).to_state(params)


def _check_time(t: float) -> None:
    if not (t >= 0.0 and math.isfinite(t)):
        raise InvalidTime(f"t must be finite and >= 0, got {t!r}")


def propagate_exact_many(
    x0: CovarianceState,
    params: OscillatorParams,
    d: DiffusionCoefficients,
    times: Iterable[float],
) -> list[CovarianceState]:
    """Exact second moments at each requested time."""
    _require_d(params, d)
    modal = modal_decomposition(params)
    X0 = ScaledCovariance.from_state(x0, params).as_array()
    X_inf = np.zeros(3) if params.lam == 0.0 else _asymptotic_vector(params, d)
    dev = X0 - X_inf
    bound = _IMAG_TOL * (np.linalg.norm(X0) + np.linalg.norm(X_inf))
    out = []
    for t in times:
        _check_time(t)
        y = modal.propagator(t) @ dev
        imag = float(np.abs(y.imag).max())
        if imag > bound:
            raise NumericalInconsistency(f"imaginary residual {imag:.3g} at t={t}")
        out.append(ScaledCovariance(*(float(v) for v in y.real + X_inf)).to_state(params))
    return out


def propagate_exact(
    x0: CovarianceState, params: OscillatorParams, d: DiffusionCoefficients, t: float
) -> CovarianceState:
    """Second moments at time t: X(t) = T e^{Kt} T (X(0) - X(inf)) + X(inf)."""
    return propagate_exact_many(x0, params, d, [t])[0]


def default_step(params: OscillatorParams) -> float:
    return 1e-3 * min(1.0 / params.omega, 1.0 / max(params.lam, 1e-9))


def propagate_ode_many(
    x0: CovarianceState,
    params: OscillatorParams,
    d: DiffusionCoefficients,
    times: Sequence[float],
    step: float | None = None,
) -> list[CovarianceState]:
    """Classical RK4 integration of the moment equations, sampled at ``times``.

    Each interval between consecutive sample times is split into the
    smallest number of equal steps no longer than ``step``. Diffusion
    coefficients are used as given; no positivity check is applied.
    """
    if step is None:
        step = default_step(params)
    if not step > 0:
        raise StepTooLarge(f"step must be > 0, got {step!r}")
    limit = 1.0 / (10.0 * max(params.omega, params.lam))
    if step >= limit:
        raise StepTooLarge(f"step {step} >= {limit:.6g} = 1/(10 max(omega, lam))")

    a11 = -2.0 * (params.lam - params.mu)
    a22 = -2.0 * (params.lam + params.mu)
    a33 = -2.0 * params.lam
    w = params.omega
    d1, d2, d3 = (float(v) for v in diffusion_vector(params, d))

    def rhs(x1: float, x2: float, x3: float) -> tuple[float, float, float]:
        return (
            a11 * x1 + 2.0 * w * x3 + d1,
            a22 * x2 - 2.0 * w * x3 + d2,
            -w * x1 + w * x2 + a33 * x3 + d3,
        )

    s = ScaledCovariance.from_state(x0, params)
    x1, x2, x3 = s.x1, s.x2, s.x3
    t_now = 0.0
    out = []
    for t in times:
        _check_time(t)
        if t < t_now:
            raise InvalidTime("sample times must be non-decreasing")
        span = t - t_now
        n = math.ceil(span / step - 1e-9) if span > 0 else 0
        h = span / n if n else 0.0
        half = 0.5 * h
        sixth = h / 6.0
        for _ in range(n):
            k1 = rhs(x1, x2, x3)
            k2 = rhs(x1 + half * k1[0], x2 + half * k1[1], x3 + half * k1[2])
            k3 = rhs(x1 + half * k2[0], x2 + half * k2[1], x3 + half * k2[2])
            k4 = rhs(x1 + h * k3[0], x2 + h * k3[1], x3 + h * k3[2])
            x1 += sixth * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
            x2 += sixth * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
            x3 += sixth * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        t_now = t
        out.append(ScaledCovariance(x1, x2, x3).to_state(params))
    return out


def propagate_ode(
    x0: CovarianceState,
    params: OscillatorParams,
    d: DiffusionCoefficients,
    t: float,
    step: float | None = None,
) -> CovarianceState:
    return propagate_ode_many(x0, params, d, [t], step)[0]
