"""Gaussian-state evolution: moment equations, RK4 trajectories, closed-form sigma(t)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from . import kernels
from .model import (
    ConstraintError,
    DiffusionCoefficients,
    GaussianState,
    InitialStateSpec,
    OscillatorParams,
    ThermalBath,
    initial_covariance,
    thermal_coefficients,
    validate_constraints,
)

STABILITY_LIMIT = 0.1


class MomentDerivatives(NamedTuple):
    mean_q: float
    mean_p: float
    var_q: float
    var_p: float
    cov_qp: float


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    t_end: float = 25.0
    sample_stride: int = 1
    method: str = "rk4"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be > 0, got {self.t_end}")
        if self.sample_stride < 1:
            raise ValueError(f"sample_stride must be >= 1, got {self.sample_stride}")
        if self.method != "rk4":
            raise ValueError(f"only the fixed-step 'rk4' method is supported, got {self.method!r}")
        n = round(self.t_end / self.dt)
        if n < 1 or abs(n * self.dt - self.t_end) > 1e-9 * self.t_end:
            raise ValueError(f"t_end/dt = {self.t_end / self.dt} is not an integer")

    @property
    def n_steps(self) -> int:
        return round(self.t_end / self.dt)

    def sample_times(self) -> np.ndarray:
        idx = np.arange(0, self.n_steps + 1, self.sample_stride)
        return idx * self.dt


def moment_coefficients(params: OscillatorParams, coeffs: DiffusionCoefficients) -> np.ndarray:
    m, w = params.m, params.omega
    return np.array([1.0 / m, m * w * w, params.lam, params.mu, coeffs.d_qq, coeffs.d_pp, coeffs.d_pq])


def moment_ode_rhs(state: GaussianState, params: OscillatorParams, coeffs: DiffusionCoefficients) -> MomentDerivatives:
    y = np.array(state.as_vector(), dtype=float)
    out = kernels.moment_rhs(y, moment_coefficients(params, coeffs), np.empty(5))
    return MomentDerivatives(*(float(v) for v in out))


@dataclass(frozen=True)
class Trajectory:
    """Sampled moment trajectory. Arrays are aligned with ``times``."""

    times: np.ndarray
    moments: np.ndarray  # shape (n, 5)
    params: OscillatorParams
    bath: ThermalBath

    def __len__(self) -> int:
        return len(self.times)

    def __getitem__(self, i: int) -> GaussianState:
        return GaussianState(float(self.times[i]), *(float(v) for v in self.moments[i]))

    def __iter__(self) -> Iterator[GaussianState]:
        for i in range(len(self)):
            yield self[i]

    @property
    def samples(self) -> list[GaussianState]:
        return list(self)

    mean_q = property(lambda self: self.moments[:, 0])
    mean_p = property(lambda self: self.moments[:, 1])
    var_q = property(lambda self: self.moments[:, 2])
    var_p = property(lambda self: self.moments[:, 3])
    cov_qp = property(lambda self: self.moments[:, 4])

    @property
    def sigma(self) -> np.ndarray:
        return self.var_q * self.var_p - self.cov_qp**2


def check_step_size(params: OscillatorParams, dt: float) -> None:
    rate = max(params.lam + abs(params.mu), params.omega)
    if dt * rate > STABILITY_LIMIT:
        raise ValueError(
            f"step size rejected: dt*max(lambda+|mu|, omega) = {dt * rate:.6g} > {STABILITY_LIMIT}"
        )


def integrate(
    spec: InitialStateSpec,
    params: OscillatorParams,
    bath: ThermalBath,
    cfg: IntegratorConfig,
    *,
    coeffs: DiffusionCoefficients | None = None,
    validate: bool = True,
) -> Trajectory:
    """RK4-integrate the first and second moments from the initial state.

    ``validate=False`` skips the constraint gate (closed-system test mode);
    ``coeffs`` overrides the thermal diffusion coefficients.
    """
    if validate:
        report = validate_constraints(params, bath)
        if not report.passed:
            raise ConstraintError(report)
    check_step_size(params, cfg.dt)
    if coeffs is None:
        coeffs = thermal_coefficients(params, bath, check=validate)
    y0 = np.array(initial_covariance(spec, params).as_vector())
    out = kernels.rk4_moments(y0, moment_coefficients(params, coeffs), cfg.dt, cfg.n_steps, cfg.sample_stride)
    return Trajectory(times=cfg.sample_times(), moments=out, params=params, bath=bath)


def sigma_closed_form(
    spec: InitialStateSpec,
    params: OscillatorParams,
    bath: ThermalBath,
    t,
    validate: bool = True,
):
    """Generalized uncertainty sigma(t) for thermal diffusion coefficients.

    Accepts a scalar or an array of times.
    """
    if validate:
        report = validate_constraints(params, bath)
        if not report.passed:
            raise ConstraintError(report)
    big_omega = params.big_omega
    w, mu, lam = params.omega, params.mu, params.lam
    c = bath.coth_eps
    d, r = spec.delta, spec.r
    sq = math.sqrt(1.0 - r * r)
    s_plus = d + 1.0 / (d * (1.0 - r * r))
    s_minus = d - 1.0 / (d * (1.0 - r * r))
    t = np.asarray(t, dtype=float)
    # Regrouped so every term vanishes at t = 0 without O(coth^2) cancellation:
    # (omega^2 - mu^2 cos 2Wt)/W^2 = 1 + x_r with x_r = 2 mu^2 sin^2(Wt)/W^2.
    sin1 = np.sin(big_omega * t)
    one_minus_cos2 = 2.0 * sin1 * sin1
    x_r = mu * mu * one_minus_cos2 / big_omega**2
    e2 = np.exp(-2.0 * lam * t)
    one_minus_e2 = -np.expm1(-2.0 * lam * t)
    y = (
        s_minus * mu * np.sin(2.0 * big_omega * t) / big_omega
        + 2.0 * r * mu * w * one_minus_cos2 / (big_omega**2 * sq)
    )
    val = (
        c * c * (one_minus_e2 * one_minus_e2 - 2.0 * e2 * x_r)
        + c * s_plus * e2 * (one_minus_e2 + x_r)
        + e2 * e2
        + e2 * c * y
    )
    val = params.hbar**2 / 4.0 * val
    return float(val) if val.ndim == 0 else val


def asymptotic_state(params: OscillatorParams, bath: ThermalBath) -> GaussianState:
    mw, c = params.m * params.omega, bath.coth_eps
    return GaussianState(
        t=math.inf,
        mean_q=0.0,
        mean_p=0.0,
        var_q=params.hbar * c / (2.0 * mw),
        var_p=params.hbar * mw * c / 2.0,
        cov_qp=0.0,
    )


def mean_flow_envelope(spec: InitialStateSpec, params: OscillatorParams) -> tuple[float, float]:
    """(C, rate) such that |mean_q(t)| <= C * exp(-rate * t).

    Uses the eigendecomposition of the 2x2 drift matrix of the mean
    equations; its eigenvalues are -lambda +/- i*Omega.
    """
    drift = np.array([[-(params.lam - params.mu), 1.0 / params.m],
                      [-params.m * params.omega**2, -(params.lam + params.mu)]])
    evals, vecs = np.linalg.eig(drift)
    coef = np.linalg.solve(vecs, np.array([spec.q0, spec.p0], dtype=complex))
    c = float(np.sum(np.abs(vecs[0, :]) * np.abs(coef)))
    rate = float(-np.max(evals.real))
    return c, rate
