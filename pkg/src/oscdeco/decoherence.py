"""Decoherence degree, decoherence/relaxation timescales and fluctuation regimes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .evolution import Trajectory
from .model import (
    DiffusionCoefficients,
    GaussianState,
    InitialStateSpec,
    OscillatorParams,
    ThermalBath,
    generalized_uncertainty,
    initial_covariance,
)

REGIME_THRESHOLD = 0.05
QUANTUM = "quantum-dominated"
CROSSOVER = "crossover"
THERMAL = "thermal-dominated"


def delta_qd_from_sigma(sigma, hbar: float = 1.0):
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma <= 0):
        raise ValueError("generalized uncertainty must be > 0")
    out = hbar / (2.0 * np.sqrt(sigma))
    return float(out) if out.ndim == 0 else out


def delta_qd(state: GaussianState, hbar: float = 1.0) -> float:
    """Degree of decoherence: 1 for a pure Gaussian, tending to 0 as coherence is lost."""
    return delta_qd_from_sigma(generalized_uncertainty(state), hbar)


def delta_qd_infinity(bath: ThermalBath) -> float:
    """tanh(eps) = 1/coth(eps)."""
    return 1.0 / bath.coth_eps


def decoherence_time(coeffs: DiffusionCoefficients, separation: float, hbar: float = 1.0) -> float:
    if separation == 0:
        raise ValueError("decoherence time is undefined for zero separation")
    if not coeffs.d_pp > 0:
        raise ValueError(f"d_pp must be > 0, got {coeffs.d_pp}")
    return hbar**2 / (coeffs.d_pp * separation**2)


def decoherence_time_thermal(params: OscillatorParams, bath: ThermalBath, spec: InitialStateSpec) -> float:
    """Decoherence time with the squared separation set to the initial var_q."""
    var_q0 = initial_covariance(spec, params).var_q
    return 2.0 * params.hbar / ((params.lam + params.mu) * params.m * params.omega * var_q0 * bath.coth_eps)


def relaxation_time(params: OscillatorParams) -> float:
    if not params.lam > 0:
        raise ValueError(f"lambda must be > 0, got {params.lam}")
    return 1.0 / params.lam


def offdiagonal_decay_factor(coeffs: DiffusionCoefficients, separation, t, hbar: float = 1.0):
    """exp(-d_pp * separation^2 * t / hbar^2); identically 1 on the diagonal."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    out = np.exp(-coeffs.d_pp * np.asarray(separation, dtype=float) ** 2 * t / hbar**2)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FluctuationScales:
    sigma_0: float
    sigma_be: float
    sigma_mb: float


def fluctuation_scales(params: OscillatorParams, bath: ThermalBath) -> FluctuationScales:
    """Heisenberg, Bose-Einstein and Maxwell-Boltzmann values of sigma.

    kT/omega is recovered from coth(eps) as hbar/(2 eps), so the Boltzmann
    constant never enters; at T = 0 the Maxwell-Boltzmann value is 0.
    """
    hbar, c = params.hbar, bath.coth_eps
    eps = bath.eps
    sigma_mb = 0.0 if math.isinf(eps) else (hbar / (2.0 * eps)) ** 2
    return FluctuationScales(hbar**2 / 4.0, hbar**2 * c * c / 4.0, sigma_mb)


@dataclass(frozen=True)
class RegimeClassification:
    label: str
    sigma_observed: float
    scales: FluctuationScales


def classify_fluctuation_regime(
    params: OscillatorParams,
    bath: ThermalBath,
    sigma_observed: float,
    theta: float = REGIME_THRESHOLD,
) -> RegimeClassification:
    scales = fluctuation_scales(params, bath)
    if sigma_observed < scales.sigma_0 * (1.0 - 1e-9):
        raise ValueError(f"sigma_observed = {sigma_observed} is below the uncertainty floor {scales.sigma_0}")
    if scales.sigma_be / scales.sigma_0 < 1.0 + theta:
        label = QUANTUM
    elif abs(scales.sigma_be - scales.sigma_mb) <= theta * scales.sigma_mb:
        label = THERMAL
    else:
        label = CROSSOVER
    return RegimeClassification(label, float(sigma_observed), scales)


@dataclass(frozen=True)
class DecoherenceReport:
    times: np.ndarray
    delta_qd_t: np.ndarray
    delta_qd_inf: float
    t_deco: float
    t_rel: float
    regime: str
    sigma_floor: float
    sigma_be: float
    sigma_mb: float

    def format(self) -> str:
        rows = [
            ("delta_qd_inf", self.delta_qd_inf),
            ("t_deco", self.t_deco),
            ("t_rel", self.t_rel),
            ("sigma_floor", self.sigma_floor),
            ("sigma_be", self.sigma_be),
            ("sigma_mb", self.sigma_mb),
            ("delta_qd_final", float(self.delta_qd_t[-1])),
        ]
        lines = [f"{name} = {value:.6f}" for name, value in rows]
        lines.append(f"regime = {self.regime}")
        lines.append(f"t_deco < t_rel = {str(self.t_deco < self.t_rel).lower()}")
        return "\n".join(lines) + "\n"


def decoherence_report(traj: Trajectory, spec: InitialStateSpec) -> DecoherenceReport:
    params, bath = traj.params, traj.bath
    sigma = traj.sigma
    regime = classify_fluctuation_regime(params, bath, float(sigma[-1]))
    return DecoherenceReport(
        times=traj.times,
        delta_qd_t=delta_qd_from_sigma(sigma, params.hbar),
        delta_qd_inf=delta_qd_infinity(bath),
        t_deco=decoherence_time_thermal(params, bath, spec),
        t_rel=relaxation_time(params),
        regime=regime.label,
        sigma_floor=regime.scales.sigma_0,
        sigma_be=regime.scales.sigma_be,
        sigma_mb=regime.scales.sigma_mb,
    )
