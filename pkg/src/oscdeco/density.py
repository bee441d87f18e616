"""Coordinate-representation density matrices of Gaussian states."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    GaussianState,
    InitialStateSpec,
    OscillatorParams,
    ThermalBath,
    generalized_uncertainty,
    initial_covariance,
)

FIT_FLOOR = 1e-12


@dataclass(frozen=True)
class CoordinateGrid:
    q_min: float = -5.0
    q_max: float = 5.0
    n: int = 101

    def __post_init__(self):
        if not self.q_min < self.q_max:
            raise ValueError(f"grid needs q_min < q_max, got [{self.q_min}, {self.q_max}]")
        if self.n < 2:
            raise ValueError(f"grid needs n >= 2, got {self.n}")

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.q_min, self.q_max, self.n)

    @property
    def step(self) -> float:
        return (self.q_max - self.q_min) / (self.n - 1)

    @classmethod
    def around(cls, state: GaussianState, n: int = 101, n_std: float = 6.0) -> "CoordinateGrid":
        """Grid centred on the mean position spanning +/- n_std standard deviations."""
        half = n_std * math.sqrt(state.var_q)
        return cls(state.mean_q - half, state.mean_q + half, n)


@dataclass(frozen=True)
class DensityMatrixGrid:
    grid: CoordinateGrid
    values: np.ndarray  # values[i, j] = rho(q_i, q_j)
    t: float

    def trace(self) -> float:
        """Trapezoidal quadrature of the diagonal."""
        return float(np.trapezoid(np.real(np.diag(self.values)), dx=self.grid.step))


@dataclass(frozen=True)
class SigmaDeltaCoefficients:
    alpha: float
    gamma: float
    beta: float


def initial_wavefunction(spec: InitialStateSpec, params: OscillatorParams, q):
    """Correlated coherent state amplitude Psi(q); accepts scalar or array q."""
    hbar = params.hbar
    s0 = initial_covariance(spec, params)
    q = np.asarray(q, dtype=float)
    x = q - spec.q0
    expo = -(1.0 - 2j * s0.cov_qp / hbar) * x * x / (4.0 * s0.var_q) + 1j * spec.p0 * q / hbar
    psi = (2.0 * math.pi * s0.var_q) ** -0.25 * np.exp(expo)
    return complex(psi) if psi.ndim == 0 else psi


def sigma_delta_coefficients(state: GaussianState, hbar: float = 1.0) -> SigmaDeltaCoefficients:
    vq = state.var_q
    return SigmaDeltaCoefficients(
        alpha=1.0 / (2.0 * vq),
        gamma=generalized_uncertainty(state) / (2.0 * hbar**2 * vq),
        beta=state.cov_qp / (hbar * vq),
    )


def rho_gaussian(state: GaussianState, q, qp, hbar: float = 1.0):
    """<q|rho|q'> of a Gaussian state, broadcasting over q and q'."""
    q = np.asarray(q, dtype=float)
    qp = np.asarray(qp, dtype=float)
    vq = state.var_q
    sig = generalized_uncertainty(state)
    s = 0.5 * (q + qp) - state.mean_q
    d = q - qp
    expo = (
        -s * s / (2.0 * vq)
        - sig * d * d / (2.0 * hbar**2 * vq)
        + 1j * state.cov_qp * s * d / (hbar * vq)
        + 1j * state.mean_p * d / hbar
    )
    return (2.0 * math.pi * vq) ** -0.5 * np.exp(expo)


def rho_sigma_delta(state: GaussianState, big_sigma, big_delta, hbar: float = 1.0):
    """Same density matrix in centre/separation variables, via alpha, beta, gamma."""
    c = sigma_delta_coefficients(state, hbar)
    s = np.asarray(big_sigma, dtype=float)
    d = np.asarray(big_delta, dtype=float)
    mq, mp = state.mean_q, state.mean_p
    expo = (
        -c.alpha * s * s
        - c.gamma * d * d
        + 1j * c.beta * s * d
        + 2.0 * c.alpha * mq * s
        + 1j * (mp / hbar - c.beta * mq) * d
        - c.alpha * mq * mq
    )
    return math.sqrt(c.alpha / math.pi) * np.exp(expo)


def evaluate_rho(state: GaussianState, grid: CoordinateGrid, hbar: float = 1.0) -> DensityMatrixGrid:
    q = grid.points
    values = rho_gaussian(state, q[:, None], q[None, :], hbar)
    return DensityMatrixGrid(grid, values, state.t)


def steady_state_rho(params: OscillatorParams, bath: ThermalBath, grid: CoordinateGrid) -> DensityMatrixGrid:
    mw_h = params.m * params.omega / params.hbar
    c = bath.coth_eps
    q = grid.points
    s = q[:, None] + q[None, :]
    d = q[:, None] - q[None, :]
    values = math.sqrt(mw_h / (math.pi * c)) * np.exp(-mw_h / 4.0 * (s * s / c + d * d * c))
    return DensityMatrixGrid(grid, values.astype(complex), math.inf)


def _quadratic_coefficient(x: np.ndarray, y: np.ndarray) -> float:
    mag = np.abs(y)
    keep = mag > FIT_FLOOR
    if keep.sum() < 3:
        raise ValueError("too few grid samples above the fit floor")
    return float(np.polyfit(x[keep], np.log(mag[keep]), 2)[0])


def fit_gaussian_widths(rho: DensityMatrixGrid) -> SigmaDeltaCoefficients:
    """Recover alpha and gamma from a sampled density matrix.

    alpha comes from the diagonal rho(Sigma, 0) and gamma from the
    anti-diagonal, where Sigma is fixed and only Delta varies. beta is not
    recoverable from moduli and is returned as NaN.
    """
    q = rho.grid.points
    v = rho.values
    idx = np.arange(len(q))
    alpha = -_quadratic_coefficient(q, v[idx, idx])
    anti = idx[::-1]
    gamma = -_quadratic_coefficient(q - q[anti], v[idx, anti])
    return SigmaDeltaCoefficients(alpha=alpha, gamma=gamma, beta=math.nan)


def fitted_delta_qd(rho: DensityMatrixGrid) -> float:
    """Ratio of the off-diagonal to diagonal widths, from a fit to the grid."""
    c = fit_gaussian_widths(rho)
    return 0.5 * math.sqrt(c.alpha / c.gamma)
