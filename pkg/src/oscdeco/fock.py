"""Brute-force check: the master equation integrated in a truncated number basis.

Operators are dense ``N x N`` complex matrices built from the ladder
operators, so results carry truncation artifacts in the last couple of
basis states. Every entry point that can silently go wrong because of this
watches the occupation of the two highest levels and raises
:class:`TruncationBreach` instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .density import initial_wavefunction
from .evolution import IntegratorConfig, check_step_size
from .model import (
    DiffusionCoefficients,
    InitialStateSpec,
    OscillatorParams,
    ThermalBath,
    initial_covariance,
)

INITIAL_TOP_OCCUPATION = 1e-10
BREACH_OCCUPATION = 1e-6


class TruncationBreach(RuntimeError):
    def __init__(self, t: float, occupation: float, threshold: float):
        self.t = t
        self.occupation = occupation
        self.threshold = threshold
        super().__init__(
            f"truncation breach at t={t:.6g}: top-two-level occupation "
            f"{occupation:.3e} exceeds {threshold:.1e}"
        )


@dataclass(frozen=True, eq=False)
class TruncatedBasis:
    dim: int
    q_op: np.ndarray
    p_op: np.ndarray
    h0_op: np.ndarray
    params: OscillatorParams

    @property
    def q2(self) -> np.ndarray:
        return self.q_op @ self.q_op

    @property
    def p2(self) -> np.ndarray:
        return self.p_op @ self.p_op

    @property
    def qp_sym(self) -> np.ndarray:
        return 0.5 * (self.q_op @ self.p_op + self.p_op @ self.q_op)


@dataclass(frozen=True, eq=False)
class FockDensityMatrix:
    values: np.ndarray
    t: float = 0.0
    norm_defect: float = 0.0

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.values))

    def top_occupation(self) -> float:
        d = np.real(np.diag(self.values))
        return float(d[-1] + d[-2])


def lowering_operator(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def build_basis(params: OscillatorParams, dim: int) -> TruncatedBasis:
    if dim < 4:
        raise ValueError(f"basis dimension must be >= 4, got {dim}")
    a = lowering_operator(dim)
    ad = a.conj().T
    hbar, m, w = params.hbar, params.m, params.omega
    q = math.sqrt(hbar / (2.0 * m * w)) * (a + ad)
    p = 1j * math.sqrt(hbar * m * w / 2.0) * (ad - a)
    h0 = p @ p / (2.0 * m) + 0.5 * m * w * w * (q @ q)
    return TruncatedBasis(dim, q, p, h0, params)


def hermite_functions(dim: int, xi: np.ndarray) -> np.ndarray:
    """Normalized Hermite functions h_0..h_{dim-1} at dimensionless points xi.

    Upward three-term recurrence on the normalized functions, so no
    factorials appear.
    """
    xi = np.asarray(xi, dtype=float)
    out = np.empty((dim, xi.size))
    out[0] = math.pi**-0.25 * np.exp(-0.5 * xi * xi)
    if dim > 1:
        out[1] = math.sqrt(2.0) * xi * out[0]
    for n in range(1, dim - 1):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * xi * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def _check_top(rho: np.ndarray, t: float, threshold: float) -> float:
    d = np.real(np.diag(rho))
    occ = float(d[-1] + d[-2])
    if occ > threshold:
        raise TruncationBreach(t, occ, threshold)
    return occ


def project_initial_state(
    spec: InitialStateSpec,
    params: OscillatorParams,
    basis: TruncatedBasis,
    max_top_occupation: float = INITIAL_TOP_OCCUPATION,
    n_quad: int = 8193,
) -> FockDensityMatrix:
    """Expand the correlated coherent state in the number basis.

    Coefficients are overlap integrals evaluated by the trapezoidal rule on a
    wide uniform grid in the dimensionless coordinate; for these smooth,
    Gaussian-decaying integrands that rule converges spectrally.
    """
    n = basis.dim
    scale = math.sqrt(params.hbar / (params.m * params.omega))
    s0 = initial_covariance(spec, params)
    xi0 = spec.q0 / scale
    width = math.sqrt(s0.var_q) / scale
    half = max(math.sqrt(2.0 * n + 1.0) + 10.0, abs(xi0) + 14.0 * max(width, 1.0))
    xi = np.linspace(-half, half, n_quad)
    psi = initial_wavefunction(spec, params, xi * scale)
    phi = hermite_functions(n, xi)
    dxi = xi[1] - xi[0]
    c = math.sqrt(scale) * np.trapezoid(phi * psi[None, :], dx=dxi, axis=1)
    norm = float(np.vdot(c, c).real)
    rho = np.outer(c, c.conj()) / norm
    _check_top(rho, 0.0, max_top_occupation)
    return FockDensityMatrix(rho, 0.0, norm_defect=1.0 - norm)


def thermal_state(params: OscillatorParams, bath: ThermalBath, basis: TruncatedBasis) -> FockDensityMatrix:
    """Gibbs state of H0, renormalized on the truncated basis."""
    c = bath.coth_eps
    x = (c - 1.0) / (c + 1.0)  # exp(-hbar omega / kT)
    pops = x ** np.arange(basis.dim, dtype=float)
    total = pops.sum()
    return FockDensityMatrix(np.diag(pops / total).astype(complex), math.inf, norm_defect=0.0)


def _comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def lindblad_rhs(
    rho, basis: TruncatedBasis, params: OscillatorParams, coeffs: DiffusionCoefficients
) -> np.ndarray:
    """drho/dt written term by term as commutators; the reference form."""
    rho = rho.values if isinstance(rho, FockDensityMatrix) else np.asarray(rho)
    q, p, h0 = basis.q_op, basis.p_op, basis.h0_op
    hbar, lam, mu = params.hbar, params.lam, params.mu
    hb2 = hbar * hbar
    out = -1j / hbar * _comm(h0, rho)
    out = out - 1j / (2.0 * hbar) * (lam + mu) * _comm(q, rho @ p + p @ rho)
    out = out + 1j / (2.0 * hbar) * (lam - mu) * _comm(p, rho @ q + q @ rho)
    out = out - coeffs.d_pp / hb2 * _comm(q, _comm(q, rho))
    out = out - coeffs.d_qq / hb2 * _comm(p, _comm(p, rho))
    out = out + coeffs.d_pq / hb2 * (_comm(q, _comm(p, rho)) + _comm(p, _comm(q, rho)))
    return out


def factored_generator(basis: TruncatedBasis, params: OscillatorParams, coeffs: DiffusionCoefficients):
    """(K, K^dag, q, p, R1, R2) with drho/dt = K rho + rho K^dag + q rho R1 + p rho R2."""
    q, p = basis.q_op, basis.p_op
    hbar, lam, mu = params.hbar, params.lam, params.mu
    hb2 = hbar * hbar
    qp, pq = q @ p, p @ q
    kop = (
        -1j / hbar * basis.h0_op
        - 1j / (2.0 * hbar) * (lam + mu) * qp
        + 1j / (2.0 * hbar) * (lam - mu) * pq
        - coeffs.d_pp / hb2 * (q @ q)
        - coeffs.d_qq / hb2 * (p @ p)
        + coeffs.d_pq / hb2 * (qp + pq)
    )
    a = -1j * lam / hbar - 2.0 * coeffs.d_pq / hb2  # q rho p
    b = 1j * lam / hbar - 2.0 * coeffs.d_pq / hb2  # p rho q
    c = 2.0 * coeffs.d_pp / hb2  # q rho q
    d = 2.0 * coeffs.d_qq / hb2  # p rho p
    r1 = a * p + c * q
    r2 = b * q + d * p
    return (kop, kop.conj().T.copy(), q, p, r1, r2)


def _expect(rho: np.ndarray, op: np.ndarray) -> complex:
    # Tr(rho op) without forming the product
    return complex(np.sum(rho * op.T))


def fock_moments(rho, basis: TruncatedBasis) -> np.ndarray:
    """(mean_q, mean_p, var_q, var_p, cov_qp) of a number-basis density matrix."""
    rho = rho.values if isinstance(rho, FockDensityMatrix) else np.asarray(rho)
    mq = _expect(rho, basis.q_op).real
    mp = _expect(rho, basis.p_op).real
    vq = _expect(rho, basis.q2).real - mq * mq
    vp = _expect(rho, basis.p2).real - mp * mp
    c = _expect(rho, basis.qp_sym).real - mq * mp
    return np.array([mq, mp, vq, vp, c])


def moment_derivatives(drho: np.ndarray, rho, basis: TruncatedBasis) -> np.ndarray:
    """Time derivatives of the five moments implied by a given drho/dt."""
    rho = rho.values if isinstance(rho, FockDensityMatrix) else np.asarray(rho)
    mq, mp = _expect(rho, basis.q_op).real, _expect(rho, basis.p_op).real
    dmq = _expect(drho, basis.q_op).real
    dmp = _expect(drho, basis.p_op).real
    dvq = _expect(drho, basis.q2).real - 2.0 * mq * dmq
    dvp = _expect(drho, basis.p2).real - 2.0 * mp * dmp
    dc = _expect(drho, basis.qp_sym).real - mq * dmp - mp * dmq
    return np.array([dmq, dmp, dvq, dvp, dc])


@dataclass(frozen=True, eq=False)
class OracleRun:
    times: np.ndarray
    moments: np.ndarray
    traces: np.ndarray
    spot_checks: list[tuple[float, float]] = field(default_factory=list)
    max_top_occupation: float = 0.0
    max_hermiticity_error: float = 0.0
    final: FockDensityMatrix | None = None

    @property
    def sigma(self) -> np.ndarray:
        return self.moments[:, 2] * self.moments[:, 3] - self.moments[:, 4] ** 2

    @property
    def trace_drift(self) -> float:
        return float(np.max(np.abs(self.traces - self.traces[0])))

    @property
    def min_eigenvalue(self) -> float:
        return min(e for _, e in self.spot_checks)


def integrate_oracle(
    rho0: FockDensityMatrix,
    basis: TruncatedBasis,
    params: OscillatorParams,
    coeffs: DiffusionCoefficients,
    cfg: IntegratorConfig,
    breach_threshold: float = BREACH_OCCUPATION,
    n_spot_checks: int = 5,
) -> OracleRun:
    """RK4 in matrix space; moments, trace and truncation guard at each sample."""
    check_step_size(params, cfg.dt)
    gen = factored_generator(basis, params, coeffs)
    times = cfg.sample_times()
    n_samples = len(times)
    spot = set(np.unique(np.linspace(0, n_samples - 1, n_spot_checks).round().astype(int)).tolist())
    moments = np.empty((n_samples, 5))
    traces = np.empty(n_samples)
    checks: list[tuple[float, float]] = []
    rho = np.array(rho0.values, dtype=complex)
    top = herm = 0.0
    for i, t in enumerate(times):
        if i > 0:
            rho = kernels.rk4_lindblad(rho, gen, cfg.dt, cfg.sample_stride)
        top = max(top, _check_top(rho, float(t), breach_threshold))
        herm = max(herm, float(np.max(np.abs(rho - rho.conj().T))))
        moments[i] = fock_moments(rho, basis)
        traces[i] = np.trace(rho).real
        if i in spot:
            hermitian = 0.5 * (rho + rho.conj().T)
            checks.append((float(t), float(np.linalg.eigvalsh(hermitian)[0])))
    return OracleRun(
        times=times,
        moments=moments,
        traces=traces,
        spot_checks=checks,
        max_top_occupation=top,
        max_hermiticity_error=herm,
        final=FockDensityMatrix(rho, float(times[-1])),
    )
