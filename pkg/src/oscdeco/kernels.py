"""Hot inner loops, each with a numba and a pure-numpy implementation.

The backend is picked once at import time from the ``OSCDECO_BACKEND``
environment variable (``numba`` or ``numpy``); ``OSCDECO_DISABLE_NUMBA=1`` is
accepted as a shorthand for ``numpy``. If numba cannot be imported the numpy
path is used silently. :func:`set_backend` switches at runtime (tests and the
benchmark use it).

Moment vector layout everywhere: ``(mean_q, mean_p, var_q, var_p, cov_qp)``.
Moment coefficient layout: ``(1/m, m*omega^2, lambda, mu, d_qq, d_pp, d_pq)``.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

BACKENDS = ("numba", "numpy")


def _initial_backend() -> str:
    if numba is None:
        return "numpy"
    if os.environ.get("OSCDECO_DISABLE_NUMBA", "").strip() not in ("", "0"):
        return "numpy"
    name = os.environ.get("OSCDECO_BACKEND", "numba").strip().lower()
    if name not in BACKENDS:
        raise ValueError(f"OSCDECO_BACKEND must be one of {BACKENDS}, got {name!r}")
    return name


_backend = _initial_backend()


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}, got {name!r}")
    if name == "numba" and numba is None:
        raise RuntimeError("numba is not installed")
    _backend = name


def _maybe_njit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=True)(fn)


# --- Gaussian moment equations -------------------------------------------------


def moment_rhs(y, k, out):
    """Time derivatives of the five moments; writes into ``out``."""
    inv_m, mw2, lam, mu, d_qq, d_pp, d_pq = k[0], k[1], k[2], k[3], k[4], k[5], k[6]
    mq, mp, vq, vp, c = y[0], y[1], y[2], y[3], y[4]
    out[0] = mp * inv_m - (lam - mu) * mq
    out[1] = -mw2 * mq - (lam + mu) * mp
    out[2] = -2.0 * (lam - mu) * vq + 2.0 * inv_m * c + 2.0 * d_qq
    out[3] = -2.0 * (lam + mu) * vp - 2.0 * mw2 * c + 2.0 * d_pp
    out[4] = -2.0 * lam * c + vp * inv_m - mw2 * vq + 2.0 * d_pq
    return out


_moment_rhs_nb = _maybe_njit(moment_rhs)


def _rk4_moments_loop(y0, k, dt, n_steps, stride):
    n_out = n_steps // stride + 1
    out = np.empty((n_out, 5))
    y = y0.copy()
    k1 = np.empty(5)
    k2 = np.empty(5)
    k3 = np.empty(5)
    k4 = np.empty(5)
    tmp = np.empty(5)
    out[0, :] = y
    j = 1
    for step in range(1, n_steps + 1):
        _moment_rhs_nb(y, k, k1)
        for i in range(5):
            tmp[i] = y[i] + 0.5 * dt * k1[i]
        _moment_rhs_nb(tmp, k, k2)
        for i in range(5):
            tmp[i] = y[i] + 0.5 * dt * k2[i]
        _moment_rhs_nb(tmp, k, k3)
        for i in range(5):
            tmp[i] = y[i] + dt * k3[i]
        _moment_rhs_nb(tmp, k, k4)
        for i in range(5):
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        if step % stride == 0:
            out[j, :] = y
            j += 1
    return out


_rk4_moments_nb = _maybe_njit(_rk4_moments_loop)


def affine_generator(k):
    """Matrix A and offset b with moment_rhs(y) = A @ y + b."""
    k = np.asarray(k, dtype=float)
    b = moment_rhs(np.zeros(5), k, np.empty(5))
    a = np.empty((5, 5))
    for j in range(5):
        e = np.zeros(5)
        e[j] = 1.0
        a[:, j] = moment_rhs(e, k, np.empty(5)) - b
    return a, b


def rk4_step_map(k, dt):
    """One classical RK4 step for a linear autonomous ODE, as y -> M @ y + c."""
    a, b = affine_generator(k)
    ha = dt * a
    eye = np.eye(5)
    ha2 = ha @ ha
    ha3 = ha2 @ ha
    m = eye + ha + ha2 / 2.0 + ha3 / 6.0 + ha3 @ ha / 24.0
    c = dt * (eye + ha / 2.0 + ha2 / 6.0 + ha3 / 24.0) @ b
    return m, c


def _rk4_moments_numpy(y0, k, dt, n_steps, stride):
    m, c = rk4_step_map(k, dt)
    mt = np.ascontiguousarray(m.T)
    n_out = n_steps // stride + 1
    out = np.empty((n_out, 5))
    y = np.array(y0, dtype=float)
    out[0] = y
    j = 1
    for step in range(1, n_steps + 1):
        y = y @ mt + c
        if step % stride == 0:
            out[j] = y
            j += 1
    return out


def rk4_moments(y0, k, dt: float, n_steps: int, stride: int = 1, backend: str | None = None) -> np.ndarray:
    """Fixed-step RK4 of the moment equations; returns every ``stride``-th state.

    Output has ``n_steps // stride + 1`` rows, the first being ``y0``.
    """
    y0 = np.ascontiguousarray(y0, dtype=np.float64)
    k = np.ascontiguousarray(k, dtype=np.float64)
    backend = backend or _backend
    if backend == "numba":
        return _rk4_moments_nb(y0, k, float(dt), int(n_steps), int(stride))
    return _rk4_moments_numpy(y0, k, float(dt), int(n_steps), int(stride))


# --- Truncated Fock-space master equation ------------------------------------
#
# The master equation is linear in rho and can be regrouped as
#     drho/dt = K rho + rho K^dag + (q rho) R1 + (p rho) R2
# which costs six matrix products per evaluation. ``fock.factored_generator``
# builds K, R1, R2; ``fock.lindblad_rhs`` is the term-by-term reference.


def _lindblad_factored(rho, kop, kop_h, q, p, r1, r2):
    return kop @ rho + rho @ kop_h + (q @ rho) @ r1 + (p @ rho) @ r2


def _rk4_lindblad_loop(rho, kop, kop_h, q, p, r1, r2, dt, n_steps):
    y = rho.copy()
    for _ in range(n_steps):
        k1 = _lindblad_factored(y, kop, kop_h, q, p, r1, r2)
        k2 = _lindblad_factored(y + (0.5 * dt) * k1, kop, kop_h, q, p, r1, r2)
        k3 = _lindblad_factored(y + (0.5 * dt) * k2, kop, kop_h, q, p, r1, r2)
        k4 = _lindblad_factored(y + dt * k3, kop, kop_h, q, p, r1, r2)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


if numba is not None:
    _lindblad_factored_nb = numba.njit(cache=True)(_lindblad_factored)

    @numba.njit(cache=True)
    def _rk4_lindblad_nb(rho, kop, kop_h, q, p, r1, r2, dt, n_steps):
        y = rho.copy()
        for _ in range(n_steps):
            k1 = _lindblad_factored_nb(y, kop, kop_h, q, p, r1, r2)
            k2 = _lindblad_factored_nb(y + (0.5 * dt) * k1, kop, kop_h, q, p, r1, r2)
            k3 = _lindblad_factored_nb(y + (0.5 * dt) * k2, kop, kop_h, q, p, r1, r2)
            k4 = _lindblad_factored_nb(y + dt * k3, kop, kop_h, q, p, r1, r2)
            y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return y
else:  # pragma: no cover
    _rk4_lindblad_nb = _rk4_lindblad_loop


def rk4_lindblad(rho, generator, dt: float, n_steps: int, backend: str | None = None) -> np.ndarray:
    """Advance a density matrix ``n_steps`` RK4 steps under a factored generator.

    ``generator`` is the tuple ``(K, K^dag, q, p, R1, R2)`` of complex arrays.
    """
    ops = tuple(np.ascontiguousarray(g, dtype=np.complex128) for g in generator)
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    backend = backend or _backend
    if n_steps == 0:
        return rho.copy()
    if backend == "numba":
        return _rk4_lindblad_nb(rho, *ops, float(dt), int(n_steps))
    return _rk4_lindblad_loop(rho, *ops, float(dt), int(n_steps))
