"""Physical parameters, thermal-bath diffusion coefficients and initial states.

Everything here is an immutable value object. Units default to the natural
choice hbar = m = omega = k = 1, but every constant may be overridden.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

# Relative slack for inclusive ">=" checks, so that exact boundary cases pass.
REL_SLACK = 1e-12


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def _finite(**values: float) -> None:
    for name, v in values.items():
        _require(math.isfinite(v), f"{name} must be finite, got {v!r}")


class ConstraintError(ValueError):
    """Raised when oscillator/bath parameters violate the positivity constraints."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        failed = "; ".join(c.describe() for c in report.checks if not c.passed)
        super().__init__(f"constraint validation failed: {failed}")


@dataclass(frozen=True)
class OscillatorParams:
    """Open oscillator: mass, frequency, friction lambda, coupling mu, hbar.

    Only basic sanity (positive m, omega, hbar and nonnegative lambda) is
    enforced here; the coupled inequalities live in :func:`validate_constraints`
    so that they can be reported instead of thrown.
    """

    omega: float = 1.0
    lam: float = 0.2
    mu: float = 0.1
    m: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        _finite(omega=self.omega, lam=self.lam, mu=self.mu, m=self.m, hbar=self.hbar)
        _require(self.m > 0, f"m must be > 0, got {self.m}")
        _require(self.omega > 0, f"omega must be > 0, got {self.omega}")
        _require(self.hbar > 0, f"hbar must be > 0, got {self.hbar}")
        _require(self.lam >= 0, f"lambda must be >= 0, got {self.lam}")

    @property
    def big_omega(self) -> float:
        """sqrt(omega^2 - mu^2); only meaningful in the underdamped regime."""
        w2 = self.omega**2 - self.mu**2
        if w2 <= 0:
            raise ValueError(f"omega^2 - mu^2 = {w2} <= 0: not underdamped")
        return math.sqrt(w2)


@dataclass(frozen=True)
class ThermalBath:
    """Bath described canonically by coth(eps), eps = hbar*omega / (2 k T).

    Build it with :meth:`from_coth` or :meth:`from_temperature`. ``temperature``
    and ``k`` are kept only for bookkeeping when the bath came from T.
    """

    coth_eps: float
    temperature: float | None = None
    k: float = 1.0

    def __post_init__(self):
        _finite(coth_eps=self.coth_eps)
        _require(self.coth_eps >= 1.0, f"coth(eps) must be >= 1, got {self.coth_eps}")

    @property
    def temperature_mode(self) -> bool:
        return self.temperature is not None

    @classmethod
    def from_coth(cls, coth_eps: float) -> "ThermalBath":
        return cls(coth_eps=float(coth_eps))

    @classmethod
    def from_temperature(cls, temperature: float, params: OscillatorParams, k: float = 1.0) -> "ThermalBath":
        _require(temperature >= 0, f"temperature must be >= 0, got {temperature}")
        _require(k > 0, f"Boltzmann constant must be > 0, got {k}")
        if temperature == 0:
            c = 1.0
        else:
            eps = params.hbar * params.omega / (2.0 * k * temperature)
            # tanh saturates to exactly 1.0 for large eps, which is the T = 0 limit
            c = 1.0 / math.tanh(eps)
        return cls(coth_eps=c, temperature=float(temperature), k=float(k))

    @property
    def eps(self) -> float:
        """hbar*omega/(2kT) recovered from coth(eps); +inf at T = 0."""
        c = self.coth_eps
        if c == 1.0:
            return math.inf
        return 0.5 * math.log1p(2.0 / (c - 1.0))


@dataclass(frozen=True)
class DiffusionCoefficients:
    d_pp: float
    d_qq: float
    d_pq: float = 0.0

    def determinant(self) -> float:
        return self.d_pp * self.d_qq - self.d_pq**2


@dataclass(frozen=True)
class InitialStateSpec:
    """Correlated coherent state: squeezing delta, correlation r, centroids."""

    delta: float = 1.0
    r: float = 0.0
    q0: float = 0.0
    p0: float = 0.0

    def __post_init__(self):
        _finite(delta=self.delta, r=self.r, q0=self.q0, p0=self.p0)
        _require(self.delta > 0, f"delta must be > 0, got {self.delta}")
        _require(abs(self.r) < 1, f"|r| must be < 1, got {self.r}")


@dataclass(frozen=True)
class GaussianState:
    """First moments and second central moments at time ``t``.

    ``t = math.inf`` marks the asymptotic state.
    """

    t: float
    mean_q: float
    mean_p: float
    var_q: float
    var_p: float
    cov_qp: float

    def __post_init__(self):
        _require(self.var_q > 0, f"var_q must be > 0, got {self.var_q}")
        _require(self.var_p > 0, f"var_p must be > 0, got {self.var_p}")

    @property
    def is_asymptotic(self) -> bool:
        return math.isinf(self.t)

    def as_vector(self) -> tuple[float, float, float, float, float]:
        return (self.mean_q, self.mean_p, self.var_q, self.var_p, self.cov_qp)


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    lhs: float
    rhs: float
    relation: str  # ">" or ">="
    passed: bool

    def describe(self) -> str:
        if self.passed:
            op = self.relation
        else:
            op = "<=" if self.relation == ">" else "<"
        return f"{self.name}: {self.lhs:.6g} {op} {self.rhs:.6g}"


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[ConstraintCheck, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __bool__(self) -> bool:
        return self.passed

    def check(self, name: str) -> ConstraintCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def format(self) -> str:
        lines = []
        for c in self.checks:
            lines.append(f"[{'pass' if c.passed else 'FAIL'}] {c.describe()}")
        return "\n".join(lines)


def _geq(a: float, b: float) -> bool:
    return a >= b - REL_SLACK * max(abs(a), abs(b))


def _raw_coefficients(params: OscillatorParams, bath: ThermalBath) -> DiffusionCoefficients:
    c = bath.coth_eps
    mw = params.m * params.omega
    return DiffusionCoefficients(
        d_pp=0.5 * (params.lam + params.mu) * params.hbar * mw * c,
        d_qq=0.5 * (params.lam - params.mu) * params.hbar / mw * c,
        d_pq=0.0,
    )


def validate_constraints(params: OscillatorParams, bath: ThermalBath) -> ValidationReport:
    """Run every positivity/underdamping check and report each one."""
    lam, mu, c = params.lam, params.mu, bath.coth_eps
    coeffs = _raw_coefficients(params, bath)
    gibbs_lhs = (lam**2 - mu**2) * c**2
    gibbs_rhs = lam**2
    det_rhs = lam**2 * params.hbar**2 / 4.0
    checks = (
        ConstraintCheck("lambda > mu", lam, mu, ">", lam > mu),
        ConstraintCheck("lambda > -mu", lam, -mu, ">", lam > -mu),
        ConstraintCheck("omega > |mu|", params.omega, abs(mu), ">", params.omega > abs(mu)),
        ConstraintCheck(
            "(lambda^2 - mu^2) coth^2(eps) >= lambda^2",
            gibbs_lhs, gibbs_rhs, ">=", _geq(gibbs_lhs, gibbs_rhs),
        ),
        ConstraintCheck(
            "D_pp D_qq - D_pq^2 >= lambda^2 hbar^2 / 4",
            coeffs.determinant(), det_rhs, ">=", _geq(coeffs.determinant(), det_rhs),
        ),
    )
    return ValidationReport(checks)


def thermal_coefficients(params: OscillatorParams, bath: ThermalBath, check: bool = True) -> DiffusionCoefficients:
    """Diffusion coefficients whose asymptotic state is the Gibbs state of H0.

    With ``check=False`` the lambda > |mu| requirement is skipped; this is only
    meant for the closed-system test mode (lambda = mu = 0 gives all D = 0).
    """
    if check and not params.lam > abs(params.mu):
        raise ConstraintError(
            ValidationReport(validate_constraints(params, bath).checks[:2])
        )
    return _raw_coefficients(params, bath)


def initial_covariance(spec: InitialStateSpec, params: OscillatorParams) -> GaussianState:
    hbar, mw = params.hbar, params.m * params.omega
    one_minus_r2 = 1.0 - spec.r**2
    return GaussianState(
        t=0.0,
        mean_q=spec.q0,
        mean_p=spec.p0,
        var_q=hbar * spec.delta / (2.0 * mw),
        var_p=hbar * mw / (2.0 * spec.delta * one_minus_r2),
        cov_qp=hbar * spec.r / (2.0 * math.sqrt(one_minus_r2)),
    )


def generalized_uncertainty(state: GaussianState) -> float:
    """Schrodinger-Robertson determinant var_q*var_p - cov_qp^2."""
    return state.var_q * state.var_p - state.cov_qp**2
