"""Decoherence of a damped harmonic oscillator in a thermal bath.

Gaussian-state moment evolution, closed-form uncertainty function,
decoherence metrics, coordinate density matrices, and a truncated
number-basis master-equation integrator used as an independent check.
"""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    ConstraintError,
    DiffusionCoefficients,
    GaussianState,
    InitialStateSpec,
    OscillatorParams,
    ThermalBath,
    ValidationReport,
    generalized_uncertainty,
    initial_covariance,
    thermal_coefficients,
    validate_constraints,
)
from .evolution import (  # noqa: E402
    IntegratorConfig,
    Trajectory,
    asymptotic_state,
    integrate,
    moment_ode_rhs,
    sigma_closed_form,
)
from .decoherence import (  # noqa: E402
    DecoherenceReport,
    classify_fluctuation_regime,
    decoherence_report,
    decoherence_time,
    decoherence_time_thermal,
    delta_qd,
    delta_qd_infinity,
    offdiagonal_decay_factor,
    relaxation_time,
)
