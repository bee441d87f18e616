import numpy as np
import pytest

from oscdeco.model import InitialStateSpec, OscillatorParams, ThermalBath, thermal_coefficients

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def params():
    return OscillatorParams(omega=1.0, lam=0.2, mu=0.1)


@pytest.fixture
def bath():
    return ThermalBath.from_coth(1.5)


@pytest.fixture
def spec():
    return InitialStateSpec(delta=1.0, r=0.0)


@pytest.fixture
def coeffs(params, bath):
    return thermal_coefficients(params, bath)


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


def random_valid_set(rng):
    """Random (params, bath, spec) satisfying every constraint."""
    omega = rng.uniform(0.5, 2.0)
    lam = rng.uniform(0.1, 1.0)
    mu = rng.uniform(-0.9, 0.9) * min(lam, omega)
    params = OscillatorParams(omega=omega, lam=lam, mu=mu, m=rng.uniform(0.5, 2.0), hbar=rng.uniform(0.5, 2.0))
    c_min = lam / np.sqrt(lam**2 - mu**2)
    bath = ThermalBath.from_coth(c_min * rng.uniform(1.0, 3.0))
    spec = InitialStateSpec(
        delta=rng.uniform(0.1, 10.0), r=rng.uniform(-0.99, 0.99), q0=rng.uniform(-1, 1), p0=rng.uniform(-1, 1)
    )
    return params, bath, spec


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
