import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscdeco.model import (
    ConstraintError,
    GaussianState,
    InitialStateSpec,
    OscillatorParams,
    ThermalBath,
    generalized_uncertainty,
    initial_covariance,
    thermal_coefficients,
    validate_constraints,
)


@pytest.mark.parametrize(
    "kw, coth, expected",
    [
        (dict(lam=0.2, mu=0.1), 1.5, (0.225, 0.075)),
        (dict(lam=0.2, mu=0.0), 1.0, (0.1, 0.1)),
        (dict(lam=0.3, mu=0.1, m=2.0, omega=0.5), 2.0, (0.4, 0.2)),
    ],
)
def test_thermal_coefficients(kw, coth, expected):
    c = thermal_coefficients(OscillatorParams(**kw), ThermalBath.from_coth(coth))
    assert c.d_pp == pytest.approx(expected[0], rel=1e-14)
    assert c.d_qq == pytest.approx(expected[1], rel=1e-14)
    assert c.d_pq == 0.0


def test_thermal_coefficients_reject_ordering():
    with pytest.raises(ConstraintError, match="lambda > mu"):
        thermal_coefficients(OscillatorParams(lam=0.1, mu=0.2), ThermalBath.from_coth(2.0))
    with pytest.raises(ConstraintError):
        thermal_coefficients(OscillatorParams(lam=0.1, mu=-0.1), ThermalBath.from_coth(2.0))


def test_validate_pass_and_fail_values():
    p = OscillatorParams(lam=0.2, mu=0.1)
    ok = validate_constraints(p, ThermalBath.from_coth(1.5))
    assert ok.passed
    gibbs = ok.check("(lambda^2 - mu^2) coth^2(eps) >= lambda^2")
    assert gibbs.lhs == pytest.approx(0.0675) and gibbs.rhs == pytest.approx(0.04)
    assert "0.0675 >= 0.04" in gibbs.describe()

    bad = validate_constraints(p, ThermalBath.from_coth(1.0))
    assert not bad.passed
    gibbs = bad.check("(lambda^2 - mu^2) coth^2(eps) >= lambda^2")
    assert not gibbs.passed
    assert "0.03 < 0.04" in gibbs.describe()


def test_validate_ordering_violation_is_reported():
    rep = validate_constraints(OscillatorParams(lam=0.1, mu=0.2), ThermalBath.from_coth(3.0))
    assert not rep.passed
    assert not rep.check("lambda > mu").passed
    assert rep.check("lambda > -mu").passed


def test_validate_underdamped():
    rep = validate_constraints(OscillatorParams(omega=0.5, lam=1.0, mu=0.6), ThermalBath.from_coth(5.0))
    assert not rep.check("omega > |mu|").passed


def test_boundary_equality_passes():
    # (lam^2 - mu^2) c^2 == lam^2 exactly
    lam, mu = 0.5, 0.3
    c = lam / math.sqrt(lam**2 - mu**2)
    assert validate_constraints(OscillatorParams(lam=lam, mu=mu), ThermalBath.from_coth(c)).passed


@pytest.mark.parametrize(
    "delta, r, expected",
    [
        (1.0, 0.0, (0.5, 0.5, 0.0)),
        (2.0, 0.5, (1.0, 1.0 / 3.0, 0.5 / (2 * math.sqrt(0.75)))),
        (0.5, 0.0, (0.25, 1.0, 0.0)),
    ],
)
def test_initial_covariance(delta, r, expected):
    s = initial_covariance(InitialStateSpec(delta=delta, r=r, q0=0.3, p0=-0.2), OscillatorParams())
    assert (s.var_q, s.var_p, s.cov_qp) == pytest.approx(expected, rel=1e-14, abs=1e-15)
    assert (s.mean_q, s.mean_p, s.t) == (0.3, -0.2, 0.0)
    assert generalized_uncertainty(s) == pytest.approx(0.25, rel=1e-13)


def test_initial_spec_rejections():
    with pytest.raises(ValueError):
        InitialStateSpec(delta=0.0)
    with pytest.raises(ValueError):
        InitialStateSpec(r=1.0)
    with pytest.raises(ValueError):
        InitialStateSpec(r=-1.2)


def test_generalized_uncertainty_examples():
    assert generalized_uncertainty(GaussianState(0, 0, 0, 0.75, 0.75, 0.0)) == pytest.approx(1.5**2 / 4)
    assert generalized_uncertainty(GaussianState(0, 0, 0, 1.0, 1 / 3, 0.288675134595)) == pytest.approx(0.25, abs=1e-12)


def test_params_sanity():
    with pytest.raises(ValueError):
        OscillatorParams(m=0.0)
    with pytest.raises(ValueError):
        OscillatorParams(omega=-1.0)
    with pytest.raises(ValueError):
        OscillatorParams(hbar=0.0)
    with pytest.raises(ValueError):
        OscillatorParams(lam=-0.1)
    # negative mu is allowed
    assert validate_constraints(OscillatorParams(lam=0.2, mu=-0.1), ThermalBath.from_coth(1.5)).passed


def test_bath_from_temperature():
    p = OscillatorParams(omega=2.0, hbar=1.0)
    b = ThermalBath.from_temperature(0.7, p, k=1.3)
    eps = 2.0 / (2 * 1.3 * 0.7)
    assert b.coth_eps == pytest.approx(1 / math.tanh(eps), rel=1e-14)
    assert b.temperature_mode
    assert b.eps == pytest.approx(eps, rel=1e-12)
    assert ThermalBath.from_temperature(0.0, p).coth_eps == 1.0
    assert ThermalBath.from_coth(1.0).eps == math.inf
    with pytest.raises(ValueError):
        ThermalBath.from_coth(0.99)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(-0.999, 0.999), st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.1, 3))
def test_minimum_uncertainty_property(delta, r, m, omega, hbar):
    s = initial_covariance(InitialStateSpec(delta=delta, r=r), OscillatorParams(m=m, omega=omega, hbar=hbar))
    assert generalized_uncertainty(s) == pytest.approx(hbar**2 / 4, rel=1e-12)


@settings(max_examples=300, deadline=None)
@given(st.floats(0.01, 5), st.floats(-0.99, 0.99), st.floats(1.0, 50.0), st.floats(0.1, 5), st.floats(0.2, 3))
def test_gibbs_and_determinant_checks_agree(lam, mu_frac, coth, m, hbar):
    p = OscillatorParams(lam=lam, mu=mu_frac * lam, m=m, hbar=hbar, omega=10.0)
    rep = validate_constraints(p, ThermalBath.from_coth(coth))
    gibbs = rep.check("(lambda^2 - mu^2) coth^2(eps) >= lambda^2").passed
    det = rep.check("D_pp D_qq - D_pq^2 >= lambda^2 hbar^2 / 4").passed
    assert gibbs == det


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 5), st.floats(-0.99, 0.99), st.floats(1.0, 20.0), st.floats(0.0, 20.0))
def test_validation_monotone_in_coth(lam, mu_frac, c, bump):
    p = OscillatorParams(lam=lam, mu=mu_frac * lam, omega=10.0)
    if validate_constraints(p, ThermalBath.from_coth(c)).passed:
        assert validate_constraints(p, ThermalBath.from_coth(c + bump)).passed


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 1e4))
def test_coth_at_least_one(temperature):
    b = ThermalBath.from_temperature(temperature, OscillatorParams())
    assert b.coth_eps >= 1.0


def test_coth_tends_to_one_at_low_temperature():
    p = OscillatorParams()
    vals = [ThermalBath.from_temperature(t, p).coth_eps for t in (1.0, 0.3, 0.1, 0.01)]
    assert vals == sorted(vals, reverse=True)
    assert vals[-1] == 1.0
