import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscdeco.cli import main, read_csv, read_rho_grid
from oscdeco.config import ConfigError, RunConfig, format_config, parse_config

BASELINE = """\
# baseline
oscillator.m = 1
oscillator.omega = 1
oscillator.lambda = 0.2
oscillator.mu = 0.1
oscillator.hbar = 1
bath.coth_eps = 1.5
state.delta = 1
state.r = 0
integrator.dt = 0.001
integrator.t_end = 25
integrator.sample_stride = 100
"""


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def run(tmp_path, verb, text=BASELINE, *extra, out="out"):
    cfg = write_cfg(tmp_path, text)
    return main([verb, "--config", str(cfg), "--out", str(tmp_path / out), "--no-header-comment", *extra])


def report_values(path):
    vals = {}
    for line in path.read_text().splitlines():
        if " = " in line and not line.startswith("["):
            k, v = line.split(" = ", 1)
            vals[k] = v
    return vals


def test_simulate_baseline(tmp_path):
    assert run(tmp_path, "simulate") == 0
    rows = read_csv(tmp_path / "out" / "trajectory.csv")
    assert list(rows[0]) == ["t", "mean_q", "mean_p", "var_q", "var_p", "cov_qp", "sigma", "sigma_closed_form", "delta_qd"]
    assert len(rows) == 251
    last = rows[-1]
    assert float(last["sigma"]) == pytest.approx(float(last["sigma_closed_form"]), abs=1e-12)
    rep = report_values(tmp_path / "out" / "report.txt")
    assert float(rep["delta_qd_inf"]) == pytest.approx(0.666667, abs=1e-6)
    assert float(rep["t_rel"]) == 5.0
    assert float(rep["t_deco"]) == pytest.approx(8.8889, abs=1e-4)
    assert rep["regime"] == "crossover"


def test_simulate_hot_bath(tmp_path):
    assert run(tmp_path, "simulate", BASELINE.replace("coth_eps = 1.5", "coth_eps = 100")) == 0
    rep = report_values(tmp_path / "out" / "report.txt")
    assert float(rep["t_deco"]) == pytest.approx(0.1333, abs=1e-4)
    assert rep["regime"] == "thermal-dominated"
    assert rep["t_deco < t_rel"] == "true"


def test_simulate_constraint_failure(tmp_path, capsys):
    text = BASELINE.replace("lambda = 0.2", "lambda = 0.1").replace("mu = 0.1", "mu = 0.2")
    assert run(tmp_path, "simulate", text) == 2
    assert "lambda > mu" in capsys.readouterr().err


def test_simulate_gibbs_failure_prints_values(tmp_path, capsys):
    assert run(tmp_path, "simulate", BASELINE.replace("coth_eps = 1.5", "coth_eps = 1.0")) == 2
    assert "0.03 < 0.04" in capsys.readouterr().err


def test_header_comment_toggle(tmp_path):
    cfg = write_cfg(tmp_path, BASELINE)
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    first = (tmp_path / "a" / "trajectory.csv").read_text().splitlines()[0]
    assert first.startswith("# oscdeco")
    assert run(tmp_path, "simulate", out="b") == 0
    assert (tmp_path / "b" / "trajectory.csv").read_text().startswith("t,")


def test_csv_number_format(tmp_path):
    assert run(tmp_path, "simulate") == 0
    raw = (tmp_path / "out" / "trajectory.csv").read_bytes()
    assert b"\r" not in raw
    second = raw.splitlines()[1].decode().split(",")
    assert all(len(f.split("e")[0].replace("-", "").replace(".", "")) == 17 for f in second)


def test_sweep_coth(tmp_path):
    assert run(tmp_path, "sweep", BASELINE, "--axis", "coth_eps", "--values", "1,1.5,2,5,10") == 0
    rows = read_csv(tmp_path / "out" / "sweep.csv")
    assert [float(r["delta_qd_inf"]) for r in rows[1:]] == pytest.approx([2 / 3, 0.5, 0.2, 0.1])
    # coth = 1 violates the Gibbs constraint for lambda = 0.2, mu = 0.1
    assert rows[0]["status"] == "constraint-violated"


def test_sweep_coth_unit_passes_without_mu(tmp_path):
    assert run(tmp_path, "sweep", BASELINE.replace("mu = 0.1", "mu = 0"), "--axis", "coth_eps", "--values", "1,1.5") == 0
    rows = read_csv(tmp_path / "out" / "sweep.csv")
    assert float(rows[0]["delta_qd_inf"]) == 1.0
    assert rows[0]["regime"] == "quantum-dominated"


def test_sweep_lambda_flags_violations(tmp_path):
    text = BASELINE.replace("coth_eps = 1.5", "coth_eps = 5")
    assert run(tmp_path, "sweep", text, "--axis", "lambda", "--values", "0.05,0.1,0.15,0.3") == 0
    status = [r["status"] for r in read_csv(tmp_path / "out" / "sweep.csv")]
    assert status == ["constraint-violated", "constraint-violated", "ok", "ok"]


def test_sweep_delta_sigma_constant(tmp_path):
    assert run(tmp_path, "sweep", BASELINE, "--axis", "delta", "--values", "0.5,1,2") == 0
    rows = read_csv(tmp_path / "out" / "sweep.csv")
    sig = {r["sigma_inf"] for r in rows}
    assert len(sig) == 1 and float(sig.pop()) == pytest.approx(0.5625)
    assert float(rows[0]["t_deco"]) == pytest.approx(2 * float(rows[1]["t_deco"]))


def test_sweep_invalid_r(tmp_path):
    assert run(tmp_path, "sweep", BASELINE, "--axis", "r", "--values", "0.5,1.0") == 0
    assert [r["status"] for r in read_csv(tmp_path / "out" / "sweep.csv")] == ["ok", "constraint-violated"]


@settings(max_examples=10, deadline=None)
@given(st.permutations([1.2, 1.5, 2.0, 3.0, 7.5]))
def test_sweep_rows_independent(tmp_path_factory, perm):
    tmp = tmp_path_factory.mktemp("sweep")
    base = [1.2, 1.5, 2.0, 3.0, 7.5]
    assert run(tmp, "sweep", BASELINE, "--axis", "coth_eps", "--values", ",".join(map(repr, base)), out="a") == 0
    assert run(tmp, "sweep", BASELINE, "--axis", "coth_eps", "--values", ",".join(map(repr, perm)), out="b") == 0
    a = (tmp / "a" / "sweep.csv").read_text().splitlines()
    b = (tmp / "b" / "sweep.csv").read_text().splitlines()
    assert a[0] == b[0]
    by_value = dict((ln.split(",")[0], ln) for ln in a[1:])
    assert b[1:] == [by_value[f"{v:.16e}"] for v in perm]


def test_grid_steady(tmp_path):
    assert run(tmp_path, "grid", BASELINE, "--time", "steady") == 0
    rho = read_rho_grid(tmp_path / "out" / "rho_grid.csv")
    assert rho.values.shape == (101, 101)
    assert rho.values[50, 50].real == pytest.approx(0.46066, abs=5e-6)
    assert rho.trace() == pytest.approx(1.0, abs=1e-6)


def test_grid_initial_pure(tmp_path):
    assert run(tmp_path, "grid", BASELINE, "--time", "0") == 0
    rho = read_rho_grid(tmp_path / "out" / "rho_grid.csv")
    assert np.all(np.diag(rho.values).imag == 0.0)
    assert rho.trace() == pytest.approx(1.0, abs=1e-6)


def test_grid_invalid(tmp_path, capsys):
    assert run(tmp_path, "grid", BASELINE + "grid.q_min = 3\ngrid.q_max = 2\n", "--time", "0") == 2
    assert "line 14" in capsys.readouterr().err
    assert run(tmp_path, "grid", BASELINE, "--time", "soon") == 2


def test_verify_short_run(tmp_path):
    text = BASELINE.replace("t_end = 25", "t_end = 2")
    assert run(tmp_path, "verify", text) == 0
    rows = read_csv(tmp_path / "out" / "verify.csv")
    assert list(rows[0]) == ["t", "sigma_gaussian", "sigma_oracle", "abs_diff"]
    assert max(float(r["abs_diff"]) for r in rows) < 1e-4


def test_verify_breach(tmp_path, capsys):
    text = BASELINE + "oracle.n = 8\nstate.q0 = 2\n"
    assert run(tmp_path, "verify", text) == 4
    assert "t=0" in capsys.readouterr().err


def test_verify_unitary_test_mode(tmp_path):
    text = (
        BASELINE.replace("lambda = 0.2", "lambda = 0").replace("mu = 0.1", "mu = 0").replace("t_end = 25", "t_end = 2")
        + "integrator.skip_validation = true\noracle.n = 30\n"
    )
    assert run(tmp_path, "verify", text) == 0
    rows = read_csv(tmp_path / "out" / "verify.csv")
    assert all(float(r["sigma_gaussian"]) == pytest.approx(0.25, abs=1e-12) for r in rows)
    assert all(float(r["sigma_oracle"]) == pytest.approx(0.25, abs=1e-9) for r in rows)


def test_verify_disabled(tmp_path):
    assert run(tmp_path, "verify", BASELINE + "oracle.enabled = false\n") == 2


def test_io_failure(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("x")
    cfg = write_cfg(tmp_path, BASELINE)
    assert main(["simulate", "--config", str(cfg), "--out", str(blocker / "sub")]) == 3
    assert main(["simulate", "--config", str(tmp_path / "missing.cfg")]) == 3


def test_determinism(tmp_path):
    assert run(tmp_path, "simulate", out="r1") == 0
    assert run(tmp_path, "simulate", out="r2") == 0
    assert (tmp_path / "r1" / "trajectory.csv").read_bytes() == (tmp_path / "r2" / "trajectory.csv").read_bytes()


# --- config ------------------------------------------------------------------


def test_parse_defaults_and_values():
    cfg = parse_config(BASELINE)
    assert cfg.lam == 0.2 and cfg.coth_eps == 1.5 and cfg.sample_stride == 100
    assert parse_config("") == RunConfig()


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("oscillator.m = 1\nstate.delta = -1\n", 2, "state.delta"),
        ("bath.coth_eps = 2\nbath.temperature = 1\n", 2, "exactly one"),
        ("\n\nnonsense.key = 3\n", 3, "unknown key"),
        ("state.r = 1.5\n", 1, "|r|"),
        ("integrator.dt = 0.3\nintegrator.t_end = 1\n", 2, "not an integer"),
        ("oracle.n = 3.5\n", 1, "integer"),
        ("state.delta = 1\nstate.delta = 2\n", 2, "duplicate"),
        ("just words\n", 1, "key = value"),
    ],
)
def test_config_errors_are_line_precise(text, line, fragment):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.line == line
    assert fragment in str(exc.value)


def test_temperature_config():
    cfg = parse_config("bath.temperature = 0.5\nbath.k = 2\n")
    assert cfg.coth_eps is None
    assert cfg.bath().coth_eps == pytest.approx(1 / math.tanh(1 / (2 * 2 * 0.5)))


finite = dict(allow_nan=False, allow_infinity=False)


@settings(max_examples=100, deadline=None)
@given(
    lam=st.floats(0, 5, **finite),
    mu=st.floats(-5, 5, **finite),
    coth=st.one_of(st.none(), st.floats(1, 1e6, **finite)),
    temp=st.floats(0, 1e3, **finite),
    delta=st.floats(1e-3, 1e3, **finite),
    r=st.floats(-0.999, 0.999, **finite),
    stride=st.integers(1, 1000),
    flag=st.booleans(),
    outdir=st.text("abcxyz_/-.", min_size=1, max_size=12),
)
def test_config_round_trip(lam, mu, coth, temp, delta, r, stride, flag, outdir):
    cfg = RunConfig(
        lam=lam, mu=mu, coth_eps=coth, temperature=None if coth is not None else temp,
        delta=delta, r=r, sample_stride=stride, skip_validation=flag, output_dir=outdir,
    )
    again = parse_config(format_config(cfg))
    assert again == cfg
