"""Flat ``section.key = value`` run configuration.

Example::

    # baseline
    oscillator.lambda = 0.2
    oscillator.mu = 0.1
    bath.coth_eps = 1.5
    integrator.dt = 0.001

Blank lines and ``#`` comments are ignored. Every key is optional and falls
back to the baseline value, except that at most one of ``bath.coth_eps`` and
``bath.temperature`` may be given (``coth_eps = 1.5`` is the default).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from .density import CoordinateGrid
from .evolution import IntegratorConfig
from .model import InitialStateSpec, OscillatorParams, ThermalBath

FORMAT_VERSION = "1"


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else "config: "
        super().__init__(prefix + message)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _int(text: str) -> int:
    v = float(text)
    if not v.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(v)


def _float(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(f"expected a finite number, got {text!r}")
    return v


def _positive(v):
    if not v > 0:
        raise ValueError(f"must be > 0, got {v}")


def _nonneg(v):
    if not v >= 0:
        raise ValueError(f"must be >= 0, got {v}")


def _at_least(lo):
    def check(v):
        if not v >= lo:
            raise ValueError(f"must be >= {lo}, got {v}")
    return check


def _open_unit(v):
    if not abs(v) < 1:
        raise ValueError(f"|r| must be < 1, got {v}")


def _no_check(v):
    pass


@dataclass(frozen=True)
class RunConfig:
    m: float = 1.0
    omega: float = 1.0
    lam: float = 0.2
    mu: float = 0.1
    hbar: float = 1.0
    coth_eps: float | None = 1.5
    temperature: float | None = None
    k: float = 1.0
    delta: float = 1.0
    r: float = 0.0
    q0: float = 0.0
    p0: float = 0.0
    dt: float = 1e-3
    t_end: float = 25.0
    sample_stride: int = 10
    skip_validation: bool = False
    oracle_enabled: bool = True
    oracle_n: int = 60
    oracle_initial_threshold: float = 1e-10
    oracle_breach_threshold: float = 1e-6
    oracle_tolerance: float = 1e-4
    grid_q_min: float = -5.0
    grid_q_max: float = 5.0
    grid_n: int = 101
    output_dir: str = "out"
    format_version: str = FORMAT_VERSION

    def params(self) -> OscillatorParams:
        return OscillatorParams(omega=self.omega, lam=self.lam, mu=self.mu, m=self.m, hbar=self.hbar)

    def bath(self) -> ThermalBath:
        if self.temperature is not None:
            return ThermalBath.from_temperature(self.temperature, self.params(), self.k)
        return ThermalBath.from_coth(self.coth_eps)

    def spec(self) -> InitialStateSpec:
        return InitialStateSpec(delta=self.delta, r=self.r, q0=self.q0, p0=self.p0)

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(dt=self.dt, t_end=self.t_end, sample_stride=self.sample_stride)

    def grid(self) -> CoordinateGrid:
        return CoordinateGrid(self.grid_q_min, self.grid_q_max, self.grid_n)

    def with_updates(self, **changes) -> "RunConfig":
        return replace(self, **changes)


# config key -> (RunConfig field, parser, per-value check)
SCHEMA = {
    "oscillator.m": ("m", _float, _positive),
    "oscillator.omega": ("omega", _float, _positive),
    "oscillator.lambda": ("lam", _float, _nonneg),
    "oscillator.mu": ("mu", _float, _no_check),
    "oscillator.hbar": ("hbar", _float, _positive),
    "bath.coth_eps": ("coth_eps", _float, _at_least(1.0)),
    "bath.temperature": ("temperature", _float, _nonneg),
    "bath.k": ("k", _float, _positive),
    "state.delta": ("delta", _float, _positive),
    "state.r": ("r", _float, _open_unit),
    "state.q0": ("q0", _float, _no_check),
    "state.p0": ("p0", _float, _no_check),
    "integrator.dt": ("dt", _float, _positive),
    "integrator.t_end": ("t_end", _float, _positive),
    "integrator.sample_stride": ("sample_stride", _int, _at_least(1)),
    "integrator.skip_validation": ("skip_validation", _bool, _no_check),
    "oracle.enabled": ("oracle_enabled", _bool, _no_check),
    "oracle.n": ("oracle_n", _int, _at_least(4)),
    "oracle.initial_threshold": ("oracle_initial_threshold", _float, _positive),
    "oracle.breach_threshold": ("oracle_breach_threshold", _float, _positive),
    "oracle.tolerance": ("oracle_tolerance", _float, _positive),
    "grid.q_min": ("grid_q_min", _float, _no_check),
    "grid.q_max": ("grid_q_max", _float, _no_check),
    "grid.n": ("grid_n", _int, _at_least(2)),
    "output.dir": ("output_dir", str, _no_check),
    "output.format_version": ("format_version", str, _no_check),
}
FIELD_TO_KEY = {f: key for key, (f, _, _) in SCHEMA.items()}


def parse_config(text: str) -> RunConfig:
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in lines:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[key]})", lineno)
        name, parse, check = SCHEMA[key]
        try:
            v = parse(value)
            check(v)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", lineno) from None
        values[name] = v
        lines[key] = lineno

    if "bath.coth_eps" in lines and "bath.temperature" in lines:
        raise ConfigError("give exactly one of bath.coth_eps and bath.temperature", lines["bath.temperature"])
    if "bath.temperature" in lines:
        values["coth_eps"] = None
    elif "bath.coth_eps" not in lines:
        values.setdefault("coth_eps", RunConfig.coth_eps)
    if values.get("format_version", FORMAT_VERSION) != FORMAT_VERSION:
        raise ConfigError(
            f"unsupported format version {values['format_version']!r}", lines["output.format_version"]
        )

    cfg = RunConfig(**values)
    _check_objects(cfg, lines)
    return cfg


def _check_objects(cfg: RunConfig, lines: dict[str, int]) -> None:
    """Build every model object once so cross-field invariants fail at load time."""
    builders = [
        (cfg.integrator, ("integrator.t_end", "integrator.dt")),
        (cfg.grid, ("grid.q_max", "grid.q_min", "grid.n")),
        (cfg.bath, ("bath.temperature", "bath.coth_eps")),
    ]
    for build, keys in builders:
        try:
            build()
        except ValueError as exc:
            line = next((lines[k] for k in keys if k in lines), None)
            raise ConfigError(str(exc), line) from None


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def format_config(cfg: RunConfig) -> str:
    out = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if v is None:
            continue
        if isinstance(v, bool):
            text = "true" if v else "false"
        elif isinstance(v, float):
            text = repr(v)
        else:
            text = str(v)
        out.append(f"{FIELD_TO_KEY[f.name]} = {text}")
    return "\n".join(out) + "\n"
