"""
Run configuration: one JSON file per experiment, SI units throughout.

Relative paths (profile tables, output and golden directories) are taken
relative to the config file. Every validation failure is a ConfigError
naming the offending key.
"""

import json
import logging
import os
from dataclasses import dataclass, field, replace

import numpy as np

from dispersion import TubeSystem
from errors import ConfigError
from oracle import normalize_method
from rheology import RheologySpectrum, normalize_model_class, validate_spectrum
from wall_profile import InhomogeneityProfile, make_channel

logger = logging.getLogger(__name__)

SECTIONS = {"name", "tube", "rheology", "profiles", "forcing", "numerics", "outputs"}


@dataclass(frozen=True)
class Numerics:
    x_max: float = 40.0
    grid: int = 200
    tol: float = 1e-10
    n_max: int = 50
    nodes_per_panel: int = 16
    panel_scale: float = 1.0
    residual_tol: float = 1e-6
    oracle_tol: float = 1e-6
    oracle_method: str = "BackwardMarch"

    @property
    def points(self):
        return np.linspace(0.0, self.x_max, self.grid)


@dataclass(frozen=True)
class Outputs:
    directory: str = "out"
    plots: bool = False
    snapshots: int = 0
    golden: str = None


@dataclass(frozen=True)
class RunConfig:
    name: str
    tube: TubeSystem
    spectrum: RheologySpectrum
    profile: InhomogeneityProfile
    p0: float
    omega: float = None
    omegas: tuple = ()
    numerics: Numerics = field(default_factory=Numerics)
    outputs: Outputs = field(default_factory=Outputs)
    source: str = None


def parse_omega_range(text):
    """'START:STOP:N' -> N evenly spaced frequencies."""
    try:
        start, stop, n = str(text).split(":")
        start, stop, n = float(start), float(stop), int(n)
    except ValueError as e:
        raise ConfigError(f"forcing.omega_range must look like START:STOP:N (got '{text}')") from e
    if n < 1:
        raise ConfigError(f"forcing.omega_range: no frequencies in '{text}'")
    return tuple(float(w) for w in np.linspace(start, stop, n))


def _section(raw, name):
    value = raw.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"{name} must be an object")
    return value


def _number(section, key, prefix, default=None, kind=float):
    value = section.get(key, default)
    if value is None:
        raise ConfigError(f"{prefix}.{key} is required")
    try:
        return kind(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{prefix}.{key} must be a number (got {value!r})") from e


def _tube(section):
    values = {k: _number(section, k, "tube") for k in ("R", "h", "rho_f", "rho_m_inf", "E_inf")}
    return TubeSystem(**values)


def _spectrum(section):
    try:
        lambdas = tuple(float(t) for t in section.get("lambdas", []))
        thetas = tuple(float(t) for t in section.get("thetas", []))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"rheology.lambdas/thetas must be lists of numbers: {e}") from e
    spec = RheologySpectrum(
        lambdas=lambdas,
        thetas=thetas,
        eta=_number(section, "eta", "rheology"),
        model_class=normalize_model_class(section.get("model_class", "ViscousAtLoading")),
        inviscid=bool(section.get("inviscid", False)),
    )
    return validate_spectrum(spec)


def _channel(section, key, base_dir):
    params = dict(section.get(key, {"family": "Homogeneous"}))
    if "family" not in params:
        raise ConfigError(f"profiles.{key}.family is required")
    if "table" in params and not os.path.isabs(params["table"]):
        params["table"] = os.path.join(base_dir, params["table"])
    try:
        return make_channel(params["family"], params)
    except ConfigError as e:
        raise type(e)(f"profiles.{key}: {e}") from e


def _resolve(base_dir, path):
    if path is None or os.path.isabs(path):
        return path
    return os.path.normpath(os.path.join(base_dir, path))


def build_config(raw, base_dir=".", source=None):
    unknown = set(raw) - SECTIONS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    forcing = _section(raw, "forcing")
    profiles = _section(raw, "profiles")
    numerics_raw = _section(raw, "numerics")
    outputs_raw = _section(raw, "outputs")

    numerics = Numerics(
        x_max=_number(numerics_raw, "x_max", "numerics", Numerics.x_max),
        grid=_number(numerics_raw, "grid", "numerics", Numerics.grid, int),
        tol=_number(numerics_raw, "tol", "numerics", Numerics.tol),
        n_max=_number(numerics_raw, "n_max", "numerics", Numerics.n_max, int),
        nodes_per_panel=_number(numerics_raw, "nodes_per_panel", "numerics", Numerics.nodes_per_panel, int),
        panel_scale=_number(numerics_raw, "panel_scale", "numerics", Numerics.panel_scale),
        residual_tol=_number(numerics_raw, "residual_tol", "numerics", Numerics.residual_tol),
        oracle_tol=_number(numerics_raw, "oracle_tol", "numerics", Numerics.oracle_tol),
        oracle_method=normalize_method(numerics_raw.get("oracle_method", Numerics.oracle_method)).value,
    )
    name = str(raw.get("name") or os.path.splitext(os.path.basename(source or "run"))[0])
    outputs = Outputs(
        directory=_resolve(base_dir, outputs_raw.get("directory", os.path.join("out", name))),
        plots=bool(outputs_raw.get("plots", False)),
        snapshots=_number(outputs_raw, "snapshots", "outputs", 0, int),
        golden=_resolve(base_dir, outputs_raw.get("golden")),
    )
    omega = forcing.get("omega")
    config = RunConfig(
        name=name,
        tube=_tube(_section(raw, "tube")),
        spectrum=_spectrum(_section(raw, "rheology")),
        profile=InhomogeneityProfile(g1=_channel(profiles, "g1", base_dir), g2=_channel(profiles, "g2", base_dir)),
        p0=_number(forcing, "p0", "forcing", 1.0),
        omega=None if omega is None else _number(forcing, "omega", "forcing"),
        omegas=parse_omega_range(forcing["omega_range"]) if forcing.get("omega_range") else (),
        numerics=numerics,
        outputs=outputs,
        source=source,
    )
    return validate_config(config)


def validate_config(config):
    n = config.numerics
    if not (np.isfinite(n.x_max) and n.x_max > 0):
        raise ConfigError(f"numerics.x_max must be > 0 (got {n.x_max})")
    if n.grid < 2:
        raise ConfigError(f"numerics.grid must be >= 2 (got {n.grid})")
    for key in ("tol", "residual_tol", "oracle_tol", "panel_scale"):
        if not getattr(n, key) > 0:
            raise ConfigError(f"numerics.{key} must be > 0 (got {getattr(n, key)})")
    if n.n_max < 1 or n.nodes_per_panel < 2:
        raise ConfigError("numerics.n_max must be >= 1 and numerics.nodes_per_panel >= 2")
    if config.omega is not None and not (np.isfinite(config.omega) and config.omega > 0):
        raise ConfigError(f"forcing.omega must be > 0 (got {config.omega})")
    if any(not w > 0 for w in config.omegas):
        raise ConfigError(f"forcing.omega_range must contain positive frequencies (got {config.omegas})")
    if not np.isfinite(config.p0):
        raise ConfigError(f"forcing.p0 must be finite (got {config.p0})")
    return config


def load_config(path):
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    config = build_config(raw, os.path.dirname(os.path.abspath(path)), source=path)
    logger.info(f"📄 loaded config '{config.name}' from {path}")
    return config


def apply_overrides(config, omega=None, omega_range=None, out=None, tol=None, x_max=None, grid=None, plots=None):
    """Command-line flags take precedence over the file."""
    numerics = config.numerics
    if tol is not None:
        numerics = replace(numerics, tol=float(tol))
    if x_max is not None:
        numerics = replace(numerics, x_max=float(x_max))
    if grid is not None:
        numerics = replace(numerics, grid=int(grid))
    outputs = config.outputs
    if out is not None:
        outputs = replace(outputs, directory=out)
    if plots is not None:
        outputs = replace(outputs, plots=plots)
    config = replace(config, numerics=numerics, outputs=outputs)
    if omega is not None:
        # a single --omega replaces the file's frequency range
        config = replace(config, omega=float(omega), omegas=())
    if omega_range is not None:
        config = replace(config, omegas=parse_omega_range(omega_range))
    return validate_config(config)
