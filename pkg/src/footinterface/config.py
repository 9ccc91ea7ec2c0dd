"""Run configuration: an INI file with fixed sections and keys.

Example::

    [run]
    seed = 7
    output_dir = out

    [geometry]
    path = my_device.ini

    [springs]
    compression_stiffness_n_per_cm = 0.02

    [signal]
    filter_window = 9
    velocity_threshold_m_per_s = 0.005

    [mapping]
    zero_band_translation = 0.3
    zero_band_rotation = 0.4
    ica_tolerance = 1e-6
    ica_max_iterations = 500
    ica_seed = 42
    whitening_floor = 0.003

    [cohort]
    rotation_min_deg = 10
    rotation_max_deg = 30
    skew_max = 0.3
    gain_min = 0.8
    gain_max = 1.2
    noise_sigma = 0.05
"""
from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigError
from .geometry import DeviceGeometry, default_geometry, load_geometry, torsion_spring
from .mapping import IcaSettings
from .signals import FILTER_WINDOW, VELOCITY_THRESHOLD
from .synthetic import CohortSpec

ENV_VAR = "FOOTINTERFACE_CONFIG"

_SCHEMA = {
    "run": {"seed": int, "output_dir": str},
    "geometry": {"path": str},
    "springs": {"compression_stiffness_n_per_cm": float, "compression_pretension_n": float,
                "torsion_stiffness_ncm_per_deg": float},
    "signal": {"filter_window": int, "velocity_threshold_m_per_s": float},
    "mapping": {"zero_band_translation": float, "zero_band_rotation": float,
                "ica_tolerance": float, "ica_max_iterations": int, "ica_seed": int,
                "whitening_floor": float},
    "cohort": {"rotation_min_deg": float, "rotation_max_deg": float, "skew_max": float,
               "gain_min": float, "gain_max": float, "noise_sigma": float},
}


@dataclass(frozen=True)
class RunConfig:
    geometry_path: Path | None = None
    spring_overrides: dict = field(default_factory=dict)
    seed: int = 0
    filter_window: int = FILTER_WINDOW
    velocity_threshold: float = VELOCITY_THRESHOLD
    zero_band: tuple = (0.3, 0.4)
    ica_tolerance: float = 1e-6
    ica_max_iterations: int = 500
    ica_seed: int = 42
    whitening_floor: float = IcaSettings.floor
    cohort: dict = field(default_factory=dict)
    output_dir: Path | None = None

    @property
    def fractions(self) -> tuple:
        t, r = self.zero_band
        return (t, t, r, r)

    def ica_settings(self) -> IcaSettings:
        return IcaSettings(seed=self.ica_seed, tol=self.ica_tolerance, max_iter=self.ica_max_iterations,
                           floor=self.whitening_floor, fractions=self.fractions)

    def geometry(self) -> DeviceGeometry:
        geom = load_geometry(self.geometry_path) if self.geometry_path else default_geometry()
        if not self.spring_overrides:
            return geom
        o = self.spring_overrides
        springs = list(geom.springs)
        for i in range(6):
            changes = {}
            if "compression_stiffness_n_per_cm" in o:
                changes["stiffness"] = o["compression_stiffness_n_per_cm"]
            if "compression_pretension_n" in o:
                changes["pretension"] = o["compression_pretension_n"]
            springs[i] = replace(springs[i], **changes)
        if "torsion_stiffness_ncm_per_deg" in o:
            springs[6] = torsion_spring(o["torsion_stiffness_ncm_per_deg"], springs[6].pretension)
            springs[7] = torsion_spring(o["torsion_stiffness_ncm_per_deg"], springs[7].pretension)
        return replace(geom, springs=tuple(springs))

    def cohort_spec(self, n_subjects: int, seed: int | None = None) -> CohortSpec:
        c = self.cohort
        return CohortSpec(
            n_subjects=n_subjects,
            seed=self.seed if seed is None else seed,
            rotation_deg=(c.get("rotation_min_deg", 10.0), c.get("rotation_max_deg", 30.0)),
            skew_max=c.get("skew_max", 0.3),
            gain_range=(c.get("gain_min", 0.8), c.get("gain_max", 1.2)),
            noise_sigma=c.get("noise_sigma", 0.05),
        )


def config_from_text(text: str, base_dir: Path | None = None) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    values = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser[section].items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"[{section}] unknown key {key!r}")
            kind = _SCHEMA[section][key]
            try:
                values[(section, key)] = kind(raw.strip())
            except ValueError:
                raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from None

    base_dir = base_dir or Path.cwd()
    kwargs = {}
    if ("geometry", "path") in values:
        path = Path(values[("geometry", "path")])
        path = path if path.is_absolute() else base_dir / path
        if not path.is_file():
            raise ConfigError(f"geometry file not found: {path}")
        kwargs["geometry_path"] = path
    if ("run", "seed") in values:
        kwargs["seed"] = values[("run", "seed")]
    if ("run", "output_dir") in values:
        kwargs["output_dir"] = Path(values[("run", "output_dir")])
    kwargs["spring_overrides"] = {k: v for (s, k), v in values.items() if s == "springs"}
    if ("signal", "filter_window") in values:
        w = values[("signal", "filter_window")]
        if w < 1 or w % 2 == 0:
            raise ConfigError("filter_window must be a positive odd integer")
        kwargs["filter_window"] = w
    if ("signal", "velocity_threshold_m_per_s") in values:
        kwargs["velocity_threshold"] = values[("signal", "velocity_threshold_m_per_s")]
    zb = (values.get(("mapping", "zero_band_translation"), 0.3),
          values.get(("mapping", "zero_band_rotation"), 0.4))
    if not all(0 < v < 1 for v in zb):
        raise ConfigError("zero-band fractions must lie in (0, 1)")
    kwargs["zero_band"] = zb
    for key, attr in (("ica_tolerance", "ica_tolerance"), ("ica_max_iterations", "ica_max_iterations"),
                      ("ica_seed", "ica_seed"), ("whitening_floor", "whitening_floor")):
        if ("mapping", key) in values:
            kwargs[attr] = values[("mapping", key)]
    kwargs["cohort"] = {k: v for (s, k), v in values.items() if s == "cohort"}
    return RunConfig(**kwargs)


def load_config(path=None) -> RunConfig:
    """Read ``path``, else the file named by $FOOTINTERFACE_CONFIG, else defaults."""
    if path is None:
        path = os.environ.get(ENV_VAR) or None
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return config_from_text(text, path.parent)
