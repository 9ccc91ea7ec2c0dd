"""Device geometry, spring bank and the plain-text configuration format.

Lengths are in cm, forces in N. Angles are stored in radians on the
objects and written in degrees in configuration files.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError

OUTSIDE_BASE = "outside"
INSIDE_BASE = "inside"
PLACEMENTS = (OUTSIDE_BASE, INSIDE_BASE)

# guide index (0-based) -> mirrored guide index under x -> -x
MIRROR_PERMUTATION = (0, 1, 3, 2, 5, 4, 6, 7)


@dataclass(frozen=True)
class SpringSpec:
    """One spring of the bank.

    Compression springs use ``stiffness`` in N/cm and the length fields in cm.
    Torsion springs use ``stiffness`` in N*cm/rad and leave the lengths unset.
    """

    kind: str
    stiffness: float
    pretension: float = 0.0
    free_length: float | None = None
    installed_length: float | None = None
    fully_compressed_length: float | None = None
    guide_home_length: float | None = None

    def __post_init__(self):
        if self.kind not in ("compression", "torsion"):
            raise ConfigError(f"unknown spring kind {self.kind!r}")
        if not (self.stiffness > 0 and math.isfinite(self.stiffness)):
            raise ConfigError("spring stiffness must be positive")
        if not self.pretension >= 0:
            raise ConfigError("spring pretension must be non-negative")
        if self.kind == "compression":
            lengths = (self.free_length, self.installed_length, self.fully_compressed_length)
            if any(v is None for v in lengths):
                raise ConfigError("compression springs need free, installed and fully compressed lengths")
            if not self.fully_compressed_length < self.installed_length <= self.free_length:
                raise ConfigError("need fully_compressed_length < installed_length <= free_length")

    @property
    def stroke(self) -> float:
        """Guide elongation that drives a compression spring solid."""
        return self.installed_length - self.fully_compressed_length


def _rect_points(length, width, spacing):
    half_l, half_w, half_s = length / 2.0, width / 2.0, spacing / 2.0
    return np.array(
        [
            [0.0, half_l],
            [0.0, -half_l],
            [-half_w, half_s],
            [half_w, half_s],
            [-half_w, -half_s],
            [half_w, -half_s],
        ]
    )


@dataclass(frozen=True)
class DeviceGeometry:
    """Planar 6-RPR layout plus pitch levers, workspace limits and springs.

    ``base_length``/``mobile_length`` (a, a') run along y, ``base_width``/
    ``mobile_width`` (b, b') along x, and ``base_spacing``/``mobile_spacing``
    (c, c') separate the lateral guides along y.
    """

    base_length: float = 30.0
    base_width: float = 30.0
    mobile_length: float = 20.0
    mobile_width: float = 20.0
    base_spacing: float = 16.0
    mobile_spacing: float = 12.0
    toe_lever: float = 8.0
    heel_lever: float = 8.0
    reference_offset: float = 11.5
    x_limit: float = 2.0
    y_limit: float = 2.0
    yaw_limit: float = math.radians(12.5)
    pitch_limit: float = math.radians(10.0)
    springs: tuple = ()
    placement: str = OUTSIDE_BASE

    base_points: np.ndarray = field(init=False, repr=False, compare=False)
    mobile_points: np.ndarray = field(init=False, repr=False, compare=False)
    home_lengths: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.springs:
            object.__setattr__(self, "springs", default_spring_bank())
        if len(self.springs) != 8:
            raise ConfigError("spring bank must hold 6 compression and 2 torsion springs")
        if any(s.kind != "compression" for s in self.springs[:6]) or any(
            s.kind != "torsion" for s in self.springs[6:]
        ):
            raise ConfigError("springs 1-6 must be compression springs, 7-8 torsion springs")
        if self.placement not in PLACEMENTS:
            raise ConfigError(f"spring_placement must be one of {PLACEMENTS}")
        dims = (self.base_length, self.base_width, self.mobile_length, self.mobile_width,
                self.base_spacing, self.mobile_spacing)
        if any(not (v > 0 and math.isfinite(v)) for v in dims):
            raise ConfigError("frame dimensions must be positive")
        if not (self.toe_lever > 0 and self.heel_lever > 0 and self.reference_offset > 0):
            raise ConfigError("lever arms and reference offset must be positive")
        if not all(v > 0 for v in (self.x_limit, self.y_limit, self.yaw_limit, self.pitch_limit)):
            raise ConfigError("workspace limits must be strictly positive")
        if self.P == 0:
            raise ConfigError("b*c' - b'*c vanishes; yaw is not observable")

        base = _rect_points(self.base_length, self.base_width, self.base_spacing)
        mobile = _rect_points(self.mobile_length, self.mobile_width, self.mobile_spacing)
        home = np.linalg.norm(base - mobile, axis=1)
        if np.any(home <= 0):
            raise ConfigError("coincident attachment points at home")
        for i, spring in enumerate(self.springs[:6]):
            if spring.guide_home_length is not None and abs(spring.guide_home_length - home[i]) > 1e-6:
                raise ConfigError(
                    f"spring {i + 1}: guide_home_length {spring.guide_home_length} disagrees with the "
                    f"closure length {home[i]:.6f} cm"
                )
        for arr in (base, mobile, home):
            arr.flags.writeable = False
        object.__setattr__(self, "base_points", base)
        object.__setattr__(self, "mobile_points", mobile)
        object.__setattr__(self, "home_lengths", home)

    # closed-form constants of the forward kinematics
    @property
    def M(self) -> float:
        return self.base_length * self.base_width + self.mobile_length * self.mobile_width

    @property
    def Q(self) -> float:
        return self.base_length * self.mobile_width + self.mobile_length * self.base_width

    @property
    def P(self) -> float:
        return self.base_width * self.mobile_spacing - self.mobile_width * self.base_spacing

    @property
    def stiffness(self) -> np.ndarray:
        """k_1..k_6 (N/cm)."""
        return np.array([s.stiffness for s in self.springs[:6]])

    @property
    def pretension(self) -> np.ndarray:
        """f_01..f_08 (N)."""
        return np.array([s.pretension for s in self.springs])

    @property
    def torsion_stiffness(self) -> tuple[float, float]:
        """k_7, k_8 in N*cm/rad."""
        return self.springs[6].stiffness, self.springs[7].stiffness

    @property
    def strokes(self) -> np.ndarray:
        return np.array([s.stroke for s in self.springs[:6]])

    @property
    def limits(self) -> np.ndarray:
        """Workspace half-ranges (x cm, y cm, yaw rad, pitch rad)."""
        return np.array([self.x_limit, self.y_limit, self.yaw_limit, self.pitch_limit])

    @property
    def full_scale_forces(self) -> np.ndarray:
        """Delta force per channel at the end of its elastic range (N)."""
        k7, k8 = self.torsion_stiffness
        return np.concatenate(
            [self.stiffness * self.strokes,
             [k7 * self.pitch_limit / self.toe_lever, k8 * self.pitch_limit / self.heel_lever]]
        )

    def is_symmetric(self) -> bool:
        """True when the spring bank is invariant under the left-right mirror."""
        return all(self.springs[i] == self.springs[j] for i, j in enumerate(MIRROR_PERMUTATION))

    def with_placement(self, placement: str) -> "DeviceGeometry":
        return replace(self, placement=placement)


def compression_spring(**overrides) -> SpringSpec:
    values = dict(kind="compression", stiffness=0.02, pretension=5.6, free_length=6.0,
                  installed_length=3.2, fully_compressed_length=1.2)
    values.update(overrides)
    return SpringSpec(**values)


def torsion_spring(stiffness_ncm_per_deg=46.3, pretension=0.0) -> SpringSpec:
    # stored per radian
    return SpringSpec(kind="torsion", stiffness=stiffness_ncm_per_deg * 180.0 / math.pi, pretension=pretension)


def default_spring_bank() -> tuple:
    return tuple([compression_spring() for _ in range(6)] + [torsion_spring(), torsion_spring()])


# ---------------------------------------------------------------------------
# configuration file

_GEOMETRY_KEYS = {
    "base_length_cm": "base_length",
    "base_width_cm": "base_width",
    "mobile_length_cm": "mobile_length",
    "mobile_width_cm": "mobile_width",
    "base_guide_spacing_cm": "base_spacing",
    "mobile_guide_spacing_cm": "mobile_spacing",
    "toe_lever_cm": "toe_lever",
    "heel_lever_cm": "heel_lever",
    "reference_offset_cm": "reference_offset",
}
_WORKSPACE_KEYS = {
    "x_limit_cm": ("x_limit", 1.0),
    "y_limit_cm": ("y_limit", 1.0),
    "yaw_limit_deg": ("yaw_limit", math.pi / 180.0),
    "pitch_limit_deg": ("pitch_limit", math.pi / 180.0),
}
_COMPRESSION_KEYS = {
    "stiffness_n_per_cm": "stiffness",
    "free_length_cm": "free_length",
    "installed_length_cm": "installed_length",
    "fully_compressed_length_cm": "fully_compressed_length",
    "pretension_n": "pretension",
    "guide_home_length_cm": "guide_home_length",
}
_TORSION_KEYS = {"stiffness_ncm_per_deg", "pretension_n"}


def _float(section, key):
    raw = section[key]
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{section.name}] {key}: not a number: {raw!r}") from None


def _reject_unknown(section, allowed):
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"[{section.name}] unknown key(s): {', '.join(unknown)}")


def _new_parser():
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str
    return parser


def geometry_from_text(text: str) -> DeviceGeometry:
    parser = _new_parser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    expected = {"geometry", "workspace"} | {f"spring.{i}" for i in range(1, 9)}
    unknown = sorted(set(parser.sections()) - expected)
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(unknown)}")

    kwargs = {}
    if parser.has_section("geometry"):
        sec = parser["geometry"]
        _reject_unknown(sec, list(_GEOMETRY_KEYS) + ["spring_placement"])
        for key, name in _GEOMETRY_KEYS.items():
            if key in sec:
                kwargs[name] = _float(sec, key)
        if "spring_placement" in sec:
            kwargs["placement"] = sec["spring_placement"].strip().lower()
    if parser.has_section("workspace"):
        sec = parser["workspace"]
        _reject_unknown(sec, _WORKSPACE_KEYS)
        for key, (name, scale) in _WORKSPACE_KEYS.items():
            if key in sec:
                kwargs[name] = _float(sec, key) * scale

    springs = list(default_spring_bank())
    for i in range(1, 9):
        name = f"spring.{i}"
        if not parser.has_section(name):
            continue
        sec = parser[name]
        if i <= 6:
            _reject_unknown(sec, _COMPRESSION_KEYS)
            values = {attr: _float(sec, key) for key, attr in _COMPRESSION_KEYS.items() if key in sec}
            springs[i - 1] = replace(springs[i - 1], **values)
        else:
            _reject_unknown(sec, _TORSION_KEYS)
            k = _float(sec, "stiffness_ncm_per_deg") if "stiffness_ncm_per_deg" in sec else 46.3
            f0 = _float(sec, "pretension_n") if "pretension_n" in sec else 0.0
            springs[i - 1] = torsion_spring(k, f0)
    kwargs["springs"] = tuple(springs)
    return DeviceGeometry(**kwargs)


def load_geometry(path) -> DeviceGeometry:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read geometry file {path}: {exc}") from None
    return geometry_from_text(text)


def default_geometry() -> DeviceGeometry:
    text = resources.files("footinterface").joinpath("data/default_geometry.ini").read_text(encoding="utf-8")
    return geometry_from_text(text)


def geometry_to_text(geom: DeviceGeometry) -> str:
    """Serialize a geometry in the same key = value format it is read from."""
    lines = ["[geometry]"]
    for key, name in _GEOMETRY_KEYS.items():
        lines.append(f"{key} = {getattr(geom, name)!r}")
    lines.append(f"spring_placement = {geom.placement}")
    lines += ["", "[workspace]"]
    for key, (name, scale) in _WORKSPACE_KEYS.items():
        lines.append(f"{key} = {getattr(geom, name) / scale!r}")
    for i, spring in enumerate(geom.springs, start=1):
        lines += ["", f"[spring.{i}]"]
        if spring.kind == "compression":
            for key, attr in _COMPRESSION_KEYS.items():
                value = getattr(spring, attr)
                if value is not None:
                    lines.append(f"{key} = {value!r}")
        else:
            lines.append(f"stiffness_ncm_per_deg = {spring.stiffness * math.pi / 180.0!r}")
            lines.append(f"pretension_n = {spring.pretension!r}")
    return "\n".join(lines) + "\n"
