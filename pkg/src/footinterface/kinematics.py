"""Force -> guide length -> pose chain of the foot interface.

All array functions broadcast over leading dimensions, so a whole trial
(n frames x 8 channels) goes through in one call. Poses are laid out as
``[x, y, yaw, pitch]`` with lengths in cm and angles in radians.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometry, OutOfDomain, SingularDenominator
from .geometry import INSIDE_BASE, DeviceGeometry

ELASTIC = "elastic"
ISOMETRIC = "isometric"


@dataclass(frozen=True)
class PedalPose:
    """Pose of the pedal centre C: x, y in cm, yaw and pitch in radians."""

    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0
    pitch: float = 0.0

    @classmethod
    def from_degrees(cls, x=0.0, y=0.0, yaw_deg=0.0, pitch_deg=0.0):
        return cls(float(x), float(y), math.radians(yaw_deg), math.radians(pitch_deg))

    @classmethod
    def from_array(cls, values):
        values = np.asarray(values, dtype=float)
        pitch = values[3] if values.shape[0] > 3 else 0.0
        return cls(float(values[0]), float(values[1]), float(values[2]), float(pitch))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.yaw, self.pitch])

    @property
    def yaw_deg(self) -> float:
        return math.degrees(self.yaw)

    @property
    def pitch_deg(self) -> float:
        return math.degrees(self.pitch)

    def mirrored(self) -> "PedalPose":
        return PedalPose(-self.x, self.y, -self.yaw, self.pitch)


@dataclass(frozen=True)
class ForceFrame:
    """One 8-channel load-cell sample (N) at time ``t`` (s)."""

    t: float
    forces: np.ndarray = field(compare=False)

    def __post_init__(self):
        forces = np.array(self.forces, dtype=float)
        if forces.shape != (8,):
            raise ValueError("a force frame holds exactly 8 readings")
        if not np.all(np.isfinite(forces)):
            raise ValueError("force readings must be finite")
        if np.any(forces < 0):
            raise ValueError("load cells only report compression (readings >= 0)")
        forces.flags.writeable = False
        object.__setattr__(self, "forces", forces)


@dataclass(frozen=True)
class ContactMode:
    mode: str
    saturated: frozenset = frozenset()

    @property
    def is_elastic(self) -> bool:
        return self.mode == ELASTIC


def _pose_array(pose) -> np.ndarray:
    if isinstance(pose, PedalPose):
        return pose.as_array()
    return np.asarray(pose, dtype=float)


def _force_array(frame) -> np.ndarray:
    if isinstance(frame, ForceFrame):
        return frame.forces
    return np.asarray(frame, dtype=float)


def placement_sign(geom: DeviceGeometry) -> float:
    """+1 when guide elongation compresses the spring (outside base), -1 for struts."""
    return -1.0 if geom.placement == INSIDE_BASE else 1.0


def guide_vectors(pose, geom: DeviceGeometry):
    """Closure vectors L_i = a_i - p - R b_i, shape (..., 6, 2), and R b_i."""
    q = _pose_array(pose)
    x, y, phi = q[..., 0], q[..., 1], q[..., 2]
    c, s = np.cos(phi)[..., None], np.sin(phi)[..., None]
    bx, by = geom.mobile_points[:, 0], geom.mobile_points[:, 1]
    rb = np.stack([bx * c - by * s, bx * s + by * c], axis=-1)
    p = np.stack([x, y], axis=-1)[..., None, :]
    return geom.base_points - p - rb, rb


def inverse_kinematics(pose, geom: DeviceGeometry) -> np.ndarray:
    """Guide lengths L_1..L_6 for a pose (pitch is ignored)."""
    q = _pose_array(pose)
    x, y, phi = q[..., 0, None], q[..., 1, None], q[..., 2, None]
    c, s = np.cos(phi), np.sin(phi)
    ax, ay = geom.base_points[:, 0], geom.base_points[:, 1]
    bx, by = geom.mobile_points[:, 0], geom.mobile_points[:, 1]
    sq = (x + bx * c - by * s - ax) ** 2 + (y + bx * s + by * c - ay) ** 2
    if np.any(sq == 0):
        raise DegenerateGeometry("a guide length vanished (coincident attachment points)")
    return np.sqrt(sq)


def forward_kinematics(lengths, geom: DeviceGeometry) -> np.ndarray:
    """Closed-form planar pose ``[x, y, yaw]`` from the six guide lengths.

    Raises OutOfDomain when |E| > 2|P| and SingularDenominator when the
    common denominator vanishes.
    """
    sq = np.asarray(lengths, dtype=float) ** 2
    L1, L2, L3, L4, L5, L6 = (sq[..., i] for i in range(6))
    E = L4 + L5 - L3 - L6
    F = L3 + L5 - L4 - L6
    G = L2 - L1
    a, b = geom.base_length, geom.base_width
    a_m, b_m = geom.mobile_length, geom.mobile_width
    P, Q, M = geom.P, geom.Q, geom.M

    ratio = E / (2.0 * P)
    bad = np.abs(ratio) > 1.0
    if np.any(bad):
        idx = np.flatnonzero(np.atleast_1d(bad))[0]
        raise OutOfDomain(f"|E| > 2|P| at sample {idx}: arcsine argument {np.atleast_1d(ratio)[idx]:.6g}")
    phi = np.arcsin(ratio)
    # root carries the sign of P so that root = 2 P cos(phi)
    root = math.copysign(1.0, P) * np.sqrt(np.maximum(4.0 * P * P - E * E, 0.0))
    den = 4.0 * Q * root - 8.0 * P * M
    if np.any(np.abs(den) <= 1e-12 * abs(8.0 * P * M)):
        raise SingularDenominator("forward kinematics denominator vanished")
    x = (F * (a_m * root - 2.0 * a * P) - 2.0 * b_m * E * G) / den
    y = (2.0 * G * (b_m * root - 2.0 * b * P) + a_m * E * F) / den
    return np.stack([x, y, phi], axis=-1)


def lengths_from_forces(frame, geom: DeviceGeometry) -> np.ndarray:
    """Hooke's law on the six compression channels: L_i = L_0i +- (f_ci - f_0i) / k_i."""
    forces = _force_array(frame)[..., :6]
    delta = forces - geom.pretension[:6]
    return geom.home_lengths + placement_sign(geom) * delta / geom.stiffness


def pitch_torque(f7, f8, geom: DeviceGeometry):
    """M_x = f7 b7 - f8 b8 (N*cm); torsion springs carry no pretension."""
    d7 = np.asarray(f7, dtype=float) - geom.pretension[6]
    d8 = np.asarray(f8, dtype=float) - geom.pretension[7]
    return d7 * geom.toe_lever - d8 * geom.heel_lever


def pitch_from_forces(f7, f8, geom: DeviceGeometry, clamp=True):
    """Pitch angle (rad) from the sole and heel load cells.

    The stiffness switches with the torque sign: k7 for M_x > 0, k8 otherwise.
    """
    m_x = pitch_torque(f7, f8, geom)
    k7, k8 = geom.torsion_stiffness
    theta = np.where(m_x > 0, m_x / k7, m_x / k8)
    if clamp:
        theta = np.clip(theta, -geom.pitch_limit, geom.pitch_limit)
    return theta[()] if np.ndim(theta) == 0 else theta


def clamp_pose(pose, geom: DeviceGeometry) -> np.ndarray:
    q = _pose_array(pose)
    return np.clip(q, -geom.limits[: q.shape[-1]], geom.limits[: q.shape[-1]])


def pose_from_forces(frame, geom: DeviceGeometry):
    """Kinematic mapping from raw readings to ``[x, y, yaw, pitch]``.

    Poses past the workspace limits (isometric regime) are clamped to the
    boundary, so the returned pose always lies in the workspace. Spring
    saturation is reported by mode_classify, not applied here.
    Returns a PedalPose for a ForceFrame and an array otherwise.
    """
    forces = _force_array(frame)
    lengths = lengths_from_forces(forces, geom)
    planar = forward_kinematics(lengths, geom)
    theta = np.asarray(pitch_from_forces(forces[..., 6], forces[..., 7], geom, clamp=False))
    pose = clamp_pose(np.concatenate([planar, theta[..., None]], axis=-1), geom)
    if isinstance(frame, ForceFrame):
        return PedalPose.from_array(pose)
    return pose


def mode_classify(frame, geom: DeviceGeometry) -> ContactMode:
    """Elastic unless a compression spring is solid or the pedal sits on its pitch stop."""
    forces = _force_array(frame)
    lengths = lengths_from_forces(forces, geom)
    elongation = placement_sign(geom) * (lengths - geom.home_lengths)
    spring_len = np.array([s.installed_length for s in geom.springs[:6]]) - elongation
    solid = np.array([s.fully_compressed_length for s in geom.springs[:6]])
    saturated = {i + 1 for i in np.flatnonzero(spring_len <= solid + 1e-12)}
    theta = pitch_from_forces(forces[6], forces[7], geom, clamp=False)
    if abs(theta) >= geom.pitch_limit - 1e-12:
        saturated.add(7 if theta > 0 else 8)
    return ContactMode(ISOMETRIC if saturated else ELASTIC, frozenset(saturated))


def workspace_contains(pose, geom: DeviceGeometry) -> bool:
    q = _pose_array(pose)
    limits = geom.limits[: q.shape[-1]]
    return bool(np.all(np.abs(q) <= limits))
