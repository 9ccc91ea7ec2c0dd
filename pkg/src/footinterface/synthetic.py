"""Synthetic subjects: labelled 50 Hz force trials with known motion biases.

A subject moves along an intended command ray c(t) in the unit box; the
motion it actually produces is A c(t), where A is the subject's command-space
distortion. The distorted command is turned into a pedal pose, the pose into
load-cell readings (the exact inverse of the kinematic mapping), and the
readings are scaled per channel and corrupted with Gaussian noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .directions import ALL_LABELS, DIAGONAL_ORDER, SINGLE_ORDER, direction_endpoint
from .errors import OutOfWorkspace
from .geometry import DeviceGeometry
from .kinematics import ForceFrame, PedalPose, _pose_array, inverse_kinematics, placement_sign
from .signals import SAMPLE_INTERVAL, TrialRecord

MINIMUM_JERK = "minimum_jerk"
TRAPEZOID = "trapezoid"
TRIALS_PER_DIRECTION = 3


@dataclass(frozen=True)
class MotionProfile:
    """Centre-out stroke, hold at the boundary and optional return, with rest at both ends."""

    duration: float = 2.0
    shape: str = MINIMUM_JERK
    hold: float = 1.0
    returns: bool = True
    rest: float = 0.2

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("stroke duration must be positive")
        if self.hold < 0 or self.rest < 0:
            raise ValueError("hold and rest must be non-negative")
        if self.shape not in (MINIMUM_JERK, TRAPEZOID):
            raise ValueError(f"unknown profile shape {self.shape!r}")

    def _stroke(self, tau):
        tau = np.clip(tau, 0.0, 1.0)
        if self.shape == MINIMUM_JERK:
            return tau ** 3 * (10 - 15 * tau + 6 * tau ** 2)
        # trapezoidal velocity, a third of the stroke each for ramp up, cruise and ramp down
        return np.where(tau < 1 / 3, 2.25 * tau ** 2,
                        np.where(tau < 2 / 3, 1.5 * tau - 0.25, 1 - 2.25 * (1 - tau) ** 2))

    @property
    def total(self) -> float:
        return 2 * self.rest + self.duration * (2 if self.returns else 1) + self.hold

    def progress(self, t):
        """Fraction of the way to the boundary, in [0, 1], at times ``t``."""
        t = np.asarray(t, dtype=float) - self.rest
        out = self._stroke(t / self.duration)
        if self.returns:
            back = t - self.duration - self.hold
            out = np.where(back > 0, 1.0 - self._stroke(back / self.duration), out)
        return out

    def times(self, dt: float = SAMPLE_INTERVAL) -> np.ndarray:
        n = int(round(self.total / dt)) + 1
        return np.arange(n) * dt


# ---------------------------------------------------------------------------
# pose <-> forces


def forces_for_pose(pose, geom: DeviceGeometry):
    """Readings that the kinematic mapping turns back into ``pose``.

    Hooke's law on the guide extensions gives channels 1-6; pitch is realized
    with one cell only (sole for toe-up, heel for toe-down).
    Returns a ForceFrame for a PedalPose and an (..., 8) array otherwise.
    """
    q = _pose_array(pose)
    if np.any(np.abs(q) > geom.limits[: q.shape[-1]] * (1 + 1e-12)):
        raise OutOfWorkspace("pose outside the workspace")
    lengths = inverse_kinematics(q, geom)
    planar = geom.pretension[:6] + placement_sign(geom) * geom.stiffness * (lengths - geom.home_lengths)
    theta = q[..., 3] if q.shape[-1] > 3 else np.zeros(q.shape[:-1])
    k7, k8 = geom.torsion_stiffness
    f7 = np.where(theta > 0, k7 * theta / geom.toe_lever, 0.0) + geom.pretension[6]
    f8 = np.where(theta < 0, -k8 * theta / geom.heel_lever, 0.0) + geom.pretension[7]
    forces = np.concatenate([planar, f7[..., None], f8[..., None]], axis=-1)
    if isinstance(pose, PedalPose):
        return ForceFrame(0.0, forces)
    return forces


def command_to_pose(commands, geom: DeviceGeometry) -> np.ndarray:
    """Pose whose scaled reference point equals the normalized command exactly."""
    c = np.asarray(commands, dtype=float)
    yaw = 2.0 * np.arcsin(c[..., 2] * math.sin(geom.yaw_limit / 2.0))
    pitch = np.arcsin(c[..., 3] * math.sin(geom.pitch_limit))
    return np.stack([c[..., 0] * geom.x_limit, c[..., 1] * geom.y_limit, yaw, pitch], axis=-1)


# ---------------------------------------------------------------------------
# subjects


@dataclass(frozen=True)
class SyntheticSubject:
    subject_id: str
    distortion: np.ndarray = field(default_factory=lambda: np.eye(4))
    channel_gain: np.ndarray = field(default_factory=lambda: np.ones(8))
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        a = np.array(self.distortion, dtype=float)
        g = np.array(self.channel_gain, dtype=float)
        if a.shape != (4, 4):
            raise ValueError("distortion must be 4x4")
        if g.shape != (8,) or np.any(g <= 0):
            raise ValueError("channel gain must be 8 positive values")
        if not np.isfinite(np.linalg.cond(a)) or np.linalg.cond(a) >= 100:
            raise ValueError("distortion must be invertible with condition number < 100")
        if not 0.0 <= self.noise_sigma <= 0.2:
            raise ValueError("noise_sigma must lie in [0, 0.2]")
        a.flags.writeable = False
        g.flags.writeable = False
        object.__setattr__(self, "distortion", a)
        object.__setattr__(self, "channel_gain", g)

    def trial_rng(self, dataset: int, direction: str, trial: int) -> np.random.Generator:
        """Per-trial stream: the subject seed mixed with (dataset, direction, trial)."""
        key = (int(dataset), ALL_LABELS.index(direction), int(trial))
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=key))


def intended_path(subject: SyntheticSubject, direction: str, profile: MotionProfile,
                  dt: float = SAMPLE_INTERVAL):
    """Times, distorted commands and whether the path had to be clipped to the box."""
    t = profile.times(dt)
    c = profile.progress(t)[:, None] * direction_endpoint(direction)
    distorted = c @ subject.distortion.T
    clipped = bool(np.any(np.abs(distorted) > 1.0))
    return t, np.clip(distorted, -1.0, 1.0), clipped


def generate_trial(subject: SyntheticSubject, direction: str, geom: DeviceGeometry,
                   profile: MotionProfile = MotionProfile(), trial: int = 1,
                   dataset: int = 1) -> TrialRecord:
    """One labelled trial; deterministic in (subject, direction, dataset, trial)."""
    t, commands, _ = intended_path(subject, direction, profile)
    forces = forces_for_pose(command_to_pose(commands, geom), geom)
    f0 = geom.pretension
    forces = f0 + subject.channel_gain * (forces - f0)
    if subject.noise_sigma > 0:
        rng = subject.trial_rng(dataset, direction, trial)
        sigma = subject.noise_sigma * geom.full_scale_forces
        forces = forces + rng.normal(size=forces.shape) * sigma
    forces = np.maximum(forces, 0.0)
    return TrialRecord(direction, t, forces, subject.subject_id, trial, dataset)


# ---------------------------------------------------------------------------
# cohorts


@dataclass(frozen=True)
class CohortSpec:
    n_subjects: int = 10
    seed: int = 0
    rotation_deg: tuple = (10.0, 30.0)
    skew_max: float = 0.3
    gain_range: tuple = (0.8, 1.2)
    noise_sigma: float = 0.05
    profile: MotionProfile = MotionProfile()

    def __post_init__(self):
        if self.n_subjects < 1:
            raise ValueError("a cohort needs at least one subject")
        lo, hi = self.rotation_deg
        if not 0 <= lo <= hi:
            raise ValueError("rotation range must satisfy 0 <= lo <= hi")
        if self.skew_max < 0:
            raise ValueError("skew_max must be non-negative")


def _plane_rotation(i, j, angle):
    r = np.eye(4)
    c, s = math.cos(angle), math.sin(angle)
    r[i, i], r[i, j], r[j, i], r[j, j] = c, -s, s, c
    return r


# a subject bends motion within the x-y, x-theta and y-theta planes; skew couples the rest
DISTORTION_PLANES = ((0, 1), (0, 3), (1, 3))


def random_distortion(rng: np.random.Generator, rotation_deg=(10.0, 30.0), skew_max=0.3):
    """Plane rotations of random sign and magnitude, then a bounded off-diagonal skew."""
    a = np.eye(4)
    for i, j in DISTORTION_PLANES:
        angle = math.radians(rng.uniform(*rotation_deg)) * rng.choice((-1.0, 1.0))
        a = _plane_rotation(i, j, angle) @ a
    skew = np.eye(4)
    iu = np.triu_indices(4, 1)
    skew[iu] = rng.uniform(-skew_max, skew_max, size=len(iu[0]))
    return skew @ a


def make_subject(index: int, spec: CohortSpec, rng: np.random.Generator) -> SyntheticSubject:
    distortion = random_distortion(rng, spec.rotation_deg, spec.skew_max)
    gain = rng.uniform(*spec.gain_range, size=8)
    seed = int(rng.integers(0, 2 ** 31 - 1))
    return SyntheticSubject(f"{index + 1:02d}", distortion, gain, spec.noise_sigma, seed)


def cohort_subjects(spec: CohortSpec) -> list:
    streams = np.random.SeedSequence(spec.seed).spawn(spec.n_subjects)
    return [make_subject(i, spec, np.random.default_rng(s)) for i, s in enumerate(streams)]


# (dataset, directions): two single-direction sets and one diagonal set
PROTOCOL = ((1, SINGLE_ORDER), (2, SINGLE_ORDER), (3, DIAGONAL_ORDER))


def protocol_trials():
    """(dataset, direction, trial) in recording order: 2 x 24 single + 36 diagonal."""
    for dataset, labels in PROTOCOL:
        for label in labels:
            for trial in range(1, TRIALS_PER_DIRECTION + 1):
                yield dataset, label, trial


def subject_trials(subject: SyntheticSubject, geom: DeviceGeometry,
                   profile: MotionProfile = MotionProfile(), datasets=(1, 2, 3)):
    for dataset, label, trial in protocol_trials():
        if dataset in datasets:
            yield generate_trial(subject, label, geom, profile, trial, dataset)
