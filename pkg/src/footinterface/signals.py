"""Offline processing of 50 Hz load-cell trials and the trajectory metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .directions import ALL_LABELS, direction_vector
from .errors import (AllStatic, EmptySeries, EmptyTrack, FootInterfaceError, TooShort)
from .geometry import DeviceGeometry
from .kinematics import pose_from_forces

SAMPLE_RATE = 50.0
SAMPLE_INTERVAL = 1.0 / SAMPLE_RATE
FILTER_WINDOW = 9
YAW_SCALE = 2.0 / 2.5
VELOCITY_THRESHOLD = 0.005  # m/s
HOME_SAMPLES = 5


@dataclass(frozen=True)
class TrialRecord:
    """A labelled centre-out trial: timestamps (s) and raw readings (n x 8, N)."""

    direction: str
    t: np.ndarray = field(compare=False)
    forces: np.ndarray = field(compare=False)
    subject_id: str = ""
    trial: int = 1
    dataset: int = 1

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        forces = np.asarray(self.forces, dtype=float)
        if self.direction not in ALL_LABELS:
            raise ValueError(f"unknown direction label {self.direction!r}")
        if t.ndim != 1 or t.size < 2:
            raise ValueError("a trial needs at least 2 frames")
        if forces.shape != (t.size, 8):
            raise ValueError("forces must be an (n, 8) array matching the timestamps")
        dt = np.diff(t)
        if np.any(dt <= 0):
            raise ValueError("timestamps must be strictly increasing")
        if np.any(np.abs(dt - SAMPLE_INTERVAL) > 0.1 * SAMPLE_INTERVAL):
            raise ValueError("sample interval deviates from 0.02 s by more than 10%")
        if not np.all(np.isfinite(forces)) or np.any(forces < 0):
            raise ValueError("readings must be finite and non-negative")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "forces", forces)

    def __len__(self):
        return self.t.size


@dataclass(frozen=True)
class ReferenceTrack:
    """Displacement of the reference point P: columns P_x, P_y, s*P_phi, P_theta (cm)."""

    t: np.ndarray
    p: np.ndarray
    home: np.ndarray = field(default_factory=lambda: np.zeros(4))

    def __len__(self):
        return self.t.size


def moving_average(series, window: int = FILTER_WINDOW) -> np.ndarray:
    """Centred moving average along axis 0.

    Near the ends the window shrinks symmetrically, so sample ``i`` averages
    ``i - h .. i + h`` with ``h = min(window // 2, i, n - 1 - i)``.
    """
    x = np.asarray(series, dtype=float)
    if x.shape[0] == 0:
        raise EmptySeries("cannot filter an empty series")
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd count")
    n = x.shape[0]
    csum = np.concatenate([np.zeros((1,) + x.shape[1:]), np.cumsum(x, axis=0)])
    idx = np.arange(n)
    half = np.minimum(window // 2, np.minimum(idx, n - 1 - idx))
    lo, hi = idx - half, idx + half + 1
    width = (hi - lo).reshape((-1,) + (1,) * (x.ndim - 1))
    return (csum[hi] - csum[lo]) / width


class TrialProcessingError(FootInterfaceError):
    def __init__(self, index, cause):
        self.index = index
        self.cause = cause
        super().__init__(f"frame {index}: {cause}")


def pose_trajectory(trial: TrialRecord, geom: DeviceGeometry, window: int = FILTER_WINDOW) -> np.ndarray:
    """Filter every channel, then map each frame to ``[x, y, yaw, pitch]``."""
    smoothed = moving_average(trial.forces, window)
    try:
        return pose_from_forces(smoothed, geom)
    except FootInterfaceError as exc:
        # locate the first offending frame for the report
        for i, row in enumerate(smoothed):
            try:
                pose_from_forces(row, geom)
            except FootInterfaceError as inner:
                raise TrialProcessingError(i, inner) from inner
        raise exc


def reference_point(poses, geom: DeviceGeometry, yaw_scale: float = YAW_SCALE) -> np.ndarray:
    """Displacement of P = (0, d) on the pedal for each pose.

    The yaw component is the signed chord 2 d sin(phi / 2), scaled by ``yaw_scale``.
    """
    q = np.asarray(poses, dtype=float)
    d = geom.reference_offset
    phi = q[..., 2]
    chord = np.sqrt((d * np.sin(phi)) ** 2 + (d - d * np.cos(phi)) ** 2)
    return np.stack(
        [q[..., 0], q[..., 1], yaw_scale * np.sign(phi) * chord, d * np.sin(q[..., 3])], axis=-1
    )


def reference_track(poses, t, geom: DeviceGeometry, home_samples: int = HOME_SAMPLES,
                    yaw_scale: float = YAW_SCALE) -> ReferenceTrack:
    """Reference-point track relative to the calibrated home (mean of the first samples)."""
    p = reference_point(poses, geom, yaw_scale)
    home = p[:home_samples].mean(axis=0) if home_samples > 0 else np.zeros(4)
    return ReferenceTrack(np.asarray(t, dtype=float), p - home, home)


def track_speed(track: ReferenceTrack) -> np.ndarray:
    """Resultant 4-component speed (cm/s), central differences inside, one-sided at the ends."""
    if len(track) < 2:
        raise TooShort("speed needs at least 2 samples")
    vel = np.gradient(track.p, track.t, axis=0)
    return np.linalg.norm(vel, axis=1)


def velocity_filter(track: ReferenceTrack, threshold: float = VELOCITY_THRESHOLD) -> ReferenceTrack:
    """Drop samples whose resultant speed is below ``threshold`` (m/s)."""
    keep = track_speed(track) / 100.0 >= threshold
    if not keep.any():
        raise AllStatic("every sample is below the velocity threshold")
    return ReferenceTrack(track.t[keep], track.p[keep], track.home)


def _points(track):
    return track.p if isinstance(track, ReferenceTrack) else np.asarray(track, dtype=float)


def foot_path_error(track, direction: str) -> float:
    """Mean distance (cm) from each sample to its projection on the desired ray."""
    p = _points(track)
    if p.shape[0] == 0:
        raise EmptyTrack("no samples to score")
    u = direction_vector(direction)
    along = np.maximum(p @ u, 0.0)
    residual = p - along[:, None] * u
    return float(np.linalg.norm(residual, axis=1).mean())


def sparc(speed, fs: float = SAMPLE_RATE, cutoff: float = 10.0, amp_threshold: float = 0.05,
          pad_level: int = 4) -> float:
    """Spectral arc length of a speed profile.

    The magnitude spectrum is zero-padded to ``2 ** (ceil(log2(n)) + pad_level)``
    points and normalized by its 0 Hz value.
    The band is cut at ``cutoff`` Hz and then shrunk to the outermost bins whose
    amplitude reaches ``amp_threshold``. Returns a negative number; values
    closer to 0 mean smoother movement.
    """
    v = np.asarray(speed, dtype=float)
    if v.size < 2:
        raise TooShort("SPARC needs at least 2 samples")
    nfft = 1 << (int(math.ceil(math.log2(v.size))) + pad_level)
    freqs = np.fft.rfftfreq(nfft, d=1.0 / fs)
    mag = np.abs(np.fft.rfft(v, nfft))
    if mag[0] == 0:
        raise ValueError("speed profile has zero mean; spectrum cannot be normalized")
    mag = mag / mag[0]
    band = freqs <= cutoff
    freqs, mag = freqs[band], mag[band]
    above = np.flatnonzero(mag >= amp_threshold)
    sel = slice(above[0], above[-1] + 1)
    freqs, mag = freqs[sel], mag[sel]
    if freqs.size < 2:
        return 0.0
    df = np.diff(freqs) / (freqs[-1] - freqs[0])
    return float(-np.sum(np.sqrt(df * df + np.diff(mag) ** 2)))


def smoothness_sparc(track: ReferenceTrack, min_samples: int = 32, **kwargs) -> float:
    if len(track) < min_samples:
        raise TooShort(f"SPARC needs at least {min_samples} samples, got {len(track)}")
    dt = np.median(np.diff(track.t))
    return sparc(track_speed(track), fs=1.0 / dt, **kwargs)
