"""From raw load-cell readings to a reference-point track, its path error and smoothness.

Run: python3 demos/trial_metrics.py
"""
import math

import numpy as np

from footinterface.geometry import default_geometry
from footinterface.signals import (foot_path_error, pose_trajectory, reference_track, smoothness_sparc,
                                   velocity_filter)
from footinterface.synthetic import SyntheticSubject, generate_trial

np.set_printoptions(precision=3, suppress=True)
geom = default_geometry()


def rotation_xy(deg):
    a = math.radians(deg)
    r = np.eye(4)
    r[0, 0] = r[1, 1] = math.cos(a)
    r[0, 1], r[1, 0] = -math.sin(a), math.sin(a)
    return r


subjects = {
    "ideal subject": SyntheticSubject("01"),
    "noisy subject": SyntheticSubject("02", noise_sigma=0.05, seed=1),
    "subject bending 20 deg": SyntheticSubject("03", rotation_xy(20.0), noise_sigma=0.05, seed=2),
}

for name, subject in subjects.items():
    trial = generate_trial(subject, "F", geom)
    poses = pose_trajectory(trial, geom)  # 9-sample moving average, then the kinematic mapping
    track = reference_track(poses, trial.t, geom)
    moving = velocity_filter(track)  # drop rest and hold samples below 0.005 m/s
    print(f"{name}: {len(trial)} frames, {len(moving)} moving, "
          f"peak P = {track.p[np.argmax(track.p[:, 1])]} cm")
    print(f"    foot-path error {foot_path_error(moving, 'F'):.3f} cm, SPARC {smoothness_sparc(moving):.3f}")
