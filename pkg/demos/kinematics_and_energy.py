"""Walk through the device model: guide lengths, the closed-form inverse, stiffness and the energy landscape.

Run: python3 demos/kinematics_and_energy.py
"""
import math

import numpy as np

from footinterface.geometry import INSIDE_BASE, default_geometry
from footinterface.kinematics import PedalPose, forward_kinematics, inverse_kinematics, pose_from_forces
from footinterface.statics import energy_scan, stiffness_matrix
from footinterface.synthetic import forces_for_pose

np.set_printoptions(precision=4, suppress=True)
geom = default_geometry()

# a pose in the workspace and the six guide lengths it implies
pose = PedalPose.from_degrees(1.0, -0.5, 5.0)
lengths = inverse_kinematics(pose, geom)
print("guide lengths at (1 cm, -0.5 cm, 5 deg):", lengths)
print("closed-form pose back from the lengths:", forward_kinematics(lengths, geom),
      "(yaw in rad,", math.radians(5.0), ")")

# the load cells see pretension plus Hooke's law; the kinematic mapping inverts that
frame = forces_for_pose(PedalPose.from_degrees(-1.0, 2.0, 6.0, -4.0), geom)
print("\nreadings for (-1, 2, 6 deg, -4 deg):", frame.forces)
print("pose recovered from the readings:", pose_from_forces(frame, geom))

# stiffness felt by the foot at home
print("\nstiffness at home (N/cm, N cm/rad):\n", stiffness_matrix(PedalPose(), geom.pretension, geom))

# the spring placement decides whether home is the only resting pose
for placement in ("outside", INSIDE_BASE):
    scan = energy_scan(geom.with_placement(placement), 51, 51, 25)
    where = [(round(x, 2), round(y, 2), round(math.degrees(p), 2)) for x, y, p in scan.minima]
    print(f"\n{placement} placement: {len(scan.minima)} local minima")
    for m in where:
        print("   x, y, yaw (deg):", m)
