"""Independent oracle for the ZYX Euler rotation matrix.

Uses scipy's Rotation (extrinsic-capital convention: 'ZYX' applies Rz*Ry*Rx)
to pin reference entries for rotation_zyx(roll, pitch, yaw).

Run: python3 rotation_zyx.py
"""
import numpy as np
from scipy.spatial.transform import Rotation

roll, pitch, yaw = 0.1, 0.2, 0.3
r = Rotation.from_euler("ZYX", [yaw, pitch, roll]).as_matrix()
np.set_printoptions(precision=17)
print("R(roll=0.1, pitch=0.2, yaw=0.3) =")
for row in r:
    print("  ", ", ".join(f"{v:.17g}" for v in row))

v = r @ np.array([4.0, 0.0, -3.0])
print("R @ (4,0,-3) =", ", ".join(f"{x:.17g}" for x in v))
