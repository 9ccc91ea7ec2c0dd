"""Direction labels used by the experiment protocol.

Command/pose axes are ordered (x, y, yaw, pitch). +y is forward, +x right,
positive yaw turns the toe left (left torsion), positive pitch is toe up.
"""
from __future__ import annotations

import math

import numpy as np

X, Y, YAW, PITCH = range(4)
DOF_NAMES = ("x", "y", "phi", "theta")

# label -> (axis, sign)
SINGLE = {
    "F": (Y, 1),
    "B": (Y, -1),
    "L": (X, -1),
    "R": (X, 1),
    "TU": (PITCH, 1),
    "TD": (PITCH, -1),
    "LT": (YAW, 1),
    "RT": (YAW, -1),
}
SINGLE_ORDER = ("F", "B", "L", "R", "TU", "TD", "LT", "RT")

# label -> the two single directions it combines; the first names the axis
# the diagonal is rotated onto when scoring
DIAGONAL = {
    "LF": ("L", "F"),
    "RF": ("R", "F"),
    "LB": ("L", "B"),
    "RB": ("R", "B"),
    "LTU": ("L", "TU"),
    "RTU": ("R", "TU"),
    "LTD": ("L", "TD"),
    "RTD": ("R", "TD"),
    "FTU": ("F", "TU"),
    "BTU": ("B", "TU"),
    "FTD": ("F", "TD"),
    "BTD": ("B", "TD"),
}
DIAGONAL_ORDER = tuple(DIAGONAL)

# calibration axis pairs: DOF row of the mapping -> (positive, negative) label
AXIS_PAIRS = {
    X: ("R", "L"),
    Y: ("F", "B"),
    YAW: ("LT", "RT"),
    PITCH: ("TU", "TD"),
}

ALL_LABELS = SINGLE_ORDER + DIAGONAL_ORDER


def is_diagonal(label: str) -> bool:
    return label in DIAGONAL


def direction_vector(label: str) -> np.ndarray:
    """Unit 4-vector of a single or diagonal direction."""
    v = np.zeros(4)
    if label in SINGLE:
        axis, sign = SINGLE[label]
        v[axis] = sign
        return v
    if label in DIAGONAL:
        for part in DIAGONAL[label]:
            axis, sign = SINGLE[part]
            v[axis] = sign
        return v / math.sqrt(2.0)
    raise ValueError(f"unknown direction label {label!r}")


def direction_endpoint(label: str) -> np.ndarray:
    """Where a centre-out ray along ``label`` leaves the unit box [-1, 1]^4."""
    v = direction_vector(label)
    return v / np.abs(v).max()
