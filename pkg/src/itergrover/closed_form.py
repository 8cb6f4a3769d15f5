"""Closed-form models of the two-level dynamics: amplitude evolution of the
parallel Grover for k=2 and its picture as a rotation of a 3-vector.

The parallel Grover iterated round(c*sqrt(N)) times from the source moves the
amplitudes along (sin^2, sqrt(2)*sin*cos, cos^2) of sqrt(2)*c over the labels
(ee, eN, NN); full transfer to the sink happens at c = pi/(2*sqrt(2)), the
sqrt(2) speedup over the two-stage sequential run.  The same trajectory is a
rigid rotation: quaternions below use the convention that (cos c, sin c * axis)
rotates vectors by -2c about the axis (axes ordered ee, eN, NN), chosen so the
rotated source coordinates reproduce the amplitude evolution with its signs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "pg2_amplitudes",
    "Quaternion",
    "quaternion_of",
    "quaternion_multiply",
    "quaternion_to_rotation",
    "PG2_FULL_TRANSFER_COEFF",
]

# sqrt(2)*c = pi/2: all amplitude on the sink
PG2_FULL_TRANSFER_COEFF = math.pi / (2.0 * math.sqrt(2.0))


def pg2_amplitudes(c: float) -> tuple[float, float, float]:
    """Amplitudes on (ee, eN, NN) after running the k=2 parallel Grover to
    scaled iteration count c from the source state."""
    if c < 0:
        raise ValueError(f"c must be >= 0, got {c}")
    a = math.sqrt(2.0) * c
    s, co = math.sin(a), math.cos(a)
    return s * s, math.sqrt(2.0) * s * co, co * co


@dataclass(frozen=True)
class Quaternion:
    """Unit quaternion (w, xyz) over the axes (ee, eN, NN)."""

    w: float
    xyz: tuple[float, float, float]

    def norm(self) -> float:
        return math.sqrt(self.w ** 2 + sum(v * v for v in self.xyz))


_AXES = {
    "SG1": (1.0, 0.0, 0.0),  # ee
    "SG2": (0.0, 0.0, 1.0),  # NN
    "PG2": (1.0 / math.sqrt(2.0), 0.0, 1.0 / math.sqrt(2.0)),
}
_SPEED = {"SG1": 1.0, "SG2": 1.0, "PG2": math.sqrt(2.0)}


def quaternion_of(op: str, c: float) -> Quaternion:
    """Rotation quaternion of SG1, SG2 or PG2 run to scaled count c."""
    if op not in _AXES:
        raise ValueError(f"unknown operator {op!r}; expected SG1, SG2 or PG2")
    angle = _SPEED[op] * c
    ax = _AXES[op]
    s = math.sin(angle)
    return Quaternion(math.cos(angle), (s * ax[0], s * ax[1], s * ax[2]))


def quaternion_multiply(q1: Quaternion, q2: Quaternion) -> Quaternion:
    """Hamilton product q1*q2.  Under the rotation convention used here the
    product q1*q2 is the rotation applying q1 first, then q2."""
    w1, (x1, y1, z1) = q1.w, q1.xyz
    w2, (x2, y2, z2) = q2.w, q2.xyz
    return Quaternion(
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        (
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 + y1 * w2 + z1 * x2 - x1 * z2,
            w1 * z2 + z1 * w2 + x1 * y2 - y1 * x2,
        ),
    )


def quaternion_to_rotation(q: Quaternion) -> np.ndarray:
    """Euler-Rodrigues rotation matrix of the quaternion.

    Orientation: (cos c, sin c * axis) maps to rotation by -2c about the axis,
    so that quaternion_to_rotation(quaternion_of("PG2", c)) applied to the
    source unit vector (0, 0, 1) equals pg2_amplitudes(c).
    """
    if abs(q.norm() - 1.0) > 1e-9:
        raise ValueError(f"non-unit quaternion, |q| = {q.norm()}")
    # negating the vector part flips the rotation sense
    w = q.w
    x, y, z = (-v for v in q.xyz)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )
