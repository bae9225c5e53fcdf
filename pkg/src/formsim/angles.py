"""Angle helpers shared by the kinematics, estimator, and control modules."""

import math

TWO_PI = 2.0 * math.pi


def wrap_angle(angle: float) -> float:
    """Wrap an angle to the interval (-pi, pi].

    The upper end is inclusive so that pi and -pi map to the same
    representative (pi), keeping heading comparisons single-valued.
    Values already in range pass through bit-exactly.
    """
    if -math.pi < angle <= math.pi:
        return angle
    return math.pi - (math.pi - angle) % TWO_PI


def angle_difference(a: float, b: float) -> float:
    """Shortest-arc signed difference a - b, wrapped to (-pi, pi]."""
    return wrap_angle(a - b)
