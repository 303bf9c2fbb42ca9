"""Spin-1/2 statistics in the x-y plane on a grid of pi/4 steps.

Outcome +1 means "spin along the analyzer direction".  A pure state pointing
at azimuth ``phi`` gives +1 along ``theta`` with probability
``cos^2((theta - phi) / 2)``; the singlet yields anti-correlated outcomes
with probability ``cos^2((a - b) / 2)``.

Every angle in the protocol is a multiple of pi/4, so the half-angle cosines
only take the values 0, sin^2(pi/8), 1/2, cos^2(pi/8), 1.  They are
tabulated once in :data:`HALF_ANGLE_COS2`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

COS2_PI_8 = (2.0 + math.sqrt(2.0)) / 4.0
SIN2_PI_8 = (2.0 - math.sqrt(2.0)) / 4.0

# cos^2(d * pi / 8) for an angle difference of d eighths-of-a-turn (d mod 8).
HALF_ANGLE_COS2 = np.array(
    [1.0, COS2_PI_8, 0.5, SIN2_PI_8, 0.0, SIN2_PI_8, 0.5, COS2_PI_8]
)


@dataclass(frozen=True, order=True)
class Angle:
    """Azimuth as an integer multiple of pi/4, kept modulo 8."""

    eighths: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "eighths", int(self.eighths) % 8)

    def __add__(self, other: Angle | int) -> Angle:
        step = other.eighths if isinstance(other, Angle) else int(other)
        return Angle(self.eighths + step)

    def __sub__(self, other: Angle | int) -> Angle:
        step = other.eighths if isinstance(other, Angle) else int(other)
        return Angle(self.eighths - step)

    def flipped(self) -> Angle:
        """The antipodal direction (rotation by pi)."""
        return Angle(self.eighths + 4)

    @property
    def radians(self) -> float:
        return self.eighths * math.pi / 4

    def __repr__(self) -> str:
        return f"Angle({self.eighths}*pi/4)"


ALPHA = (Angle(0), Angle(2))
BETA = (Angle(0), Angle(2), Angle(1), Angle(3))


@dataclass(frozen=True)
class SettingGeometry:
    """Analyzer azimuths: Alice has two, Bob four (two shared, two rotated by pi/4)."""

    alpha: tuple[Angle, Angle] = ALPHA
    beta: tuple[Angle, Angle, Angle, Angle] = BETA

    def alice(self, i: int) -> Angle:
        return self.alpha[i - 1]

    def bob(self, j: int) -> Angle:
        return self.beta[j - 1]


GEOMETRY = SettingGeometry()


@dataclass(frozen=True)
class ProductPair:
    """Directions of the pure states Eve prepares for Alice's and Bob's particle."""

    phi_a: Angle
    phi_b: Angle

    def flipped(self) -> ProductPair:
        return ProductPair(self.phi_a.flipped(), self.phi_b.flipped())


def half_angle_cos2(delta: Angle) -> float:
    return float(HALF_ANGLE_COS2[delta.eighths])


def up_probability(analyzer: Angle, state: Angle) -> float:
    """Probability of +1 along ``analyzer`` for a pure state at ``state``."""
    return half_angle_cos2(analyzer - state)


def singlet_anticorrelation(a: Angle, b: Angle) -> float:
    """``P(X = -Y)`` for the singlet measured along azimuths ``a`` and ``b``."""
    return half_angle_cos2(a - b)


def product_anticorrelation(pair: ProductPair, a: Angle, b: Angle) -> float:
    """``P(X = -Y)`` for independent local measurements on a product state."""
    u = up_probability(a, pair.phi_a)
    v = up_probability(b, pair.phi_b)
    return u * (1.0 - v) + (1.0 - u) * v


def singlet_chsh(geometry: SettingGeometry = GEOMETRY) -> float:
    """Singlet value of ``P13 + P23 + P24 - P14``; equals 1 + sqrt(2)."""
    def p(i: int, j: int) -> float:
        return singlet_anticorrelation(geometry.alice(i), geometry.bob(j))

    return p(1, 3) + p(2, 3) + p(2, 4) - p(1, 4)
