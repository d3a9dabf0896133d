"""Qubit state of knowledge on the Bloch sphere.

A single-qubit density matrix rho = (I + a.sigma)/2 is stored as the real
vector a = (ax, ay, az). Linear entropy, the polar decomposition of a, and
rigid rotations (the Bloch picture of unitary conjugation) live here. The
2x2 complex matrix view exists for cross-checks only; all production paths
stay in Bloch form, where trace preservation is automatic and the purity
bound is a single norm comparison.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateAzimuthError

# Round-off budgets: algebraic identities hold to NORM_TOL, chains of two or
# three operations to COMPOSED_TOL.
NORM_TOL = 1e-12
COMPOSED_TOL = 1e-10

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class BlochState:
    """Bloch vector of a qubit state of knowledge, |a| <= 1."""

    ax: float
    ay: float
    az: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.ax) and math.isfinite(self.ay) and math.isfinite(self.az)):
            raise ValueError("Bloch components must be finite")
        norm_sq = self.ax * self.ax + self.ay * self.ay + self.az * self.az
        if norm_sq > 1.0 + NORM_TOL:
            raise ValueError(f"Bloch vector leaves the unit ball: |a|^2 = {norm_sq!r}")

    def norm(self) -> float:
        """Length of the Bloch vector; 1 for pure states, 0 for the mixed state."""
        return math.sqrt(self.ax * self.ax + self.ay * self.ay + self.az * self.az)

    def density_matrix(self) -> np.ndarray:
        """2x2 complex view (I + a.sigma)/2, for cross-checks against matrix algebra."""
        return 0.5 * np.array(
            [
                [1.0 + self.az, self.ax - 1j * self.ay],
                [self.ax + 1j * self.ay, 1.0 - self.az],
            ],
            dtype=complex,
        )


@dataclass(frozen=True)
class Rotation:
    """Axis-angle record of the unitary exp(-i (angle/2) axis.sigma)."""

    axis: tuple[float, float, float]
    angle: float

    def __post_init__(self) -> None:
        nx, ny, nz = self.axis
        norm = math.sqrt(nx * nx + ny * ny + nz * nz)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"rotation axis must be a unit vector, got |n| = {norm!r}")
        if not math.isfinite(self.angle):
            raise ValueError("rotation angle must be finite")


def inverse(r: Rotation) -> Rotation:
    """Rotation undoing r (same axis, opposite angle)."""
    return Rotation(r.axis, -r.angle)


def linear_entropy(state: BlochState) -> float:
    """Linear entropy 1 - Tr[rho^2] = (1 - |a|^2)/2, in [0, 1/2]."""
    norm_sq = state.ax * state.ax + state.ay * state.ay + state.az * state.az
    # |a|^2 may exceed 1 by the NORM_TOL slack; never report a negative entropy.
    return max(0.0, 0.5 * (1.0 - norm_sq))


def rotate(state: BlochState, r: Rotation) -> BlochState:
    """Rigid rotation of a about r.axis by r.angle (Rodrigues form).

    Equals conjugation U rho U-dagger with U = exp(-i (angle/2) axis.sigma),
    so |a| and the entropy are unchanged.
    """
    nx, ny, nz = r.axis
    norm = math.sqrt(nx * nx + ny * ny + nz * nz)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"rotation axis must be a unit vector, got |n| = {norm!r}")
    vx, vy, vz = state.ax, state.ay, state.az
    c = math.cos(r.angle)
    s = math.sin(r.angle)
    n_dot_v = nx * vx + ny * vy + nz * vz
    cross_x = ny * vz - nz * vy
    cross_y = nz * vx - nx * vz
    cross_z = nx * vy - ny * vx
    k = n_dot_v * (1.0 - c)
    return BlochState(
        vx * c + cross_x * s + nx * k,
        vy * c + cross_y * s + ny * k,
        vz * c + cross_z * s + nz * k,
    )


def azimuth(state: BlochState) -> float:
    """Azimuthal angle phi = atan2(ay, ax), normalized to [0, 2*pi).

    Undefined on the z-axis; callers handle that case with the degenerate
    convention of the feedback module.
    """
    if state.ax == 0.0 and state.ay == 0.0:
        raise DegenerateAzimuthError("azimuth undefined for ax = ay = 0")
    phi = math.atan2(state.ay, state.ax)
    if phi < 0.0:
        phi += TWO_PI
    return phi


def polar_angle(state: BlochState) -> float:
    """Polar angle theta between a and the z-axis, in [0, pi].

    The completely mixed state has no direction; return pi/2 by convention,
    the value the optimal feedback strategy enforces.
    """
    r_xy = math.hypot(state.ax, state.ay)
    if r_xy == 0.0 and state.az == 0.0:
        return 0.5 * math.pi
    return math.atan2(r_xy, state.az)
