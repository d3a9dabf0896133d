"""Bloch-vector geometry against the explicit 2x2 matrix route."""

import math

import numpy as np
import pytest

from qpurify import (
    BlochState,
    DegenerateAzimuthError,
    Rotation,
    azimuth,
    linear_entropy,
    polar_angle,
    rotate,
)
from qpurify.bloch_core import inverse

from oracles import bloch_from_density, density_from_bloch, entropy_of_density, rotate_oracle

N_RANDOM = 200


def random_state(rng: np.random.Generator) -> BlochState:
    # Uniform direction, radius biased toward the surface; always inside.
    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    radius = rng.random() ** (1.0 / 3.0) * 0.999
    return BlochState(*(radius * direction))


def random_rotation(rng: np.random.Generator) -> Rotation:
    axis = rng.standard_normal(3)
    axis /= np.linalg.norm(axis)
    return Rotation(tuple(axis), float(rng.uniform(-2.0 * math.pi, 2.0 * math.pi)))


def test_state_accepts_ball_and_rejects_outside():
    BlochState(0.0, 0.0, 0.0)
    BlochState(1.0, 0.0, 0.0)
    BlochState(0.6, 0.0, 0.8)
    # Within the validation slack on |a|^2.
    BlochState(math.sqrt(1.0 + 0.5e-12), 0.0, 0.0)
    with pytest.raises(ValueError):
        BlochState(1.0 + 1e-6, 0.0, 0.0)
    with pytest.raises(ValueError):
        BlochState(0.9, 0.9, 0.9)
    with pytest.raises(ValueError):
        BlochState(math.nan, 0.0, 0.0)
    with pytest.raises(ValueError):
        BlochState(0.0, math.inf, 0.0)


def test_density_matrix_matches_pauli_expansion():
    rng = np.random.default_rng(11)
    for _ in range(N_RANDOM):
        state = random_state(rng)
        rho = state.density_matrix()
        ref = density_from_bloch(state.ax, state.ay, state.az)
        assert np.max(np.abs(rho - ref)) < 1e-15
        assert abs(np.trace(rho) - 1.0) < 1e-15
        assert np.max(np.abs(rho - rho.conj().T)) < 1e-15
        back = bloch_from_density(rho)
        assert max(abs(b - a) for b, a in zip(back, (state.ax, state.ay, state.az))) < 1e-15


def test_linear_entropy_matches_impurity_and_bounds():
    rng = np.random.default_rng(12)
    for _ in range(N_RANDOM):
        state = random_state(rng)
        p = linear_entropy(state)
        assert 0.0 <= p <= 0.5
        assert abs(p - entropy_of_density(state.density_matrix())) < 1e-14
    assert linear_entropy(BlochState(0.0, 0.0, 0.0)) == 0.5
    assert linear_entropy(BlochState(0.0, 0.0, 1.0)) == 0.0
    # Slightly-long vectors inside the slack clamp to zero, never negative.
    assert linear_entropy(BlochState(math.sqrt(1.0 + 0.5e-12), 0.0, 0.0)) == 0.0


def test_rotation_requires_unit_axis_and_finite_angle():
    Rotation((0.0, 1.0, 0.0), 2.0)
    with pytest.raises(ValueError):
        Rotation((0.0, 2.0, 0.0), 1.0)
    with pytest.raises(ValueError):
        Rotation((0.0, 0.0, 0.0), 1.0)
    with pytest.raises(ValueError):
        Rotation((0.0, 1.0, 0.0), math.inf)


def test_rotate_matches_unitary_conjugation():
    rng = np.random.default_rng(13)
    for _ in range(N_RANDOM):
        state = random_state(rng)
        r = random_rotation(rng)
        turned = rotate(state, r)
        ref = bloch_from_density(rotate_oracle(state.density_matrix(), r.axis, r.angle))
        assert abs(turned.ax - ref[0]) < 1e-12
        assert abs(turned.ay - ref[1]) < 1e-12
        assert abs(turned.az - ref[2]) < 1e-12


def test_rotate_preserves_norm_and_entropy():
    rng = np.random.default_rng(14)
    for _ in range(N_RANDOM):
        state = random_state(rng)
        r = random_rotation(rng)
        turned = rotate(state, r)
        assert abs(turned.norm() - state.norm()) < 1e-12
        assert abs(linear_entropy(turned) - linear_entropy(state)) < 1e-12


def test_rotate_composes_and_inverts():
    rng = np.random.default_rng(15)
    for _ in range(50):
        state = random_state(rng)
        axis = rng.standard_normal(3)
        axis = tuple(axis / np.linalg.norm(axis))
        a, b = rng.uniform(-math.pi, math.pi, size=2)
        two_step = rotate(rotate(state, Rotation(axis, a)), Rotation(axis, b))
        one_step = rotate(state, Rotation(axis, a + b))
        assert abs(two_step.ax - one_step.ax) < 1e-10
        assert abs(two_step.ay - one_step.ay) < 1e-10
        assert abs(two_step.az - one_step.az) < 1e-10
        r = Rotation(axis, a)
        back = rotate(rotate(state, r), inverse(r))
        assert abs(back.ax - state.ax) < 1e-10
        assert abs(back.ay - state.ay) < 1e-10
        assert abs(back.az - state.az) < 1e-10


def test_azimuth_quadrants_and_range():
    assert azimuth(BlochState(1.0, 0.0, 0.0)) == 0.0
    assert abs(azimuth(BlochState(0.0, 1.0, 0.0)) - 0.5 * math.pi) < 1e-15
    assert abs(azimuth(BlochState(-1.0, 0.0, 0.0)) - math.pi) < 1e-15
    assert abs(azimuth(BlochState(0.0, -1.0, 0.0)) - 1.5 * math.pi) < 1e-15
    rng = np.random.default_rng(16)
    for _ in range(N_RANDOM):
        state = random_state(rng)
        if state.ax == 0.0 and state.ay == 0.0:
            continue
        phi = azimuth(state)
        assert 0.0 <= phi < 2.0 * math.pi
        assert abs(math.hypot(state.ax, state.ay) * math.cos(phi) - state.ax) < 1e-12
        assert abs(math.hypot(state.ax, state.ay) * math.sin(phi) - state.ay) < 1e-12


def test_azimuth_degenerate_raises():
    with pytest.raises(DegenerateAzimuthError):
        azimuth(BlochState(0.0, 0.0, 0.7))
    with pytest.raises(DegenerateAzimuthError):
        azimuth(BlochState(0.0, 0.0, 0.0))


def test_polar_angle_poles_equator_and_convention():
    assert polar_angle(BlochState(0.0, 0.0, 1.0)) == 0.0
    assert abs(polar_angle(BlochState(0.0, 0.0, -1.0)) - math.pi) < 1e-15
    assert abs(polar_angle(BlochState(0.3, -0.4, 0.0)) - 0.5 * math.pi) < 1e-15
    # Completely mixed: no direction, pi/2 by convention.
    assert polar_angle(BlochState(0.0, 0.0, 0.0)) == 0.5 * math.pi
    rng = np.random.default_rng(17)
    for _ in range(N_RANDOM):
        state = random_state(rng)
        theta = polar_angle(state)
        assert 0.0 <= theta <= math.pi
        assert abs(state.norm() * math.cos(theta) - state.az) < 1e-12
