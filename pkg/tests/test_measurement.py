"""Weak measurement step against explicit Kraus-operator conjugation."""

import math

import numpy as np
import pytest

from qpurify import (
    BlochState,
    ConfigError,
    MeasurementStrength,
    StepTooLargeError,
    average_purification,
    linear_entropy,
    measure_step,
    outcome_probabilities,
    strength_from_rate,
)

from oracles import bloch_from_density, entropy_of_density, kraus_pair, measure_oracle

N_RANDOM = 200


def random_state(rng: np.random.Generator) -> BlochState:
    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    return BlochState(*(rng.random() ** (1.0 / 3.0) * 0.999 * direction))


def test_strength_construction_and_consistency():
    m = MeasurementStrength(0.7, 0.4)
    assert m.b == 0.4
    assert MeasurementStrength.from_kappa(0.3).b == pytest.approx(0.4, abs=1e-15)
    assert MeasurementStrength.from_b(0.4).kappa == pytest.approx(0.7, abs=1e-15)
    with pytest.raises(ConfigError):
        MeasurementStrength(1.2, 1.4)
    with pytest.raises(ConfigError):
        MeasurementStrength(0.7, 0.5)  # b does not match kappa
    with pytest.raises(ConfigError):
        MeasurementStrength.from_b(1.5)
    with pytest.raises(ConfigError):
        MeasurementStrength.from_b(-0.1)


def test_strength_from_rate_scaling_and_limit():
    rng = np.random.default_rng(21)
    for _ in range(50):
        gamma = float(rng.uniform(0.1, 5.0))
        dt = float(rng.uniform(1e-6, 0.25 / (2.0 * gamma) * 0.99))
        m = strength_from_rate(gamma, dt)
        assert abs(m.b * m.b - 8.0 * gamma * dt) < 1e-14
        assert abs(m.b - abs(2.0 * m.kappa - 1.0)) < 1e-15
    # Boundary 2 gamma dt = 1/4 is a projective step, still allowed.
    assert strength_from_rate(1.0, 0.125).b == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(StepTooLargeError):
        strength_from_rate(1.0, 0.126)
    with pytest.raises(ConfigError):
        strength_from_rate(-1.0, 0.01)
    with pytest.raises(ConfigError):
        strength_from_rate(1.0, 0.0)


def test_kraus_pair_resolves_identity():
    for b in (0.0, 0.1, 0.5, 0.9, 1.0):
        m_plus, m_minus = kraus_pair(b)
        total = m_plus.conj().T @ m_plus + m_minus.conj().T @ m_minus
        assert np.max(np.abs(total - np.eye(2))) < 1e-15


def test_probabilities_match_kraus_trace():
    rng = np.random.default_rng(22)
    for _ in range(N_RANDOM):
        state = random_state(rng)
        b = float(rng.uniform(0.01, 0.99))
        p_plus, p_minus = outcome_probabilities(state, MeasurementStrength.from_b(b))
        assert abs(p_plus + p_minus - 1.0) < 1e-15
        rho = state.density_matrix()
        assert abs(p_plus - measure_oracle(rho, b, +1)[0]) < 1e-14
        assert abs(p_minus - measure_oracle(rho, b, -1)[0]) < 1e-14


def test_posterior_matches_kraus_update():
    rng = np.random.default_rng(23)
    for _ in range(N_RANDOM):
        state = random_state(rng)
        b = float(rng.uniform(0.01, 0.99))
        m = MeasurementStrength.from_b(b)
        p_plus, _ = outcome_probabilities(state, m)
        # u = 0 forces sign +1, u just above p_plus forces sign -1.
        for u, sign in ((0.0, 1), (min(p_plus + 1e-12, 1.0 - 1e-15), -1)):
            outcome = measure_step(state, m, u)
            if outcome.sign != sign:
                continue  # u landed on the wrong side of a razor-thin margin
            prob, rho_post = measure_oracle(state.density_matrix(), b, sign)
            assert abs(outcome.probability - prob) < 1e-14
            ref = bloch_from_density(rho_post)
            assert abs(outcome.post_state.ax - ref[0]) < 1e-12
            assert abs(outcome.post_state.ay - ref[1]) < 1e-12
            assert abs(outcome.post_state.az - ref[2]) < 1e-12
            assert outcome.post_state.norm() <= 1.0 + 1e-12


def test_sign_labeling_drives_az_toward_plus_b():
    # The +1 outcome must increase az for every starting az and any kappa,
    # including kappa < 1/2 where the raw operator labels would swap.
    for kappa in (0.1, 0.3, 0.5001, 0.8):
        m = MeasurementStrength.from_kappa(kappa)
        if m.b == 0.0:
            continue
        for az in (-0.9, -0.3, 0.0, 0.4, 0.9):
            state = BlochState(0.1, 0.0, az)
            up = measure_step(state, m, 0.0)
            down = measure_step(state, m, 0.999999999)
            assert up.sign == 1 and down.sign == -1
            assert up.post_state.az > az
            assert down.post_state.az < az


def test_threshold_between_outcomes():
    state = BlochState(0.2, 0.1, 0.3)
    m = MeasurementStrength.from_b(0.4)
    p_plus, _ = outcome_probabilities(state, m)
    assert measure_step(state, m, p_plus - 1e-9).sign == 1
    assert measure_step(state, m, p_plus).sign == -1


def test_equator_entropy_contraction_is_exact():
    # At az = 0 both outcomes multiply the entropy by exactly (1 - b^2).
    rng = np.random.default_rng(24)
    for _ in range(100):
        b = float(rng.uniform(0.01, 0.99))
        phi = float(rng.uniform(0.0, 2.0 * math.pi))
        radius = float(rng.uniform(0.0, 0.999))
        state = BlochState(radius * math.cos(phi), radius * math.sin(phi), 0.0)
        m = MeasurementStrength.from_b(b)
        before = linear_entropy(state)
        for u in (0.0, 0.999999999999):
            after = linear_entropy(measure_step(state, m, u).post_state)
            assert abs(after - (1.0 - b * b) * before) < 1e-14


def test_average_purification_matches_two_branch_expectation():
    rng = np.random.default_rng(25)
    for _ in range(N_RANDOM):
        P = float(rng.uniform(1e-6, 0.5))
        theta = float(rng.uniform(0.0, math.pi))
        b = float(rng.uniform(0.01, 0.99))
        radius = math.sqrt(1.0 - 2.0 * P)
        state = BlochState(radius * math.sin(theta), 0.0, radius * math.cos(theta))
        m = MeasurementStrength.from_b(b)
        expected_after = 0.0
        for sign, u in ((1, 0.0), (-1, 0.9999999999)):
            outcome = measure_step(state, m, u)
            assert outcome.sign == sign
            expected_after += outcome.probability * linear_entropy(outcome.post_state)
        drop = average_purification(P, theta, m)
        assert abs(drop - (P - expected_after)) < 1e-14


def test_average_purification_shape():
    m = MeasurementStrength.from_b(0.3)
    assert average_purification(0.0, 1.0, m) == 0.0
    assert average_purification(0.2, 0.5 * math.pi, m) == pytest.approx(0.09 * 0.2, abs=1e-15)
    # Maximal on the equator, nonnegative everywhere.
    thetas = np.linspace(0.0, math.pi, 41)
    values = [average_purification(0.2, float(t), m) for t in thetas]
    assert max(values) == pytest.approx(values[20], abs=1e-15)
    assert min(values) >= 0.0
    assert average_purification(0.2, 0.3, MeasurementStrength.from_b(0.0)) == 0.0
    with pytest.raises(ConfigError):
        average_purification(0.6, 1.0, m)
    with pytest.raises(ConfigError):
        average_purification(-0.1, 1.0, m)
