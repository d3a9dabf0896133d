"""Feedback strategies applied between measurement steps.

The optimal strategy rotates the Bloch vector back into the xy-plane after
every measurement, using the minimal angle and an axis that preserves the
azimuth phi. Geometry: a rotation by alpha about the in-plane axis
n = (-sin phi, cos phi, 0) maps the polar angle theta to theta + alpha while
leaving phi fixed, because n is orthogonal to the state's xy-projection.
The minimal angle onto the plane is therefore alpha = atan2(az, |a_xy|),
signed by the hemisphere the vector sits in; no smaller rotation about any
axis can null az. Because phi never changes, the axis is constant along a
single run.

With the state held in the plane, every outcome of a step of strength b
multiplies the linear entropy by exactly (1 - b^2), independent of the
outcome sequence: run_discrete_protocol realizes that recursion. The angle
needed after step n has the closed form alpha_schedule, written in terms of
the pre-measurement entropy (1 - b^2)^(n-1) P0; continuum_alpha is its
linearization for one Wiener increment, which diverges only for a completely
mixed state at t = 0, where the exact pi/2 rotation takes over.
"""

import math
from dataclasses import dataclass

import numpy as np

from .bloch_core import BlochState, Rotation, azimuth, linear_entropy, polar_angle, rotate
from .errors import ConfigError, FeedbackDivergenceError
from .measurement import MeasurementStrength, measure_step

STRATEGY_KINDS = ("optimal", "none", "fixed_theta", "custom_schedule")


@dataclass(frozen=True)
class Strategy:
    """Feedback rule as plain data, so runs serialize and replay exactly.

    kind selects the rule: "optimal" (minimal rotation onto the xy-plane),
    "none" (identity), "fixed_theta" (hold the polar angle at theta_star),
    or "custom_schedule" (rotate by schedule[step_index] about the
    azimuth-preserving axis; steps past the end of the schedule rotate by 0).
    """

    kind: str
    theta_star: float | None = None
    schedule: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in STRATEGY_KINDS:
            raise ConfigError(f"unknown strategy kind {self.kind!r}")
        if self.kind == "fixed_theta":
            if self.theta_star is None or not 0.0 <= self.theta_star <= math.pi:
                raise ConfigError(
                    f"fixed_theta needs theta_star in [0, pi], got {self.theta_star!r}"
                )
        elif self.theta_star is not None:
            raise ConfigError(f"theta_star only applies to fixed_theta, not {self.kind!r}")
        if self.kind == "custom_schedule":
            if self.schedule is None or not all(math.isfinite(a) for a in self.schedule):
                raise ConfigError("custom_schedule needs a tuple of finite angles")
        elif self.schedule is not None:
            raise ConfigError(f"schedule only applies to custom_schedule, not {self.kind!r}")

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "fixed_theta":
            out["theta_star"] = self.theta_star
        if self.kind == "custom_schedule":
            out["schedule"] = list(self.schedule or ())
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Strategy":
        kind = data.get("kind")
        if kind == "fixed_theta":
            return cls("fixed_theta", theta_star=float(data["theta_star"]))
        if kind == "custom_schedule":
            return cls("custom_schedule", schedule=tuple(float(a) for a in data["schedule"]))
        if kind in ("optimal", "none"):
            return cls(kind)
        raise ConfigError(f"unknown strategy kind {kind!r}")


def parse_strategy(text: str) -> Strategy:
    """Parse the command-line form: optimal | none | fixed-theta=X (X in radians)."""
    if text == "optimal":
        return Strategy("optimal")
    if text == "none":
        return Strategy("none")
    if text.startswith("fixed-theta="):
        try:
            theta = float(text.split("=", 1)[1])
        except ValueError as exc:
            raise ConfigError(f"bad fixed-theta value in {text!r}") from exc
        return Strategy("fixed_theta", theta_star=theta)
    raise ConfigError(f"unknown strategy {text!r} (expected optimal|none|fixed-theta=X)")


@dataclass(frozen=True)
class FeedbackCommand:
    """One feedback rotation: the Rotation itself plus its angle and axis azimuth."""

    rotation: Rotation
    alpha: float
    axis_azimuth: float


def _axis_azimuth(state: BlochState) -> float:
    # Degenerate on the z-axis: fix phi = 0, giving axis (0, 1, 0) and a
    # rotation that lands on +x. The measurement must break the symmetry
    # somewhere; a fixed convention keeps runs deterministic.
    if state.ax == 0.0 and state.ay == 0.0:
        return 0.0
    return azimuth(state)


def _axis_for(phi: float) -> tuple[float, float, float]:
    return (-math.sin(phi), math.cos(phi), 0.0)


def optimal_correction(state: BlochState) -> FeedbackCommand:
    """Minimal rotation bringing the state into the xy-plane (az = 0).

    alpha = atan2(az, |a_xy|) in [-pi/2, pi/2] about n = (-sin phi, cos phi, 0).
    The rotation preserves |a| and the azimuth; applied to the state it yields
    az = 0. On the z-axis (phi undefined) the convention phi = 0 rotates the
    vector onto +x with |alpha| = pi/2.
    """
    phi = _axis_azimuth(state)
    alpha = math.atan2(state.az, math.hypot(state.ax, state.ay))
    return FeedbackCommand(Rotation(_axis_for(phi), alpha), alpha, phi)


def alpha_schedule(step_index: int, b_step: float, P0: float) -> float:
    """Magnitude of the optimal correction after measurement number step_index.

    Under the exact recursion the entropy entering step n is
    P_{n-1} = (1 - b^2)^(n-1) P0, so the post-measurement state needs

        alpha_n = atan2(b, sqrt(1 - 2 P_{n-1}) sqrt(1 - b^2)).

    For P0 = 1/2 the first correction is exactly pi/2 whatever b is; the
    sequence decreases strictly toward atan2(b, sqrt(1 - b^2)) for P0 > 0.
    """
    if step_index < 1:
        raise ConfigError(f"step_index counts measurements from 1, got {step_index!r}")
    if not 0.0 < b_step < 1.0:
        raise ConfigError(f"b_step must lie in (0, 1), got {b_step!r}")
    if not 0.0 <= P0 <= 0.5:
        raise ConfigError(f"P0 must lie in [0, 1/2], got {P0!r}")
    p_pre = (1.0 - b_step * b_step) ** (step_index - 1) * P0
    return math.atan2(b_step, math.sqrt(1.0 - 2.0 * p_pre) * math.sqrt(1.0 - b_step * b_step))


def continuum_alpha(P0: float, gamma: float, t: float, dw: float) -> float:
    """Linearized feedback angle for one Wiener increment dw at time t.

    alpha(t) = sqrt(8 gamma) dw / sqrt(1 - 2 P0 exp(-8 gamma t)). Matches the
    exact atan of the same argument to O(dt^(3/2)). The denominator vanishes
    only for a completely mixed initial state at t = 0, where the linearized
    angle diverges and callers must fall back to the exact pi/2 correction.
    """
    if not 0.0 <= P0 <= 0.5:
        raise ConfigError(f"P0 must lie in [0, 1/2], got {P0!r}")
    if not (gamma > 0.0 and t >= 0.0):
        raise ConfigError(f"need gamma > 0 and t >= 0, got gamma={gamma!r}, t={t!r}")
    denom_sq = 1.0 - 2.0 * P0 * math.exp(-8.0 * gamma * t)
    if denom_sq <= 0.0:
        raise FeedbackDivergenceError(
            "linearized feedback angle diverges for the completely mixed state at t = 0"
        )
    return math.sqrt(8.0 * gamma) * dw / math.sqrt(denom_sq)


def _rotate_by(state: BlochState, alpha: float) -> BlochState:
    if alpha == 0.0:
        return state
    return rotate(state, Rotation(_axis_for(_axis_azimuth(state)), alpha))


def _strategy_alpha(strategy: Strategy, state: BlochState, step_index: int) -> float:
    """Rotation angle the strategy applies to this state, about the axis of its azimuth."""
    if strategy.kind == "none":
        return 0.0
    if strategy.kind == "optimal":
        return optimal_correction(state).alpha
    if state.norm() == 0.0:
        return 0.0  # the mixed state is isotropic; nothing to rotate
    if strategy.kind == "fixed_theta":
        assert strategy.theta_star is not None
        return strategy.theta_star - polar_angle(state)
    assert strategy.schedule is not None
    schedule = strategy.schedule
    return schedule[step_index] if 0 <= step_index < len(schedule) else 0.0


def apply_strategy(strategy: Strategy, state: BlochState, step_index: int = 0) -> BlochState:
    """Apply one feedback correction; rotations only, so the entropy is unchanged.

    step_index selects the entry of a custom schedule and is ignored by the
    other kinds.
    """
    if strategy.kind == "none":
        return state
    return _rotate_by(state, _strategy_alpha(strategy, state, step_index))


@dataclass(frozen=True)
class DiscreteStepRecord:
    """Per-step record of the discrete protocol: measure, then correct."""

    step: int
    sign: int
    probability: float
    alpha: float
    entropy: float


def run_discrete_protocol(
    p0: float,
    strength: MeasurementStrength,
    strategy: Strategy,
    uniforms: np.ndarray,
) -> list[DiscreteStepRecord]:
    """Run len(uniforms) measurement steps with feedback from entropy p0.

    The initial state is in-plane along +x with |a| = sqrt(1 - 2 p0) (the
    completely mixed state for p0 = 1/2). Each step measures with the given
    uniform draw, then applies the strategy; the record holds the outcome,
    its probability, the rotation angle actually applied, and the entropy
    after the step. Record 0 carries the initial entropy. Under the optimal
    strategy the entropy after n steps is (1 - b^2)^n p0 for every outcome
    sequence, because each measurement starts from az = 0.
    """
    if not 0.0 <= p0 <= 0.5:
        raise ConfigError(f"p0 must lie in [0, 1/2], got {p0!r}")
    state = BlochState(math.sqrt(max(0.0, 1.0 - 2.0 * p0)), 0.0, 0.0)
    records = [DiscreteStepRecord(0, 0, 1.0, 0.0, linear_entropy(state))]
    for k, u in enumerate(np.asarray(uniforms, dtype=float)):
        outcome = measure_step(state, strength, float(u))
        before = outcome.post_state
        alpha = _strategy_alpha(strategy, before, k)
        state = before if strategy.kind == "none" else _rotate_by(before, alpha)
        records.append(
            DiscreteStepRecord(k + 1, outcome.sign, outcome.probability, alpha, linear_entropy(state))
        )
    return records
