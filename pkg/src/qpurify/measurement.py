"""One discrete step of a two-outcome weak z measurement.

The step has Kraus operators built from the projectors P(+z), P(-z):

    Omega_s = sqrt(kappa_s) P(+z) + sqrt(1 - kappa_s) P(-z),   s = +1, -1,

with kappa_(+1) + kappa_(-1) = 1, so the pair resolves the identity. The
single number b = |2 kappa - 1| fixes everything observable about the step:
b = 0 reveals nothing and leaves the state untouched, b = 1 is a projective
z measurement. Outcomes are labeled by their effect, not by which Kraus
operator carries the larger kappa: sign +1 is always the outcome that drives
az toward +b. In Bloch form the update for outcome s reads

    p_s   = (1 + s b az) / 2
    az'   = (az + s b) / (1 + s b az)
    ax'   = sqrt(1 - b^2) ax / (1 + s b az),    ay' likewise,

which shrinks the transverse components by sqrt(1 - b^2) and pulls az toward
s*b. Averaged over outcomes the linear entropy P never grows; the closed form
for the expected drop is average_purification below, maximal at theta = pi/2
where it equals b^2 P and both outcomes reduce the entropy by the same amount.
"""

import math
from dataclasses import dataclass

from .bloch_core import BlochState
from .errors import ConfigError, StepTooLargeError

STRENGTH_TOL = 1e-12


@dataclass(frozen=True)
class MeasurementStrength:
    """Strength of one measurement step: kappa in [0, 1] with b = |2*kappa - 1| cached."""

    kappa: float
    b: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.kappa <= 1.0:
            raise ConfigError(f"kappa must lie in [0, 1], got {self.kappa!r}")
        if abs(self.b - abs(2.0 * self.kappa - 1.0)) > STRENGTH_TOL:
            raise ConfigError(
                f"cached b = {self.b!r} inconsistent with kappa = {self.kappa!r}"
            )

    @classmethod
    def from_kappa(cls, kappa: float) -> "MeasurementStrength":
        return cls(kappa, abs(2.0 * kappa - 1.0))

    @classmethod
    def from_b(cls, b: float) -> "MeasurementStrength":
        """Strength with the given b, represented by kappa = (1 + b)/2."""
        if not 0.0 <= b <= 1.0:
            raise ConfigError(f"b must lie in [0, 1], got {b!r}")
        return cls(0.5 * (1.0 + b), b)


@dataclass(frozen=True)
class StepOutcome:
    """Result of one measurement step: which outcome, how likely, and the posterior."""

    sign: int
    probability: float
    post_state: BlochState


def strength_from_rate(gamma: float, dt: float) -> MeasurementStrength:
    """Strength of one step of duration dt of a continuous measurement at rate gamma.

    kappa = 1/2 - sqrt(2 gamma dt), so b = 2 sqrt(2 gamma dt) and
    b^2 = 8 gamma dt: n steps contract the in-plane entropy by
    (1 - 8 gamma dt)^n, whose dt -> 0 limit is exp(-8 gamma t).
    """
    if not (gamma > 0.0 and math.isfinite(gamma)):
        raise ConfigError(f"gamma must be positive and finite, got {gamma!r}")
    if not (dt > 0.0 and math.isfinite(dt)):
        raise ConfigError(f"dt must be positive and finite, got {dt!r}")
    if 2.0 * gamma * dt > 0.25:
        raise StepTooLargeError(
            f"2*gamma*dt = {2.0 * gamma * dt!r} > 1/4: kappa would leave [0, 1]"
        )
    root = math.sqrt(2.0 * gamma * dt)
    return MeasurementStrength(0.5 - root, 2.0 * root)


def outcome_probabilities(state: BlochState, m: MeasurementStrength) -> tuple[float, float]:
    """Born probabilities (p_plus, p_minus) of the two outcomes.

    Outcome +1 is the one that drives az toward +b, so p_plus = (1 + b az)/2.
    For kappa >= 1/2 this is the kappa-weighted operator itself; for
    kappa < 1/2 the two operators swap labels. Either way the pair sums to 1.
    """
    p_plus = 0.5 * (1.0 + m.b * state.az)
    return p_plus, 1.0 - p_plus


def measure_step(state: BlochState, m: MeasurementStrength, u: float) -> StepOutcome:
    """Sample one outcome from the uniform draw u in [0, 1) and update the state.

    sign = +1 iff u < p_plus. The posterior is the normalized Kraus update;
    the branch actually taken always has probability at least u, so its
    normalization 2 p_s never vanishes. The module holds no generator:
    randomness enters only through u.
    """
    p_plus, p_minus = outcome_probabilities(state, m)
    if u < p_plus:
        sign, probability = 1, p_plus
    else:
        sign, probability = -1, p_minus
    b = m.b
    denom = 1.0 + sign * b * state.az
    shrink = math.sqrt(1.0 - b * b) / denom
    post = BlochState(
        state.ax * shrink,
        state.ay * shrink,
        (state.az + sign * b) / denom,
    )
    return StepOutcome(sign, probability, post)


def average_purification(P: float, theta: float, m: MeasurementStrength) -> float:
    """Expected entropy drop of one step on a state with entropy P at polar angle theta.

    delta_P = b^2 P (1 - (1 - 2P) cos^2 theta) / (1 - (1 - 2P) b^2 cos^2 theta),

    the exact two-outcome expectation P - sum_s p_s P_s. It is nonnegative,
    vanishes for b = 0, and is maximal at theta = pi/2 where it equals b^2 P.
    """
    if not 0.0 <= P <= 0.5:
        raise ConfigError(f"linear entropy must lie in [0, 1/2], got {P!r}")
    if P == 0.0:
        # Pure states stay pure; this also guards the lone denominator zero
        # (b = 1, theta in {0, pi}), where the drop is 0 in the limit.
        return 0.0
    b_sq = m.b * m.b
    weight = (1.0 - 2.0 * P) * math.cos(theta) ** 2
    return b_sq * P * (1.0 - weight) / (1.0 - b_sq * weight)
