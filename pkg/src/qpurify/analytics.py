"""Reference curves, the speed-up factor, and the exhaustive optimality check.

Three independent routes to the entropy decay live here. The closed forms:
with optimal feedback the linear entropy obeys P(t) = exp(-8 gamma t) P(0)
in the continuum and P_n = (1 - b^2)^n P(0) per discrete step. Without
feedback the ensemble mean from the completely mixed state has the integral
form (after substituting x = sqrt(t) u into the underlying Gaussian average)

    P_c(t) = (exp(-4 gamma t) / 2) E[ 1 / cosh(sqrt(8 gamma t) u) ],

with u standard normal, which this module evaluates by adaptive quadrature.
The integrand is even and drops below 1e-18 of its peak at
u_max = -s + sqrt(s^2 + 2 ln(2e18)) for s = sqrt(8 gamma t), so the tail
truncation is controlled by the cosh decay. For large t the expectation
shrinks like 1/s, giving the asymptotic tail

    P_c(t) ~ (sqrt(pi)/8) exp(-4 gamma t) / sqrt(gamma t),

used as a second, closed-form route to the speed-up factor.

The speed-up factor divides the first-passage times of the two mean curves
to a common entropy target, starting from the mixed state. The feedback time
is closed-form; the classical time comes from bisection on the monotone
quadrature curve. The ratio is dimensionless and independent of gamma.

verify_optimality replaces the general optimality argument with an
exhaustive finite check: every strategy that picks a rotation-to-theta angle
from a grid at every node of the binary outcome tree is evaluated by exact
enumeration (no sampling), and the minimum is compared against the
(1 - b^2)^n P0 recursion. Only the entropy P matters at a node, because the
angle choice fixes the rest of the geometry up to an irrelevant azimuth.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import (
    BudgetExceededError,
    ConfigError,
    ConvergenceError,
    QuadratureError,
    TargetUnreachableError,
)

PROVENANCES = ("analytic", "quadrature", "monte_carlo", "discrete_exact")

# Integrand support cutoff: where exp(-u^2/2)/cosh(s u) falls below 1e-18
# of its peak value 1.
_TAIL_LOG = math.log(2e18)
_TAIL_CONSTANT = math.sqrt(math.pi) / 8.0

VALUE_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class EntropyCurve:
    """Sampled linear-entropy curve with provenance.

    times must be strictly increasing and values must stay in [0, 1/2];
    curves of analytic or discrete_exact provenance must also be monotone
    non-increasing. stderr, when present, holds one standard error per point.
    """

    times: np.ndarray
    values: np.ndarray
    provenance: str
    stderr: np.ndarray | None = None

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if self.provenance not in PROVENANCES:
            raise ConfigError(f"unknown provenance {self.provenance!r}")
        if times.ndim != 1 or times.shape != values.shape or times.size == 0:
            raise ConfigError("times and values must be equal-length 1-d arrays")
        if times.size > 1 and not np.all(np.diff(times) > 0.0):
            raise ConfigError("times must be strictly increasing")
        if np.any(values < -VALUE_SLACK) or np.any(values > 0.5 + VALUE_SLACK):
            raise ConfigError("entropy values must lie in [0, 1/2]")
        if self.provenance in ("analytic", "discrete_exact") and times.size > 1:
            if np.any(np.diff(values) > VALUE_SLACK):
                raise ConfigError(f"{self.provenance} curves must be monotone non-increasing")
        if self.stderr is not None:
            stderr = np.asarray(self.stderr, dtype=float)
            object.__setattr__(self, "stderr", stderr)
            if stderr.shape != values.shape or np.any(stderr < 0.0):
                raise ConfigError("stderr must be nonnegative and match values in length")


def feedback_entropy_curve(p0: float, gamma: float, times) -> EntropyCurve:
    """Closed-form optimal-feedback curve exp(-8 gamma t) p0 at the given times."""
    if not 0.0 <= p0 <= 0.5:
        raise ConfigError(f"p0 must lie in [0, 1/2], got {p0!r}")
    if not gamma > 0.0:
        raise ConfigError(f"gamma must be positive, got {gamma!r}")
    t = np.asarray(times, dtype=float)
    return EntropyCurve(t, p0 * np.exp(-8.0 * gamma * t), "analytic")


def discrete_feedback_curve(p0: float, b_step: float, n_steps: int) -> EntropyCurve:
    """Exact per-step recursion (1 - b^2)^n p0, indexed by step number 0..n_steps."""
    if not 0.0 <= p0 <= 0.5:
        raise ConfigError(f"p0 must lie in [0, 1/2], got {p0!r}")
    if not 0.0 <= b_step <= 1.0:
        raise ConfigError(f"b_step must lie in [0, 1], got {b_step!r}")
    if n_steps < 0:
        raise ConfigError(f"n_steps must be nonnegative, got {n_steps!r}")
    steps = np.arange(n_steps + 1, dtype=float)
    values = p0 * (1.0 - b_step * b_step) ** steps
    return EntropyCurve(steps, values, "discrete_exact")


def classical_entropy_at(gamma: float, t: float, rel_tol: float = 1e-10) -> float:
    """No-feedback mean entropy P_c(t) from the mixed state, by adaptive quadrature.

    The t = 0 value is the limit 1/2. Raises QuadratureError when the
    adaptive rule cannot certify the requested relative tolerance.
    """
    if not (gamma > 0.0 and math.isfinite(gamma)):
        raise ConfigError(f"gamma must be positive and finite, got {gamma!r}")
    if not (t >= 0.0 and math.isfinite(t)):
        raise ConfigError(f"t must be nonnegative and finite, got {t!r}")
    if not 1e-14 <= rel_tol <= 1e-6:
        raise ConfigError(f"rel_tol must lie in [1e-14, 1e-6], got {rel_tol!r}")
    if t == 0.0:
        return 0.5
    s = math.sqrt(8.0 * gamma * t)
    u_max = -s + math.sqrt(s * s + 2.0 * _TAIL_LOG)

    def integrand(u: float) -> float:
        return math.exp(-0.5 * u * u) / math.cosh(s * u)

    # QUADPACK rejects requested tolerances below ~50 machine epsilons; ask
    # for at least that much and certify the caller's tolerance afterwards.
    result = quad(integrand, 0.0, u_max, epsabs=0.0, epsrel=max(rel_tol, 6e-14),
                  limit=200, full_output=1)
    value_half, abs_err = result[0], result[1]
    if len(result) > 3 or not value_half > 0.0 or abs_err > rel_tol * value_half:
        raise QuadratureError(
            f"quadrature reached |error| ~ {abs_err!r} on integral {value_half!r}, "
            f"above the requested relative tolerance {rel_tol!r}"
        )
    expectation = 2.0 * value_half / math.sqrt(2.0 * math.pi)
    # The exact value is strictly below 1/2; clip quadrature round-off back
    # into the physical range.
    return min(0.5, 0.5 * math.exp(-4.0 * gamma * t) * expectation)


def classical_entropy_curve(gamma: float, times, rel_tol: float = 1e-10) -> EntropyCurve:
    """Quadrature curve of the no-feedback mean entropy at the given times."""
    t = np.asarray(times, dtype=float)
    values = np.array([classical_entropy_at(gamma, float(ti), rel_tol) for ti in t])
    return EntropyCurve(t, values, "quadrature")


def classical_entropy_tail(gamma: float, t: float) -> float:
    """Large-t asymptote (sqrt(pi)/8) exp(-4 gamma t)/sqrt(gamma t) of P_c(t)."""
    if not (gamma > 0.0 and t > 0.0):
        raise ConfigError(f"need gamma > 0 and t > 0, got gamma={gamma!r}, t={t!r}")
    return _TAIL_CONSTANT * math.exp(-4.0 * gamma * t) / math.sqrt(gamma * t)


def _feedback_time(final_P: float, gamma: float) -> float:
    if not 0.0 < final_P < 0.5:
        raise TargetUnreachableError(
            f"final entropy target must lie in (0, 1/2), got {final_P!r}"
        )
    return math.log(0.5 / final_P) / (8.0 * gamma)


def speedup_factor(final_P: float, gamma: float = 1.0, rel_tol: float = 1e-10) -> float:
    """Ratio t_c/t_f of no-feedback to feedback first-passage times to final_P.

    t_f solves exp(-8 gamma t)/2 = final_P in closed form; t_c comes from
    bisection on the monotone quadrature curve. The ratio is independent of
    gamma and lies in (1, 2), approaching 2 as final_P tends to 0.
    """
    t_f = _feedback_time(final_P, gamma)
    lo, hi = t_f, 2.0 * t_f
    # The classical curve sits above the feedback curve, so P_c(t_f) > final_P.
    for _ in range(200):
        if classical_entropy_at(gamma, hi, rel_tol) <= final_P:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ConvergenceError("classical curve failed to cross the target while doubling")
    for _ in range(200):
        if hi - lo <= 1e-12 * hi:
            break
        mid = 0.5 * (lo + hi)
        if classical_entropy_at(gamma, mid, rel_tol) > final_P:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi) / t_f


def speedup_factor_asymptotic(final_P: float, gamma: float = 1.0) -> float:
    """Speed-up with t_c taken from the t^(-1/2) exp(-4 gamma t) tail model.

    Solves (sqrt(pi)/8) exp(-4 tau)/sqrt(tau) = final_P for tau = gamma t by
    a contraction fixed point; accurate for small targets where the tail
    dominates. Useful as an independent cross-check on the quadrature route.
    """
    t_f = _feedback_time(final_P, gamma)
    tau = 2.0 * gamma * t_f
    for _ in range(200):
        tau_next = 0.25 * math.log(_TAIL_CONSTANT / (final_P * math.sqrt(tau)))
        if tau_next <= 0.0:
            raise ConvergenceError(
                f"tail model has no positive solution for final_P = {final_P!r}"
            )
        if abs(tau_next - tau) <= 1e-14 * tau:
            return (tau_next / gamma) / t_f
        tau = tau_next
    raise ConvergenceError("tail-model fixed point did not converge")


@dataclass(frozen=True)
class TreeNode:
    """One node of a strategy tree: the angle chosen there, and the branch data.

    theta is None at leaves. probability is the branch probability from the
    parent (1.0 at the root); entropy is the linear entropy at the node.
    """

    theta: float | None
    probability: float
    entropy: float
    children: tuple["TreeNode", ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "probability": self.probability,
            "entropy": self.entropy,
            "children": [child.to_dict() for child in self.children],
        }


@dataclass(frozen=True)
class StrategyTree:
    """Branching record of one strategy: outcome probabilities, entropies, value."""

    depth: int
    root: TreeNode
    value: float

    def to_dict(self) -> dict:
        return {"depth": self.depth, "value": self.value, "root": self.root.to_dict()}


@dataclass(frozen=True)
class OptimalityReport:
    """Result of the exhaustive strategy enumeration."""

    n_steps: int
    b_step: float
    p0: float
    theta_grid: tuple[float, ...]
    min_value: float
    closed_form: float
    bound_satisfied: bool
    matches_closed_form: bool
    minimizer_always_half_pi: bool
    max_minimizer_deviation: float
    first_node_values: tuple[tuple[float, float], ...]
    nodes_evaluated: int
    budget: int
    optimal_tree: StrategyTree

    def to_dict(self) -> dict:
        return {
            "n_steps": self.n_steps,
            "b_step": self.b_step,
            "p0": self.p0,
            "theta_grid": list(self.theta_grid),
            "min_value": self.min_value,
            "closed_form": self.closed_form,
            "bound_satisfied": self.bound_satisfied,
            "matches_closed_form": self.matches_closed_form,
            "minimizer_always_half_pi": self.minimizer_always_half_pi,
            "max_minimizer_deviation": self.max_minimizer_deviation,
            "first_node_values": [[t, v] for t, v in self.first_node_values],
            "nodes_evaluated": self.nodes_evaluated,
            "budget": self.budget,
            "optimal_tree": self.optimal_tree.to_dict(),
        }


def _enumeration_cost(n_steps: int, grid: int) -> int:
    # Value recursion visits sum_k (2g)^k nodes; building the optimal tree
    # re-evaluates child values along the winning branch only.
    value_cost = [0] * (n_steps + 1)
    for d in range(1, n_steps + 1):
        value_cost[d] = 2 * grid * (1 + value_cost[d - 1])
    tree_cost = 2 * grid
    for d in range(2, n_steps + 1):
        tree_cost = 2 * grid * (1 + value_cost[d - 1]) + 2 * tree_cost
    return value_cost[n_steps] + tree_cost


def verify_optimality(
    n_steps: int,
    b_step: float,
    angle_grid: int = 37,
    p0: float = 0.4,
    budget: int = 2_000_000,
) -> OptimalityReport:
    """Exhaustively enumerate grid strategies over n_steps and compare to the recursion.

    A strategy picks a rotation-to-theta angle from the grid at every node of
    the binary outcome tree; the expected final entropy is computed by exact
    enumeration. The report records the minimum over all strategies, whether
    it stays above (1 - b^2)^n p0 - 1e-12, and whether every node's unique
    minimizer is theta = pi/2. The default p0 = 0.4 keeps the state strictly
    between pure and completely mixed: at p0 = 1/2 every angle performs
    identically on the first step and the minimizer is not unique.
    """
    if not 1 <= n_steps <= 4:
        raise ConfigError(f"n_steps must lie in 1..4, got {n_steps!r}")
    if not 0.0 < b_step < 1.0:
        raise ConfigError(f"b_step must lie in (0, 1), got {b_step!r}")
    if not 0.0 <= p0 <= 0.5:
        raise ConfigError(f"p0 must lie in [0, 1/2], got {p0!r}")
    if angle_grid < 3 or angle_grid % 2 == 0:
        raise ConfigError(
            f"angle_grid must be odd and >= 3 so the grid contains pi/2, got {angle_grid!r}"
        )
    cost = _enumeration_cost(n_steps, angle_grid)
    if cost > budget:
        raise BudgetExceededError(
            f"enumeration needs {cost} node evaluations, above the budget of {budget}"
        )

    thetas = [float(t) for t in np.linspace(0.0, math.pi, angle_grid)]
    cosines = [math.cos(t) for t in thetas]
    half_pi = 0.5 * math.pi
    b = b_step
    one_minus_b_sq = 1.0 - b * b

    evals = 0
    max_deviation = 0.0
    minimizer_ok = True

    def branch(P: float, radius: float, cos_theta: float, sign: float) -> tuple[float, float]:
        # Rotate to the chosen polar angle, measure once: branch probability
        # and posterior entropy. b < 1 keeps the normalization positive.
        q = 1.0 + sign * b * radius * cos_theta
        return 0.5 * q, one_minus_b_sq * P / (q * q)

    def scan(P: float, depth: int) -> tuple[float, int, list[float]]:
        # Minimum over this node's angle choices, with optimal continuations.
        nonlocal evals, max_deviation, minimizer_ok
        radius = math.sqrt(1.0 - 2.0 * P)
        per_theta = []
        for cos_theta in cosines:
            total = 0.0
            for sign in (1.0, -1.0):
                evals += 1
                prob, post = branch(P, radius, cos_theta, sign)
                total += prob * (post if depth == 1 else scan(post, depth - 1)[0])
            per_theta.append(total)
        best = int(np.argmin(per_theta))
        ordered = sorted(per_theta)
        if len(ordered) > 1 and ordered[1] - ordered[0] <= 1e-12:
            minimizer_ok = False
        deviation = abs(thetas[best] - half_pi)
        max_deviation = max(max_deviation, deviation)
        if deviation > 1e-12:
            minimizer_ok = False
        return per_theta[best], best, per_theta

    def build(P: float, probability: float, depth: int) -> tuple[float, TreeNode]:
        # Optimal subtree under this node, reusing scan for continuation values.
        _, best, _ = scan(P, depth)
        radius = math.sqrt(1.0 - 2.0 * P)
        children = []
        value = 0.0
        for sign in (1.0, -1.0):
            prob, post = branch(P, radius, cosines[best], sign)
            if depth == 1:
                children.append(TreeNode(None, prob, post))
                value += prob * post
            else:
                child_value, child = build(post, prob, depth - 1)
                children.append(child)
                value += prob * child_value
        return value, TreeNode(thetas[best], probability, P, tuple(children))

    min_value, _, root_values = scan(p0, n_steps)
    tree_value, root = build(p0, 1.0, n_steps)
    closed_form = one_minus_b_sq**n_steps * p0
    return OptimalityReport(
        n_steps=n_steps,
        b_step=b_step,
        p0=p0,
        theta_grid=tuple(thetas),
        min_value=min_value,
        closed_form=closed_form,
        bound_satisfied=min_value >= closed_form - 1e-12,
        matches_closed_form=abs(min_value - closed_form) <= 1e-12,
        minimizer_always_half_pi=minimizer_ok,
        max_minimizer_deviation=max_deviation,
        first_node_values=tuple(zip(thetas, root_values)),
        nodes_evaluated=evals,
        budget=budget,
        optimal_tree=StrategyTree(n_steps, root, tree_value),
    )
