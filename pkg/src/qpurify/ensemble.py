"""Seeded Monte Carlo orchestration over many trajectories.

Determinism contract: trajectory k draws from a counter-based generator
seeded by (master_seed, k), all randomness is drawn up front one array per
trajectory, and statistics are reduced in fixed trajectory order over
fixed-size chunks. Results are therefore a pure function of the
EnsembleConfig, independent of worker count and scheduling.

The stepping itself is vectorized across the trajectories of a chunk with
the same arithmetic, in the same order, as the scalar single-trajectory
path; the one deliberate difference is that the optimal correction lands on
az = 0 exactly here, where the scalar path goes through the general rotation
and leaves az at round-off size.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytics import EntropyCurve
from .continuum_sde import SCHEMES, SdeConfig, euler_update
from .errors import ConfigError
from .feedback import Strategy
from .measurement import strength_from_rate

# Fixed chunk width: chunking is an implementation detail of vectorization
# and must never depend on the worker count, or bytes would change with it.
CHUNK = 256

MAX_SEED = 2**64


@dataclass(frozen=True)
class EnsembleConfig:
    """A reproducible ensemble: size, seed, physics window, strategy, sampling.

    initial_p0 fixes the starting state (sqrt(1 - 2 p0), 0, 0), in-plane
    along +x, the completely mixed state for p0 = 1/2. record_every sets the
    curve sampling stride in steps; the final step is always recorded.
    """

    n_trajectories: int
    master_seed: int
    sde: SdeConfig
    strategy: Strategy
    record_every: int = 1
    initial_p0: float = 0.5
    scheme: str = "exact"

    def __post_init__(self) -> None:
        if self.n_trajectories < 1:
            raise ConfigError(f"n_trajectories must be >= 1, got {self.n_trajectories!r}")
        if self.record_every < 1:
            raise ConfigError(f"record_every must be >= 1, got {self.record_every!r}")
        if not 0 <= self.master_seed < MAX_SEED:
            raise ConfigError(f"master_seed must be a 64-bit unsigned integer")
        if not 0.0 <= self.initial_p0 <= 0.5:
            raise ConfigError(f"initial_p0 must lie in [0, 1/2], got {self.initial_p0!r}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}, expected one of {SCHEMES}")


@dataclass(frozen=True, eq=False)
class EnsembleStats:
    """Ensemble summary: mean curve with standard errors, finals, clamp count."""

    mean_curve: EntropyCurve
    stderr_curve: np.ndarray
    per_trajectory_final: np.ndarray
    clamp_events: int


def derive_stream(master_seed: int, trajectory_index: int) -> np.random.Generator:
    """Independent, reproducible generator for one trajectory.

    Streams for distinct indices come from spawn keys of the same seed
    sequence feeding a counter-based generator, so they are statistically
    independent and any subset can be regenerated without the rest.
    """
    if not 0 <= master_seed < MAX_SEED:
        raise ConfigError("master_seed must be a 64-bit unsigned integer")
    if trajectory_index < 0:
        raise ConfigError(f"trajectory_index must be >= 0, got {trajectory_index!r}")
    seq = np.random.SeedSequence(master_seed, spawn_key=(trajectory_index,))
    return np.random.Generator(np.random.Philox(seq))


def _record_steps(n_steps: int, record_every: int) -> np.ndarray:
    steps = list(range(0, n_steps + 1, record_every))
    if steps[-1] != n_steps:
        steps.append(n_steps)
    return np.asarray(steps, dtype=int)


def _apply_feedback_arrays(strategy: Strategy, ax, ay, az, step_index: int):
    """Vectorized feedback rotation; preserves lengths and azimuths exactly."""
    if strategy.kind == "none":
        return ax, ay, az
    r_xy = np.hypot(ax, ay)
    full = np.hypot(r_xy, az)
    in_plane = r_xy > 0.0
    safe_r_xy = np.where(in_plane, r_xy, 1.0)
    if strategy.kind == "optimal":
        scale = np.where(in_plane, full / safe_r_xy, 0.0)
        return np.where(in_plane, ax * scale, full), ay * scale, np.zeros_like(az)
    if strategy.kind == "fixed_theta":
        theta_new = strategy.theta_star
    else:
        schedule = strategy.schedule or ()
        alpha = schedule[step_index] if 0 <= step_index < len(schedule) else 0.0
        theta_new = np.arctan2(r_xy, az) + alpha
    sin_new = np.sin(theta_new)
    cos_new = np.cos(theta_new)
    scale = np.where(in_plane, full * sin_new / safe_r_xy, 0.0)
    new_ax = np.where(in_plane, ax * scale, full * sin_new)
    new_ay = ay * scale
    return new_ax, new_ay, full * cos_new


def _run_chunk(cfg: EnsembleConfig, start: int, stop: int):
    """Simulate trajectories [start, stop); returns per-point sums and finals."""
    m = stop - start
    sde = cfg.sde
    n = sde.n_steps
    record = _record_steps(n, cfg.record_every)
    if cfg.scheme == "exact":
        b = strength_from_rate(sde.gamma, sde.dt).b
        draws = np.empty((m, n))
        for j in range(m):
            draws[j] = derive_stream(cfg.master_seed, start + j).random(n)
    else:
        draws = np.empty((m, n))
        root_dt = math.sqrt(sde.dt)
        for j in range(m):
            draws[j] = derive_stream(cfg.master_seed, start + j).standard_normal(n) * root_dt

    ax = np.full(m, math.sqrt(max(0.0, 1.0 - 2.0 * cfg.initial_p0)))
    ay = np.zeros(m)
    az = np.zeros(m)
    curve = np.empty((m, record.size))
    curve[:, 0] = 0.5 * (1.0 - (ax * ax + ay * ay + az * az))
    pointer = 1
    clamps = 0
    if cfg.scheme == "exact":
        shrink_root = math.sqrt(1.0 - b * b)
    for k in range(n):
        if cfg.scheme == "exact":
            p_plus = 0.5 * (1.0 + b * az)
            sign = np.where(draws[:, k] < p_plus, 1.0, -1.0)
            q = 1.0 + sign * b * az
            shrink = shrink_root / q
            ax = ax * shrink
            ay = ay * shrink
            az = (az + sign * b) / q
        else:
            ax, ay, az, clamped = euler_update(ax, ay, az, sde.gamma, sde.dt, draws[:, k])
            clamps += int(np.count_nonzero(clamped))
        ax, ay, az = _apply_feedback_arrays(cfg.strategy, ax, ay, az, k)
        if pointer < record.size and record[pointer] == k + 1:
            curve[:, pointer] = 0.5 * (1.0 - (ax * ax + ay * ay + az * az))
            pointer += 1
    # Chunk mean and centered second moment: combining these (Chan's
    # parallel update) only ever adds nonnegative terms, so identical
    # trajectories give a spread at the rounding floor (~1e-17), not the
    # ~1e-9 artifact the sum-of-squares form leaks through cancellation.
    mean = curve.mean(axis=0)
    m2 = ((curve - mean) ** 2).sum(axis=0)
    return m, mean, m2, curve[:, -1].copy(), clamps


def run_ensemble(cfg: EnsembleConfig, n_workers: int = 1) -> EnsembleStats:
    """Run the ensemble; output is identical for any n_workers >= 1.

    Chunks of fixed width are computed (possibly concurrently) and reduced
    in trajectory order, so floating-point reduction order never varies.
    """
    if n_workers < 1:
        raise ConfigError(f"n_workers must be >= 1, got {n_workers!r}")
    n = cfg.n_trajectories
    bounds = [(start, min(start + CHUNK, n)) for start in range(0, n, CHUNK)]
    if n_workers == 1 or len(bounds) == 1:
        parts = [_run_chunk(cfg, start, stop) for start, stop in bounds]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(lambda span: _run_chunk(cfg, *span), bounds))

    record = _record_steps(cfg.sde.n_steps, cfg.record_every)
    count = 0
    mean = np.zeros(record.size)
    m2 = np.zeros(record.size)
    finals = []
    clamp_events = 0
    for part_count, part_mean, part_m2, part_finals, part_clamps in parts:
        merged = count + part_count
        delta = part_mean - mean
        mean = mean + delta * (part_count / merged)
        m2 = m2 + part_m2 + delta * delta * (count * part_count / merged)
        count = merged
        finals.append(part_finals)
        clamp_events += part_clamps
    variance = m2 / (n - 1) if n > 1 else np.zeros(record.size)
    stderr = np.sqrt(variance / n)
    times = cfg.sde.dt * record.astype(float)
    mean_curve = EntropyCurve(times, mean, "monte_carlo", stderr=stderr)
    return EnsembleStats(
        mean_curve=mean_curve,
        stderr_curve=stderr,
        per_trajectory_final=np.concatenate(finals),
        clamp_events=clamp_events,
    )
