"""
Time-dependent Schroedinger integration under H(t) = [1 - s(t)] H_i + s(t) H_p.

Units have hbar = 1, so i dpsi/dt = H(t) psi. The adaptive integrator is an
embedded Runge-Kutta 4(5) pair with the step controlled on the max-norm of the
local error estimate. The state is never renormalized; the norm drift is
reported instead.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.integrate import cumulative_trapezoid

from ..config import DEFAULT_TOL, NORM_DRIFT_LIMIT
from ..utils.errors import DomainError, IntegrationError, RangeError
from .hamiltonian import SearchHamiltonian, apply, initial_state, norm_bound
from .operators import WaveState

logger = logging.getLogger(__name__)

Derivative = Callable[[float, np.ndarray], np.ndarray]

# Dormand-Prince 5(4) coefficients
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


class ScheduleKind(str, Enum):
    LINEAR = "linear"
    GAP_ADAPTIVE = "gap-adaptive"


@dataclass(frozen=True, eq=False)
class Schedule:
    """
    Monotone interpolation path s(t) with s(0) = 0 and s(T) = 1.

    Gap-adaptive schedules store s tabulated against the reduced time u = t / T.
    """

    total_time: float
    kind: ScheduleKind = ScheduleKind.LINEAR
    u_grid: Optional[np.ndarray] = None
    s_grid: Optional[np.ndarray] = None
    gap_s: Optional[np.ndarray] = None
    gap_values: Optional[np.ndarray] = None
    epsilon: Optional[float] = None
    natural_time: Optional[float] = None

    def __post_init__(self):
        if not np.isfinite(self.total_time) or self.total_time <= 0:
            raise RangeError(f"total time T={self.total_time} must be positive")
        object.__setattr__(self, "kind", ScheduleKind(self.kind))

    @classmethod
    def linear(cls, total_time: float) -> "Schedule":
        return cls(float(total_time))

    def __call__(self, t: float) -> float:
        u = min(max(t / self.total_time, 0.0), 1.0)
        if self.kind is ScheduleKind.LINEAR:
            return u
        return float(np.interp(u, self.u_grid, self.s_grid))

    def time_at(self, s: float) -> float:
        """Inverse of the schedule: the time at which s is reached."""
        if self.kind is ScheduleKind.LINEAR:
            return s * self.total_time
        return float(np.interp(s, self.s_grid, self.u_grid)) * self.total_time

    def rate(self, t: float) -> float:
        """ds/dt at time t."""
        if self.kind is ScheduleKind.LINEAR:
            return 1.0 / self.total_time
        gap = np.interp(self(t), self.gap_s, self.gap_values)
        return float(self.natural_time / self.total_time * self.epsilon * gap**2)

    def with_total_time(self, total_time: float) -> "Schedule":
        """Same path shape stretched to a new total time."""
        return Schedule(
            float(total_time),
            self.kind,
            self.u_grid,
            self.s_grid,
            self.gap_s,
            self.gap_values,
            self.epsilon,
            self.natural_time,
        )


def make_gap_adaptive_schedule(
    gap_profile: Tuple[Sequence[float], Sequence[float]],
    epsilon: float,
    total_time: Optional[float] = None,
    resolution: int = 4001,
) -> Schedule:
    """
    Build a schedule slowed where the gap is small, ds/dt = epsilon * gap(s)^2.

    Args:
        gap_profile: (s values spanning [0, 1], gap at each s)
        epsilon: Rate constant
        total_time: Rescale so that s(total_time) = 1; defaults to the natural time
        resolution: Number of s nodes used to tabulate the schedule

    Returns:
        Gap-adaptive Schedule

    Raises:
        DomainError: If any gap is not strictly positive
        RangeError: If the profile does not span [0, 1] or epsilon <= 0
    """
    s_nodes = np.asarray(gap_profile[0], dtype=np.float64)
    gaps = np.asarray(gap_profile[1], dtype=np.float64)
    if s_nodes.shape != gaps.shape or s_nodes.size < 2:
        raise RangeError("gap profile needs matching s and gap arrays of length >= 2")
    if np.any(np.diff(s_nodes) <= 0) or s_nodes[0] != 0.0 or s_nodes[-1] != 1.0:
        raise RangeError("gap profile s values must increase from 0 to 1")
    if not np.all(np.isfinite(gaps)) or np.any(gaps <= 0):
        raise DomainError("gap profile must be strictly positive on [0, 1]")
    if not epsilon > 0:
        raise RangeError(f"rate constant epsilon={epsilon} must be positive")

    s_fine = np.linspace(0.0, 1.0, resolution)
    gap_fine = np.interp(s_fine, s_nodes, gaps)
    elapsed = cumulative_trapezoid(1.0 / (epsilon * gap_fine**2), s_fine, initial=0.0)
    natural_time = float(elapsed[-1])
    u_grid = elapsed / natural_time
    u_grid[-1] = 1.0
    logger.debug("gap-adaptive schedule: natural time %.6g", natural_time)
    return Schedule(
        float(total_time) if total_time is not None else natural_time,
        ScheduleKind.GAP_ADAPTIVE,
        u_grid,
        s_fine,
        s_nodes,
        gaps,
        float(epsilon),
        natural_time,
    )


@dataclass(frozen=True, eq=False)
class TrajectorySample:
    t: float
    s: float
    probabilities: np.ndarray


@dataclass(frozen=True, eq=False)
class EvolutionResult:
    """
    Outcome of one evolution run.

    success_probability is |amplitude at solution_index|^2, solution_index being
    the argmin of the problem diagonal. best_match marks runs whose minimal
    problem energy (residual) is nonzero, i.e. the target is absent.
    """

    final_state: WaveState
    success_probability: float
    solution_index: int
    total_time: float
    norm_drift: float
    steps_taken: int
    rejected_steps: int = 0
    residual: float = 0.0
    trajectory: List[TrajectorySample] = field(default_factory=list)

    @property
    def best_match(self) -> bool:
        return self.residual != 0.0

    @property
    def accurate(self) -> bool:
        return self.norm_drift < NORM_DRIFT_LIMIT


def rk4_step(fun: Derivative, t: float, y: np.ndarray, dt: float) -> np.ndarray:
    """Classical fourth-order Runge-Kutta step."""
    k1 = fun(t, y)
    k2 = fun(t + dt / 2, y + dt / 2 * k1)
    k3 = fun(t + dt / 2, y + dt / 2 * k2)
    k4 = fun(t + dt, y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def dormand_prince_step(
    fun: Derivative,
    t: float,
    y: np.ndarray,
    dt: float,
    k1: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    One embedded 5(4) step.

    Returns:
        (fifth-order solution, local error estimate, derivative at the new point)
    """
    stages = [fun(t, y) if k1 is None else k1]
    for c, row in zip(_C[1:], _A[1:]):
        increment = sum(a * k for a, k in zip(row, stages) if a != 0.0)
        stages.append(fun(t + c * dt, y + dt * increment))
    y_new = y + dt * sum(b * k for b, k in zip(_B5, stages) if b != 0.0)
    stages.append(fun(t + dt, y_new))
    error = dt * sum(e * k for e, k in zip(_E, stages) if e != 0.0)
    return y_new, error, stages[-1]


def _schroedinger(h: SearchHamiltonian, schedule: Schedule) -> Derivative:
    def derivative(t: float, psi: np.ndarray) -> np.ndarray:
        return -1j * apply(h, schedule(t), psi)

    return derivative


def evolve(
    h: SearchHamiltonian,
    schedule: Schedule,
    tol: float = DEFAULT_TOL,
    sample_count: int = 0,
    fixed_steps: Optional[int] = None,
    max_steps: int = 10_000_000,
) -> EvolutionResult:
    """
    Integrate i dpsi/dt = H(t) psi from the ground state of H_i over [0, T].

    Args:
        h: Search Hamiltonian
        schedule: Interpolation schedule s(t)
        tol: Per-step bound on the max-norm of the local error estimate
        sample_count: Number of evenly spaced trajectory samples (0 for none)
        fixed_steps: Use this many uniform classical RK4 steps instead of adapting
        max_steps: Cap on accepted steps

    Returns:
        EvolutionResult

    Raises:
        RangeError: If tol or sample_count is invalid
        IntegrationError: If the step size underflows or the step cap is hit
    """
    if not tol > 0:
        raise RangeError(f"tolerance {tol} must be positive")
    if sample_count < 0:
        raise RangeError(f"sample count {sample_count} must be non-negative")
    psi = initial_state(h.n, h.initial_form).amplitudes.copy()
    fun = _schroedinger(h, schedule)
    total_time = schedule.total_time
    sample_times = np.linspace(0.0, total_time, sample_count) if sample_count else []
    trajectory: List[TrajectorySample] = []

    if fixed_steps is not None:
        psi, drift, steps, rejected = _integrate_fixed(
            fun, psi, schedule, fixed_steps, sample_count, trajectory
        )
    else:
        psi, drift, steps, rejected = _integrate_adaptive(
            fun, psi, h, schedule, tol, sample_times, trajectory, max_steps
        )

    state = WaveState(psi)
    diag = h.problem_diag.diag
    solution_index = int(np.argmin(diag))
    result = EvolutionResult(
        final_state=state,
        success_probability=float(np.abs(psi[solution_index]) ** 2),
        solution_index=solution_index,
        total_time=total_time,
        norm_drift=drift,
        steps_taken=steps,
        rejected_steps=rejected,
        residual=float(diag[solution_index]),
        trajectory=trajectory,
    )
    if not result.accurate:
        logger.warning(
            "norm drift %.3g exceeds %.0e at T=%g; result flagged inaccurate",
            drift,
            NORM_DRIFT_LIMIT,
            total_time,
        )
    if result.best_match:
        logger.info(
            "target absent; best match index %d at residual %g",
            solution_index,
            result.residual,
        )
    return result


def _record(
    trajectory: List[TrajectorySample], schedule: Schedule, t: float, psi: np.ndarray
) -> None:
    trajectory.append(TrajectorySample(t, schedule(t), np.abs(psi) ** 2))


def _integrate_fixed(
    fun: Derivative,
    psi: np.ndarray,
    schedule: Schedule,
    steps: int,
    sample_count: int,
    trajectory: List[TrajectorySample],
) -> Tuple[np.ndarray, float, int, int]:
    if steps < 1:
        raise RangeError(f"fixed step count {steps} must be positive")
    grid = np.linspace(0.0, schedule.total_time, steps + 1)
    # Samples land on the nearest grid points.
    sample_steps = set(np.round(np.linspace(0, steps, sample_count)).astype(int).tolist())
    drift = 0.0
    if 0 in sample_steps:
        _record(trajectory, schedule, 0.0, psi)
    for i in range(steps):
        psi = rk4_step(fun, grid[i], psi, grid[i + 1] - grid[i])
        drift = max(drift, abs(np.linalg.norm(psi) - 1.0))
        if i + 1 in sample_steps:
            _record(trajectory, schedule, grid[i + 1], psi)
    return psi, drift, steps, 0


def _integrate_adaptive(
    fun: Derivative,
    psi: np.ndarray,
    h: SearchHamiltonian,
    schedule: Schedule,
    tol: float,
    sample_times: Union[np.ndarray, List[float]],
    trajectory: List[TrajectorySample],
    max_steps: int,
) -> Tuple[np.ndarray, float, int, int]:
    total_time = schedule.total_time
    scale = max(norm_bound(h), 1e-12)
    dt = min(total_time, 0.1 / scale)
    min_dt = 1e-13 * max(total_time, 1.0)
    t = 0.0
    drift = 0.0
    steps = rejected = 0
    pending = list(sample_times)
    while pending and pending[0] <= 0.0:
        _record(trajectory, schedule, pending.pop(0), psi)
    k1 = fun(t, psi)

    while t < total_time:
        t_stop = pending[0] if pending else total_time
        step = min(dt, t_stop - t)
        landing = step == t_stop - t
        psi_new, error, k_new = dormand_prince_step(fun, t, psi, step, k1)
        err = float(np.max(np.abs(error)))
        if err <= tol:
            t = t_stop if landing else t + step
            psi, k1 = psi_new, k_new
            steps += 1
            drift = max(drift, abs(float(np.linalg.norm(psi)) - 1.0))
            while pending and pending[0] <= t:
                _record(trajectory, schedule, pending.pop(0), psi)
            if steps >= max_steps:
                raise IntegrationError(f"step cap {max_steps} reached", last_t=t)
            factor = MAX_FACTOR if err == 0.0 else SAFETY * (tol / err) ** 0.2
            dt = step * min(MAX_FACTOR, max(MIN_FACTOR, factor))
        else:
            rejected += 1
            factor = SAFETY * (tol / err) ** 0.2
            dt = step * max(MIN_FACTOR, min(1.0, factor))
            if dt < min_dt:
                raise IntegrationError(
                    f"step size {dt:.3g} underflowed before reaching tol={tol:g}",
                    last_t=t,
                )
    logger.debug(
        "integrated to T=%g in %d steps (%d rejected), drift %.3g",
        total_time,
        steps,
        rejected,
        drift,
    )
    return psi, drift, steps, rejected


def success_probability(
    result: Union[EvolutionResult, WaveState], solution_index: Optional[int] = None
) -> float:
    """Return |<solution|psi(T)>|^2 for a result or a bare state."""
    state = result.final_state if isinstance(result, EvolutionResult) else result
    if solution_index is None:
        if not isinstance(result, EvolutionResult):
            raise RangeError("a solution index is needed for a bare state")
        solution_index = result.solution_index
    if not 0 <= solution_index < state.dimension:
        raise RangeError(f"solution index {solution_index} outside the state")
    return float(np.abs(state.amplitudes[solution_index]) ** 2)


def result_summary(result: EvolutionResult, target: int, n: int) -> dict:
    """JSON summary of a run."""
    return {
        "n": n,
        "target": target,
        "solution_index": result.solution_index,
        "T": result.total_time,
        "success_probability": result.success_probability,
        "norm_drift": result.norm_drift,
        "steps_taken": result.steps_taken,
        "rejected_steps": result.rejected_steps,
        "best_match": result.best_match,
        "residual": result.residual,
        "accurate": result.accurate,
    }


def trajectory_frame(result: EvolutionResult) -> pd.DataFrame:
    """Wide table with columns t, s, p_0 ... p_{N-1}."""
    size = result.final_state.dimension
    rows = [[sample.t, sample.s, *sample.probabilities] for sample in result.trajectory]
    return pd.DataFrame(rows, columns=["t", "s", *(f"p_{i}" for i in range(size))])


def occupation_plot_data(result: EvolutionResult) -> pd.DataFrame:
    """Long-format occupations: series, x (= t), key (= basis index), value."""
    rows = [
        ("occupation", sample.t, i, p)
        for sample in result.trajectory
        for i, p in enumerate(sample.probabilities)
    ]
    return pd.DataFrame(rows, columns=["series", "x", "key", "value"])
