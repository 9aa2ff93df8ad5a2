"""
Scaling experiment harness, power-law fits and the perturbative complexity estimate.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import comb
from scipy.stats import linregress

from ..config import (
    DEFAULT_G,
    DEFAULT_MC,
    DEFAULT_T0,
    MAX_ATTEMPTS,
    SCALING_TOL,
    SUCCESS_WINDOW,
)
from ..utils.errors import (
    AdiasearchError,
    InsufficientDataError,
    RangeError,
    WindowSearchError,
)
from .database import Database, SearchTarget, derive_seed, random_database, random_target
from .evolution import EvolutionResult, Schedule, evolve
from .hamiltonian import (
    HamiltonianKind,
    InitialForm,
    SearchHamiltonian,
    msas_hamiltonian,
    search_hamiltonian,
)

logger = logging.getLogger(__name__)

RecordCallback = Callable[["ScalingRecord"], None]

RECORD_COLUMNS = ["algorithm", "n", "instance", "seed", "T_star", "success_prob", "steps"]


class Algorithm(str, Enum):
    BIT_SUM = "bitsum"
    MSAS = "msas"


@dataclass(frozen=True)
class ScalingInstance:
    n: int
    index: int
    seed: int
    database: Database
    target: SearchTarget

    @property
    def solution_index(self) -> int:
        index = self.database.index_of(self.target.t)
        assert index is not None
        return index


@dataclass(frozen=True)
class ScalingRecord:
    """Evolution time at which one instance first lands in the success window."""

    algorithm: str
    n: int
    instance: int
    seed: int
    T_star: float
    success_probability: float
    steps: int
    attempts: int = 0
    status: str = "ok"
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares fit of ln T against ln N = n ln 2; alpha is the slope."""

    algorithm: str
    alpha: float
    intercept: float
    stderr: float
    n_values: List[int]
    mean_times: List[float]
    inversions: int = 0


@dataclass(frozen=True)
class PerturbativeParams:
    """
    Cutoffs of the perturbative estimate.

    m_c is proportional to Omega = log(1/delta) / log(zeta+) and E_c to
    log(1/zeta-) / log(1/delta), which equals 1/Omega when zeta+ = 1/zeta-.
    """

    m_c: float
    E_c: float
    omega: Optional[float] = None
    m_scale: float = 1.0
    e_scale: float = 1.0
    delta: Optional[float] = None
    zeta_plus: Optional[float] = None
    zeta_minus: Optional[float] = None
    epsilon0: Optional[float] = None
    s_star: Optional[float] = None

    @classmethod
    def defaults(cls, n: int) -> "PerturbativeParams":
        return cls(m_c=DEFAULT_MC, E_c=math.ceil(n / 4))

    @classmethod
    def from_raw(
        cls,
        delta: float,
        s_star: float = 0.5,
        epsilon0: float = 0.1,
        m_scale: float = 1.0,
        e_scale: float = 1.0,
    ) -> "PerturbativeParams":
        """Derive the cutoffs from delta, s* and epsilon_0 with zeta(s) = s / (1 - s)."""
        if not 0 < delta < 1:
            raise RangeError(f"delta={delta} must lie in (0, 1)")
        if not 0 < s_star - epsilon0 < s_star + epsilon0 < 1:
            raise RangeError("s* +- epsilon_0 must lie inside (0, 1) with epsilon_0 > 0")

        def zeta(s: float) -> float:
            return s / (1.0 - s)

        zeta_plus, zeta_minus = zeta(s_star + epsilon0), zeta(s_star - epsilon0)
        if zeta_plus <= 1 or zeta_minus >= 1:
            raise RangeError("need zeta+ > 1 > zeta-, i.e. s* - epsilon_0 < 0.5 < s* + epsilon_0")
        omega = math.log(1 / delta) / math.log(zeta_plus)
        return cls(
            m_c=m_scale * omega,
            E_c=e_scale * math.log(1 / zeta_minus) / math.log(1 / delta),
            omega=omega,
            m_scale=m_scale,
            e_scale=e_scale,
            delta=delta,
            zeta_plus=zeta_plus,
            zeta_minus=zeta_minus,
            epsilon0=epsilon0,
            s_star=s_star,
        )


@dataclass(frozen=True)
class PerturbativeEstimate:
    n: int
    s_plus: int
    s_minus: int
    alpha_estimate: float
    t_global: float
    t_local: float
    params: PerturbativeParams = field(repr=False, default=None)  # type: ignore[assignment]


def make_instance(n: int, k: int, seed_base: int) -> ScalingInstance:
    """Instance k at bit width n: random permutation database and uniform target."""
    seed = derive_seed(seed_base, n, k)
    return ScalingInstance(n, k, seed, random_database(n, seed), random_target(n, seed))


def instance_hamiltonian(
    instance: ScalingInstance,
    algorithm: Algorithm,
    g: float = DEFAULT_G,
    msas_form: InitialForm = InitialForm.UNIFORM_PROJECTOR,
) -> SearchHamiltonian:
    if Algorithm(algorithm) is Algorithm.MSAS:
        return msas_hamiltonian(instance.n, instance.solution_index, msas_form, g)
    return search_hamiltonian(
        instance.database, instance.target, HamiltonianKind.BIT_SUM, g
    )


def _check_window(window: Tuple[float, float], T0: float) -> None:
    low, high = window
    if not 0.0 < low < high < 1.0:
        raise RangeError(f"success window {window} must satisfy 0 < low < high < 1")
    if not T0 > 0:
        raise RangeError(f"initial time T0={T0} must be positive")


def search_window(
    h: SearchHamiltonian,
    window: Tuple[float, float] = SUCCESS_WINDOW,
    T0: float = DEFAULT_T0,
    tol: float = SCALING_TOL,
    max_attempts: int = MAX_ATTEMPTS,
) -> Tuple[EvolutionResult, List[Tuple[float, float]]]:
    """
    Find an evolution time whose success probability lies inside window.

    Scans T = T0 * 2^k until the probability reaches the lower edge, then bisects
    the last doubling interval towards the first upward crossing, accepting any
    attempt that lands inside the window.

    Returns:
        (result of the accepted attempt, attempt log of (T, probability))

    Raises:
        WindowSearchError: If no attempt lands in the window within max_attempts
    """
    _check_window(window, T0)
    low, high = window
    attempts: List[Tuple[float, float]] = []

    def attempt(T: float) -> EvolutionResult:
        result = evolve(h, Schedule.linear(T), tol)
        attempts.append((T, result.success_probability))
        return result

    lower, upper, T = 0.0, None, T0
    while len(attempts) < max_attempts:
        result = attempt(T)
        p = result.success_probability
        if low <= p <= high:
            return result, attempts
        if p > high:
            upper = T
            break
        lower, T = T, 2.0 * T
    while upper is not None and len(attempts) < max_attempts:
        mid = 0.5 * (lower + upper)
        result = attempt(mid)
        p = result.success_probability
        if low <= p <= high:
            return result, attempts
        if p < low:
            lower = mid
        else:
            upper = mid
    raise WindowSearchError(
        f"window [{low}, {high}] not entered within {max_attempts} attempts", attempts
    )


def find_time_for_window(
    instance: ScalingInstance,
    algorithm: Algorithm,
    window: Tuple[float, float] = SUCCESS_WINDOW,
    T0: float = DEFAULT_T0,
    tol: float = SCALING_TOL,
    g: float = DEFAULT_G,
    msas_form: InitialForm = InitialForm.UNIFORM_PROJECTOR,
    max_attempts: int = MAX_ATTEMPTS,
) -> ScalingRecord:
    """
    Run the window search for one instance and algorithm.

    Raises:
        WindowSearchError: With the attempt log, if the window is never entered
    """
    algorithm = Algorithm(algorithm)
    h = instance_hamiltonian(instance, algorithm, g, msas_form)
    result, attempts = search_window(h, window, T0, tol, max_attempts)
    logger.debug(
        "%s n=%d #%d: T*=%.6g P=%.4f after %d attempts",
        algorithm.value,
        instance.n,
        instance.index,
        result.total_time,
        result.success_probability,
        len(attempts),
    )
    return ScalingRecord(
        algorithm=algorithm.value,
        n=instance.n,
        instance=instance.index,
        seed=instance.seed,
        T_star=result.total_time,
        success_probability=result.success_probability,
        steps=result.steps_taken,
        attempts=len(attempts),
    )


def find_time_for_probability(
    h: SearchHamiltonian,
    threshold: float,
    T0: float = DEFAULT_T0,
    tol: float = SCALING_TOL,
    max_doublings: int = 30,
    schedule: Optional[Schedule] = None,
) -> EvolutionResult:
    """
    Double T from T0 until the success probability reaches threshold.

    The path shape of schedule (linear by default) is kept; only its total time
    is stretched.
    """
    if not 0 < threshold <= 1:
        raise RangeError(f"probability threshold {threshold} must lie in (0, 1]")
    template = schedule or Schedule.linear(T0)
    T = T0
    for _ in range(max_doublings + 1):
        result = evolve(h, template.with_total_time(T), tol)
        if result.success_probability >= threshold:
            return result
        T *= 2.0
    raise WindowSearchError(
        f"success probability {threshold} not reached by T={T / 2:g}"
    )


def _notify(callback: Optional[RecordCallback], record: ScalingRecord) -> None:
    if callback:
        try:
            callback(record)
        except Exception as e:
            logger.error("error in record callback: %s", e)


def capped_instances(n: int, instances_per_n: int) -> int:
    """At most 2^n distinct instances exist at bit width n."""
    cap = 1 << n
    if instances_per_n > cap:
        logger.warning("n=%d: capping %d instances at %d", n, instances_per_n, cap)
        return cap
    return instances_per_n


def run_scaling_experiment(
    n_range: Iterable[int],
    instances_per_n: int,
    algorithms: Sequence[Algorithm],
    seed_base: int,
    jobs: int = 1,
    on_record: Optional[RecordCallback] = None,
    window: Tuple[float, float] = SUCCESS_WINDOW,
    T0: float = DEFAULT_T0,
    tol: float = SCALING_TOL,
    g: float = DEFAULT_G,
    msas_form: InitialForm = InitialForm.UNIFORM_PROJECTOR,
) -> List[ScalingRecord]:
    """
    Run the window search for every (n, instance, algorithm) job.

    Records are streamed to on_record as jobs complete and returned sorted by
    algorithm, n and instance, so the output is independent of scheduling.
    Failed instances are returned with status "failed" and never abort the sweep.
    """
    algorithms = [Algorithm(a) for a in algorithms]
    if instances_per_n < 1:
        raise RangeError(f"instances per n must be positive, got {instances_per_n}")
    _check_window(window, T0)
    plan = []
    for n in n_range:
        for k in range(capped_instances(n, instances_per_n)):
            instance = make_instance(n, k, seed_base)
            plan.extend((instance, algorithm) for algorithm in algorithms)
    logger.info("scaling sweep: %d jobs on %d worker(s)", len(plan), jobs)

    def run_job(job: Tuple[ScalingInstance, Algorithm]) -> ScalingRecord:
        instance, algorithm = job
        try:
            return find_time_for_window(
                instance, algorithm, window, T0, tol, g, msas_form
            )
        except AdiasearchError as e:
            logger.warning(
                "%s n=%d #%d failed: %s", algorithm.value, instance.n, instance.index, e
            )
            return ScalingRecord(
                algorithm.value, instance.n, instance.index, instance.seed,
                math.nan, math.nan, 0, status="failed", error=str(e),
            )

    records: List[ScalingRecord] = []
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(run_job, job) for job in plan]
            for future in as_completed(futures):
                record = future.result()
                records.append(record)
                _notify(on_record, record)
    else:
        for job in plan:
            record = run_job(job)
            records.append(record)
            _notify(on_record, record)

    order = {a.value: i for i, a in enumerate(algorithms)}
    records.sort(key=lambda r: (order[r.algorithm], r.n, r.instance))
    return records


def fit_power_law(
    n_values: Sequence[int], mean_times: Sequence[float], algorithm: str = ""
) -> ScalingFit:
    """
    Fit T = c * N^alpha with N = 2^n by least squares on (n ln 2, ln T).

    Raises:
        InsufficientDataError: With fewer than three distinct n values
    """
    n_arr = np.asarray(n_values, dtype=np.float64)
    t_arr = np.asarray(mean_times, dtype=np.float64)
    if np.unique(n_arr).size < 3:
        raise InsufficientDataError(
            f"{algorithm or 'fit'}: need at least 3 distinct n values, got {np.unique(n_arr).size}"
        )
    fit = linregress(n_arr * math.log(2.0), np.log(t_arr))
    inversions = [
        int(n_arr[i + 1]) for i in range(n_arr.size - 1) if t_arr[i + 1] < t_arr[i]
    ]
    if len(inversions) == 1:
        logger.warning("%s: mean time decreases once, at n=%d", algorithm, inversions[0])
    elif inversions:
        logger.warning("%s: mean time decreases at n=%s", algorithm, inversions)
    return ScalingFit(
        algorithm=algorithm,
        alpha=float(fit.slope),
        intercept=float(fit.intercept),
        stderr=float(fit.stderr),
        n_values=[int(n) for n in n_arr],
        mean_times=[float(t) for t in t_arr],
        inversions=len(inversions),
    )


def fit_alpha(records: Sequence[ScalingRecord], algorithm: Optional[str] = None) -> ScalingFit:
    """
    Fit the scaling exponent from the mean T* per bit width of one algorithm.

    Failed records are excluded.

    Raises:
        RangeError: If records mix algorithms and none is selected
        InsufficientDataError: With fewer than three usable n values
    """
    usable = [r for r in records if r.ok and (algorithm is None or r.algorithm == algorithm)]
    names = {r.algorithm for r in usable}
    if len(names) > 1:
        raise RangeError(f"records mix algorithms {sorted(names)}; select one")
    name = algorithm or (names.pop() if names else "")
    by_n: Dict[int, List[float]] = {}
    for record in usable:
        by_n.setdefault(record.n, []).append(record.T_star)
    n_values = sorted(by_n)
    mean_times = [float(np.mean(by_n[n])) for n in n_values]
    return fit_power_law(n_values, mean_times, name)


def fit_summary(fit: ScalingFit) -> dict:
    return {
        "algorithm": fit.algorithm,
        "alpha": fit.alpha,
        "stderr": fit.stderr,
        "intercept": fit.intercept,
        "n_values": fit.n_values,
        "mean_times": fit.mean_times,
    }


def records_frame(records: Sequence[ScalingRecord]) -> pd.DataFrame:
    """Table with columns algorithm, n, instance, seed, T_star, success_prob, steps."""
    rows = [
        (r.algorithm, r.n, r.instance, str(r.seed), r.T_star, r.success_probability, r.steps)
        for r in records
    ]
    return pd.DataFrame(rows, columns=RECORD_COLUMNS)


def hamming_ball(n: int, radius: float) -> int:
    """Number of n-bit codes within Hamming distance strictly below radius of a point."""
    return sum(comb(n, i, exact=True) for i in range(min(n + 1, math.ceil(radius))))


def perturbative_cardinalities(
    n: int, params: Optional[PerturbativeParams] = None
) -> PerturbativeEstimate:
    """
    Estimate |S+|, |S-| and the exponent alpha from the binomial level degeneracies.

    |S+| = sum_{i < m_c} C(n, i), |S-| = sum_{i < E_c} C(n, i),
    alpha = ln|S-| / (n ln 2), T_global ~ |S-|/|S+| and T_local ~ sqrt(T_global).

    Raises:
        RangeError: If a cutoff lies outside (0, n]
    """
    params = params or PerturbativeParams.defaults(n)
    if n < 1:
        raise RangeError(f"bit width n={n} must be at least 1")
    if not 0 < params.m_c <= n:
        raise RangeError(f"cutoff m_c={params.m_c:g} outside (0, {n}]")
    if not 0 < params.E_c <= n:
        raise RangeError(f"cutoff E_c={params.E_c:g} outside (0, {n}]")
    s_plus = hamming_ball(n, params.m_c)
    s_minus = hamming_ball(n, params.E_c)
    t_global = s_minus / s_plus
    return PerturbativeEstimate(
        n=n,
        s_plus=s_plus,
        s_minus=s_minus,
        alpha_estimate=math.log(s_minus) / (n * math.log(2.0)),
        t_global=t_global,
        t_local=math.sqrt(t_global),
        params=params,
    )


def qubit_requirements(n: int) -> Dict[str, int]:
    """Qubits needed for an n-bit database by each search approach."""
    return {"bitsum": n, "msas": n, "grover_complete": 3 * n}


def perturbative_summary(estimate: PerturbativeEstimate) -> dict:
    params = {k: v for k, v in asdict(estimate.params).items() if v is not None}
    return {
        "n": estimate.n,
        "s_plus": estimate.s_plus,
        "s_minus": estimate.s_minus,
        "alpha_estimate": estimate.alpha_estimate,
        "t_global": estimate.t_global,
        "t_local": estimate.t_local,
        "params": params,
        "qubits": qubit_requirements(estimate.n),
    }
