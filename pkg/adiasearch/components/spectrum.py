"""
Instantaneous spectrum of H(s) and the minimum gap between the two lowest levels.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy.linalg
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import lobpcg
from scipy.special import comb

from ..config import (
    BLOCK_GUARD,
    BLOCK_MAXITER,
    DEGENERACY_GAP,
    DENSE_LIMIT,
    GAP_LEVELS,
    GAP_XTOL,
    GRID_POINTS,
    PLOT_LEVELS,
    RESIDUAL_LIMIT,
)
from ..utils.errors import DegeneracyError, RangeError, SpectrumError
from .hamiltonian import (
    InitialForm,
    SearchHamiltonian,
    apply,
    as_linear_operator,
    dense_matrix,
    norm_bound,
)

logger = logging.getLogger(__name__)

METHODS = ("auto", "dense", "iterative")


@dataclass(frozen=True, eq=False)
class SpectrumProfile:
    """
    Lowest k eigenvalues of H(s) on a grid.

    levels has shape (len(s_grid), k), ascending along each row. min_gap and
    s_star are None when fewer than two levels were computed.
    """

    s_grid: np.ndarray
    levels: np.ndarray
    min_gap: Optional[float]
    s_star: Optional[float]
    refined: bool = False

    @property
    def gaps(self) -> np.ndarray:
        return self.levels[:, 1] - self.levels[:, 0]


def default_grid(points: int = GRID_POINTS) -> np.ndarray:
    return np.linspace(0.0, 1.0, points)


def endpoint_levels(h: SearchHamiltonian, s: float, k: int) -> Optional[np.ndarray]:
    """
    Exact lowest k levels at s = 0 and s = 1, where the spectrum is known in closed form.

    H(1) is the problem diagonal. H(0) is either g sum sigma_x, with levels
    g (2m - n) of multiplicity C(n, m), or the projector with levels 0 and 1.
    Returns None for 0 < s < 1.
    """
    if s == 1.0:
        return np.sort(h.problem_diag.diag)[:k]
    if s != 0.0:
        return None
    if h.initial_form is InitialForm.UNIFORM_PROJECTOR:
        return np.array([0.0] + [1.0] * (k - 1))
    values: List[float] = []
    for m in range(h.n + 1):
        values.extend([h.g * (2 * m - h.n)] * min(comb(h.n, m, exact=True), k - len(values)))
        if len(values) >= k:
            break
    return np.array(values)


def _block_levels(h: SearchHamiltonian, s: float, k: int) -> np.ndarray:
    # Guard vectors cover a whole first shell of n near-degenerate levels next to level k.
    block = min(k + max(BLOCK_GUARD, h.n + 1), h.dimension)
    if h.dimension < 5 * block:
        logger.debug("dimension %d too small for a block of %d; diagonalizing", h.dimension, block)
        return scipy.linalg.eigh(
            dense_matrix(h, s, max_bits=h.n), eigvals_only=True, subset_by_index=[0, k - 1]
        )
    scale = max(norm_bound(h), 1.0)
    start = np.random.default_rng(0).standard_normal((h.dimension, block))
    try:
        values, vectors = lobpcg(
            as_linear_operator(h, s),
            start,
            tol=1e-2 * RESIDUAL_LIMIT * scale,
            maxiter=BLOCK_MAXITER,
            largest=False,
        )
    except np.linalg.LinAlgError as e:
        raise SpectrumError(f"block eigensolver broke down: {e}", s) from e
    order = np.argsort(values)[:k]
    values, vectors = values[order], vectors[:, order]
    for value, vector in zip(values, vectors.T):
        residual = float(np.linalg.norm(apply(h, s, vector) - value * vector))
        if residual > RESIDUAL_LIMIT * scale:
            raise SpectrumError(f"eigenpair residual {residual:.3g} too large", s)
    return values


def lowest_levels(
    h: SearchHamiltonian, s: float, k: int, method: str = "auto"
) -> np.ndarray:
    """
    Lowest k eigenvalues of H(s), ascending.

    The endpoints s = 0 and s = 1 are exact. Inside the interval dense
    diagonalization is used up to DENSE_LIMIT bits, a seeded LOBPCG block
    iteration above (or when method="iterative").

    Raises:
        SpectrumError: If the iterative solver fails or its residual is too large
    """
    if method not in METHODS:
        raise RangeError(f"unknown eigensolver method {method!r}")
    if not 1 <= k <= h.dimension:
        raise RangeError(f"level count k={k} outside [1, {h.dimension}]")
    exact = endpoint_levels(h, s, k)
    if exact is not None:
        return exact
    if method == "dense" or (method == "auto" and h.n <= DENSE_LIMIT):
        return scipy.linalg.eigh(
            dense_matrix(h, s, max_bits=max(DENSE_LIMIT, h.n)),
            eigvals_only=True,
            subset_by_index=[0, k - 1],
        )
    return _block_levels(h, s, k)


def _check_grid(s_grid: np.ndarray) -> None:
    if s_grid.ndim != 1 or s_grid.size < 1:
        raise RangeError("s grid must be a non-empty 1-d sequence")
    if s_grid[0] < 0.0 or s_grid[-1] > 1.0 or np.any(np.diff(s_grid) <= 0):
        raise RangeError("s grid must increase within [0, 1]")


def _refine_gap(
    h: SearchHamiltonian, s_grid: np.ndarray, gaps: np.ndarray, method: str
) -> Tuple[float, float, bool]:
    i = int(np.argmin(gaps))
    best_gap, best_s = float(gaps[i]), float(s_grid[i])
    if s_grid.size < 3:
        return best_gap, best_s, False

    def gap_at(s: float) -> float:
        levels = lowest_levels(h, float(np.clip(s, 0.0, 1.0)), 2, method)
        return float(levels[1] - levels[0])

    lo, hi = s_grid[max(i - 1, 0)], s_grid[min(i + 1, s_grid.size - 1)]
    if 0 < i < s_grid.size - 1 and gaps[i] < gaps[i - 1] and gaps[i] < gaps[i + 1]:
        found = minimize_scalar(
            gap_at, bracket=(lo, best_s, hi), method="golden", tol=GAP_XTOL
        )
    else:
        found = minimize_scalar(
            gap_at, bounds=(lo, hi), method="bounded", options={"xatol": GAP_XTOL}
        )
    if lo <= found.x <= hi and found.fun < best_gap:
        best_gap, best_s = float(found.fun), float(found.x)
    return best_gap, best_s, True


def check_continuity(
    h: SearchHamiltonian, s_grid: np.ndarray, levels: np.ndarray, slack: float = 1e-9
) -> int:
    """
    Count level jumps between neighbouring grid points that exceed ||dH/ds|| * ds.

    Each level of H(s) is Lipschitz in s with constant norm_bound(h), so a larger
    jump means an eigensolve missed a level. Jumps are logged, not raised.
    """
    if s_grid.size < 2:
        return 0
    limit = norm_bound(h) * np.diff(s_grid)[:, None] + slack
    jumps = np.abs(np.diff(levels, axis=0)) > limit
    count = int(np.count_nonzero(jumps))
    if count:
        row, level = np.argwhere(jumps)[0]
        logger.warning(
            "level %d jumps by more than the Lipschitz bound between s=%.6g and s=%.6g "
            "(%d violation(s))",
            level,
            s_grid[row],
            s_grid[row + 1],
            count,
        )
    return count


def instantaneous_spectrum(
    h: SearchHamiltonian,
    s_grid: Optional[Sequence[float]] = None,
    k: int = PLOT_LEVELS,
    jobs: int = 1,
    method: str = "auto",
    refine: bool = True,
) -> SpectrumProfile:
    """
    Compute the lowest k levels of H(s) at every grid point and locate the minimum gap.

    Args:
        h: Search Hamiltonian
        s_grid: Increasing points in [0, 1]; 201 uniform points by default
        k: Number of levels, at most 2^n
        jobs: Worker threads evaluating grid points
        method: "auto", "dense" or "iterative"
        refine: Golden-section refinement of the coarse minimum gap

    Returns:
        SpectrumProfile

    Raises:
        RangeError: If k or the grid is invalid
        SpectrumError: If an eigensolve fails
    """
    grid = default_grid() if s_grid is None else np.asarray(s_grid, dtype=np.float64)
    _check_grid(grid)
    if not 1 <= k <= h.dimension:
        raise RangeError(f"level count k={k} outside [1, {h.dimension}]")

    def solve(s: float) -> np.ndarray:
        return lowest_levels(h, float(s), k, method)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(solve, grid))
    else:
        rows = [solve(s) for s in grid]
    levels = np.vstack(rows)
    check_continuity(h, grid, levels)

    if k < 2:
        return SpectrumProfile(grid, levels, None, None, False)
    gaps = levels[:, 1] - levels[:, 0]
    if refine:
        gap, s_star, refined = _refine_gap(h, grid, gaps, method)
    else:
        i = int(np.argmin(gaps))
        gap, s_star, refined = float(gaps[i]), float(grid[i]), False
    logger.debug("minimum gap %.6g at s*=%.6g over %d points", gap, s_star, grid.size)
    return SpectrumProfile(grid, levels, gap, s_star, refined)


def min_gap(
    h: SearchHamiltonian,
    grid_points: int = GRID_POINTS,
    jobs: int = 1,
    method: str = "auto",
) -> Tuple[float, float]:
    """
    Minimum ground/first-excited gap over s in [0, 1] and its position s*.

    Raises:
        DegeneracyError: If the ground state is degenerate (gap below 1e-12)
    """
    profile = instantaneous_spectrum(
        h, default_grid(grid_points), GAP_LEVELS, jobs=jobs, method=method
    )
    assert profile.min_gap is not None and profile.s_star is not None
    if profile.min_gap < DEGENERACY_GAP:
        raise DegeneracyError(
            f"ground state degenerate near s={profile.s_star:.6g} "
            f"(gap {profile.min_gap:.3g})"
        )
    return profile.min_gap, profile.s_star


def gap_profile(
    h: SearchHamiltonian,
    s_grid: Optional[Sequence[float]] = None,
    jobs: int = 1,
) -> Tuple[np.ndarray, np.ndarray]:
    """E_1 - E_0 on a grid, the input of a gap-adaptive schedule."""
    profile = instantaneous_spectrum(h, s_grid, GAP_LEVELS, jobs=jobs, refine=False)
    return profile.s_grid, profile.gaps


def gap_summary(profile: SpectrumProfile) -> dict:
    return {
        "min_gap": profile.min_gap,
        "s_star": profile.s_star,
        "grid_points": int(profile.s_grid.size),
        "refined": profile.refined,
    }


def spectrum_frame(profile: SpectrumProfile) -> pd.DataFrame:
    """Wide table with columns s, E_0 ... E_{k-1}."""
    k = profile.levels.shape[1]
    frame = pd.DataFrame(profile.levels, columns=[f"E_{i}" for i in range(k)])
    frame.insert(0, "s", profile.s_grid)
    return frame


def level_plot_data(profile: SpectrumProfile) -> pd.DataFrame:
    """Long-format levels: series, x (= s), key (= level index), value."""
    rows = [
        ("level", float(s), i, float(e))
        for s, row in zip(profile.s_grid, profile.levels)
        for i, e in enumerate(row)
    ]
    return pd.DataFrame(rows, columns=["series", "x", "key", "value"])
