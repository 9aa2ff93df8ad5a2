"""
Problem, initial and interpolating Hamiltonians, applied matrix-free.

H(s) = (1 - s) H_i + s H_p, with H_p diagonal and H_i either a transverse
field g * sum_j sigma_x^j or the projector I - |u><u| onto the complement of
the uniform superposition.
"""
import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Union

import numpy as np
from scipy.sparse.linalg import LinearOperator

from ..config import DEFAULT_G, DENSE_LIMIT
from ..utils.errors import DomainError, InputError, RangeError
from .database import Database, SearchTarget, bit_operator, complement, database_operator
from .operators import DiagonalOperator, WaveState

logger = logging.getLogger(__name__)


class HamiltonianKind(str, Enum):
    BIT_SUM = "bitsum"
    FULL_VALUE = "fullvalue"
    MSAS = "msas"


class InitialForm(str, Enum):
    TRANSVERSE_FIELD = "transverse"
    UNIFORM_PROJECTOR = "projector"


def popcount(x: np.ndarray, n: int) -> np.ndarray:
    """Hamming weight of each n-bit integer in x."""
    x = np.asarray(x, dtype=np.int64)
    weight = np.zeros_like(x)
    for j in range(n):
        weight += (x >> j) & 1
    return weight


@dataclass(frozen=True)
class SearchHamiltonian:
    """
    Interpolating Hamiltonian of one search instance.

    Args:
        problem_diag: Diagonal of H_p
        g: Transverse coupling strength (unused by the projector form)
        kind: Which problem Hamiltonian the diagonal encodes
        initial_form: Form of H_i
        marked_index: Marked state m, only for the MSAS kind
    """

    problem_diag: DiagonalOperator
    g: float = DEFAULT_G
    kind: HamiltonianKind = HamiltonianKind.BIT_SUM
    initial_form: InitialForm = InitialForm.TRANSVERSE_FIELD
    marked_index: Optional[int] = None

    def __post_init__(self):
        if not np.isfinite(self.g) or self.g <= 0:
            raise RangeError(f"coupling strength g={self.g} must be positive")
        object.__setattr__(self, "kind", HamiltonianKind(self.kind))
        object.__setattr__(self, "initial_form", InitialForm(self.initial_form))

    def check_invariants(self) -> "SearchHamiltonian":
        """Verify the entry invariants of the problem diagonal for its kind."""
        diag = self.problem_diag.diag
        if self.kind is HamiltonianKind.BIT_SUM:
            if not np.all((diag == np.round(diag)) & (diag >= 0) & (diag <= self.n)):
                raise DomainError(f"bit-sum diagonal entries must be integers in [0, {self.n}]")
        elif self.kind is HamiltonianKind.FULL_VALUE:
            roots = np.sqrt(diag)
            if not np.all((roots == np.round(roots)) & (roots < self.dimension)):
                raise DomainError("full-value diagonal entries must be squares below 4^n")
        elif self.kind is HamiltonianKind.MSAS:
            if self.marked_index is None:
                raise InputError("MSAS Hamiltonian needs a marked index")
            zeros = np.flatnonzero(diag == 0.0)
            if not self.problem_diag.is_binary() or list(zeros) != [self.marked_index]:
                raise DomainError("MSAS diagonal must be all ones except 0 at the marked index")
        return self

    @property
    def dimension(self) -> int:
        return self.problem_diag.dimension

    @property
    def n(self) -> int:
        return self.problem_diag.n

    def initial_norm(self) -> float:
        if self.initial_form is InitialForm.TRANSVERSE_FIELD:
            return self.n * self.g
        return 1.0

    def problem_norm(self) -> float:
        return float(np.max(np.abs(self.problem_diag.diag)))

    def shifted(self, c: float) -> "SearchHamiltonian":
        """Copy with c * I added to the problem diagonal."""
        return replace(self, problem_diag=DiagonalOperator(self.problem_diag.diag + c))


def norm_bound(h: SearchHamiltonian) -> float:
    """Upper bound ||H_i|| + ||H_p|| on the operator norm of dH/ds."""
    return h.initial_norm() + h.problem_norm()


def problem_hamiltonian_fullvalue(db: Database, target: SearchTarget) -> DiagonalOperator:
    """H_p = (D - t)^2, entry i equal to (v_i - t)^2."""
    _check_target(db, target)
    return DiagonalOperator((database_operator(db).diag - target.t) ** 2)


def problem_hamiltonian(db: Database, target: SearchTarget) -> DiagonalOperator:
    """
    Summed bit problem Hamiltonian sum_j (D_j * not(t_j) + t_j * (I - D_j)).

    Entry i is the Hamming distance between v_i and t, an integer in [0, n].

    Args:
        db: Database
        target: Search target of the same bit width

    Returns:
        Problem Hamiltonian diagonal
    """
    _check_target(db, target)
    total = DiagonalOperator(np.zeros(db.size))
    for j in range(db.n):
        d_j = bit_operator(db, j)
        if target.bit(j):
            total = total + complement(d_j)
        else:
            total = total + d_j
    return total


def _check_target(db: Database, target: SearchTarget) -> None:
    if target.n != db.n:
        raise RangeError(f"target width {target.n} differs from database width {db.n}")


def search_hamiltonian(
    db: Database,
    target: SearchTarget,
    kind: HamiltonianKind = HamiltonianKind.BIT_SUM,
    g: float = DEFAULT_G,
    initial_form: InitialForm = InitialForm.TRANSVERSE_FIELD,
) -> SearchHamiltonian:
    """Build the interpolating Hamiltonian for a database search."""
    kind = HamiltonianKind(kind)
    if kind is HamiltonianKind.BIT_SUM:
        h = SearchHamiltonian(problem_hamiltonian(db, target), g, kind, initial_form)
        return h.check_invariants()
    if kind is HamiltonianKind.FULL_VALUE:
        diag = problem_hamiltonian_fullvalue(db, target)
        return SearchHamiltonian(diag, g, kind, initial_form).check_invariants()
    marked = db.index_of(target.t)
    if marked is None:
        raise InputError(f"target {target.t} is absent; MSAS needs a marked state")
    return msas_hamiltonian(db.n, marked, initial_form, g)


def msas_hamiltonian(
    n: int,
    m: int,
    initial_form: InitialForm = InitialForm.UNIFORM_PROJECTOR,
    g: float = DEFAULT_G,
) -> SearchHamiltonian:
    """
    Marked-state search Hamiltonian with H_p = I - |m><m|.

    Args:
        n: Bit width
        m: Marked index
        initial_form: Projector form by default, or the transverse field
        g: Coupling strength for the transverse-field form

    Raises:
        RangeError: If m is not in [0, 2^n)
    """
    if not 0 <= m < (1 << n):
        raise RangeError(f"marked index {m} outside [0, {1 << n})")
    diag = np.ones(1 << n)
    diag[m] = 0.0
    h = SearchHamiltonian(DiagonalOperator(diag), g, HamiltonianKind.MSAS, initial_form, m)
    return h.check_invariants()


def _initial_action(h: SearchHamiltonian, psi: np.ndarray) -> np.ndarray:
    if h.initial_form is InitialForm.UNIFORM_PROJECTOR:
        return psi - psi.mean()
    # Flipping tensor axis a flips index bit n-1-a; all axes cover all bits.
    tensor = psi.reshape((2,) * h.n)
    acc = np.zeros_like(tensor)
    for axis in range(h.n):
        acc += np.flip(tensor, axis=axis)
    return h.g * acc.reshape(-1)


def apply(
    h: SearchHamiltonian, s: float, psi: Union[WaveState, np.ndarray]
) -> np.ndarray:
    """
    Compute H(s) psi = (1 - s) H_i psi + s H_p psi without building a matrix.

    Cost is O(n 2^n) per call.

    Args:
        h: Search Hamiltonian
        s: Interpolation parameter in [0, 1]
        psi: State vector of length 2^n

    Returns:
        New vector of the same dtype as psi

    Raises:
        RangeError: On a dimension mismatch or s outside [0, 1]
    """
    if isinstance(psi, WaveState):
        psi = psi.amplitudes
    psi = np.asarray(psi)
    if psi.shape != (h.dimension,):
        raise RangeError(f"state shape {psi.shape} does not match dimension {h.dimension}")
    if not 0.0 <= s <= 1.0:
        raise RangeError(f"s={s} outside [0, 1]")
    out = s * h.problem_diag.diag * psi
    if s < 1.0:
        out = out + (1.0 - s) * _initial_action(h, psi)
    return out


def initial_state(
    n: int, initial_form: InitialForm = InitialForm.TRANSVERSE_FIELD
) -> WaveState:
    """
    Ground state of H_i.

    The transverse field +g sum sigma_x has ground state amplitudes
    (-1)^{popcount(j)} / sqrt(N); the projector form has the uniform state.
    """
    if n < 1:
        raise RangeError(f"bit width n={n} must be at least 1")
    size = 1 << n
    if InitialForm(initial_form) is InitialForm.UNIFORM_PROJECTOR:
        return WaveState.uniform(n)
    signs = 1.0 - 2.0 * (popcount(np.arange(size), n) & 1)
    return WaveState(signs / np.sqrt(size))


def dense_matrix(h: SearchHamiltonian, s: float, max_bits: int = DENSE_LIMIT) -> np.ndarray:
    """Materialize H(s) as a dense real symmetric matrix (n <= max_bits)."""
    if h.n > max_bits:
        raise RangeError(f"refusing to build a dense matrix for n={h.n} > {max_bits}")
    size = h.dimension
    idx = np.arange(size)
    if h.initial_form is InitialForm.TRANSVERSE_FIELD:
        matrix = np.zeros((size, size))
        for j in range(h.n):
            matrix[idx, idx ^ (1 << j)] += h.g
    else:
        matrix = np.eye(size) - np.full((size, size), 1.0 / size)
    matrix *= 1.0 - s
    matrix[idx, idx] += s * h.problem_diag.diag
    return matrix


def as_linear_operator(h: SearchHamiltonian, s: float) -> LinearOperator:
    """Wrap apply(h, s, .) as a real symmetric scipy LinearOperator."""
    size = h.dimension
    return LinearOperator(
        (size, size),
        matvec=lambda v: apply(h, s, np.ravel(v)),
        rmatvec=lambda v: apply(h, s, np.ravel(v)),
        dtype=np.float64,
    )
