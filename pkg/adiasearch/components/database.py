"""
Unsorted database model: instances, targets and bit database operators.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..config import MAX_BITS
from ..utils.errors import DatabaseValidationError, DomainError, RangeError
from ..utils.io import PathLike, read_json, write_json
from .operators import DiagonalOperator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Database:
    """
    Index -> value table with n-bit binary values.

    Args:
        n: Index bit width; the table holds N = 2^n entries
        values: Value stored at each index, pairwise distinct and below 2^n

    Raises:
        DatabaseValidationError: If the length, range or distinctness invariant fails
    """

    n: int
    values: Tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or not 1 <= self.n <= MAX_BITS:
            raise DatabaseValidationError(
                f"bit width n={self.n} outside [1, {MAX_BITS}]"
            )
        values = tuple(int(v) for v in self.values)
        size = 1 << self.n
        if len(values) != size:
            raise DatabaseValidationError(
                f"expected {size} values for n={self.n}, got {len(values)}"
            )
        seen = {}
        for index, value in enumerate(values):
            if not 0 <= value < size:
                raise DatabaseValidationError(
                    f"value {value} at index {index} does not fit in {self.n} bits"
                )
            if value in seen:
                raise DatabaseValidationError(
                    f"duplicate value {value} at indices {seen[value]} and {index}"
                )
            seen[value] = index
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        return 1 << self.n

    def values_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.int64)

    def index_of(self, value: int) -> Optional[int]:
        """Return the index holding value, or None if it is absent."""
        try:
            return self.values.index(value)
        except ValueError:
            return None

    def is_permutation(self) -> bool:
        return sorted(self.values) == list(range(self.size))


@dataclass(frozen=True)
class SearchTarget:
    """Target value t of a search together with its bit width."""

    t: int
    n: int

    def __post_init__(self):
        if not 0 <= self.t < (1 << self.n):
            raise RangeError(f"target {self.t} does not fit in {self.n} bits")

    @classmethod
    def from_value(cls, t: int, n: int) -> "SearchTarget":
        return cls(int(t), int(n))

    def bit(self, j: int) -> int:
        """Return t_j, bit 0 being the least significant."""
        if not 0 <= j < self.n:
            raise RangeError(f"bit position {j} outside [0, {self.n})")
        return (self.t >> j) & 1

    @property
    def bits(self) -> List[int]:
        return [self.bit(j) for j in range(self.n)]


def _check_bits(n: int) -> None:
    if not 1 <= n <= MAX_BITS:
        raise RangeError(f"bit width n={n} outside [1, {MAX_BITS}]")


def derive_seed(seed_base: int, n: int, k: int) -> int:
    """
    Derive the seed of instance k at bit width n from an experiment seed.

    The result depends only on (seed_base, n, k), never on execution order.
    """
    sequence = np.random.SeedSequence([int(seed_base), int(n), int(k)])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def random_database(n: int, seed: int) -> Database:
    """
    Generate a database whose values are a uniform random permutation of 0..2^n-1.

    Args:
        n: Index bit width, 1 <= n <= 24
        seed: 64-bit seed; equal seeds give equal databases

    Returns:
        Database instance

    Raises:
        RangeError: If n is out of range
    """
    _check_bits(n)
    rng = np.random.default_rng(seed)
    return Database(n, tuple(int(v) for v in rng.permutation(1 << n)))


def random_target(n: int, seed: int) -> SearchTarget:
    """Draw a uniform target from a stream independent of the database stream."""
    _check_bits(n)
    rng = np.random.default_rng([int(seed), 1])
    return SearchTarget(int(rng.integers(1 << n)), n)


def bit_operator(db: Database, j: int) -> DiagonalOperator:
    """
    Build the bit database operator D_j = sum_i v_ij |i><i|.

    Args:
        db: Database
        j: Bit position, 0 being the least significant bit

    Returns:
        Binary diagonal whose entry i is the j-th bit of v_i

    Raises:
        RangeError: If j is not in [0, n)
    """
    if not 0 <= j < db.n:
        raise RangeError(f"bit position {j} outside [0, {db.n})")
    return DiagonalOperator(((db.values_array() >> j) & 1).astype(np.float64))


def database_operator(db: Database) -> DiagonalOperator:
    """Full-value database operator D = sum_i v_i |i><i|."""
    return DiagonalOperator(db.values_array().astype(np.float64))


def complement(op: DiagonalOperator) -> DiagonalOperator:
    """
    Return I - D for a binary diagonal operator D.

    Raises:
        DomainError: If any diagonal entry is not 0 or 1
    """
    if not op.is_binary():
        bad = int(np.flatnonzero((op.diag != 0.0) & (op.diag != 1.0))[0])
        raise DomainError(
            f"complement needs a binary diagonal; entry {bad} is {op.diag[bad]:g}"
        )
    return DiagonalOperator(1.0 - op.diag)


def reconstruct_values(operators: Sequence[DiagonalOperator]) -> np.ndarray:
    """Rebuild v_i = sum_j 2^j (D_j)_ii from the bit operators."""
    total = np.zeros(operators[0].dimension, dtype=np.int64)
    for j, op in enumerate(operators):
        total += op.diag.astype(np.int64) << j
    return total


def load_database(path: PathLike) -> Database:
    """
    Load a database from its JSON file, e.g. {"n": 3, "values": [6,3,5,0,4,1,7,2]}.

    Raises:
        InputError: If the file is missing or malformed
        DatabaseValidationError: If the contents violate a Database invariant
    """
    document = read_json(path)
    if not isinstance(document, dict) or "n" not in document or "values" not in document:
        raise DatabaseValidationError(f"{path}: expected an object with 'n' and 'values'")
    n, values = document["n"], document["values"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise DatabaseValidationError(f"{path}: 'n' must be an integer, got {n!r}")
    if not isinstance(values, list):
        raise DatabaseValidationError(f"{path}: 'values' must be a list")
    for index, value in enumerate(values):
        if not isinstance(value, int) or isinstance(value, bool):
            raise DatabaseValidationError(
                f"{path}: value at index {index} is not an integer: {value!r}"
            )
    try:
        db = Database(n, tuple(values))
    except DatabaseValidationError as e:
        raise DatabaseValidationError(f"{path}: {e}") from None
    logger.debug("loaded %d-bit database from %s", db.n, path)
    return db


def save_database(db: Database, path: PathLike) -> None:
    """Write a database in the JSON format read by load_database."""
    write_json({"n": db.n, "values": list(db.values)}, path)
