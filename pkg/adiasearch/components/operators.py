"""
Value types shared by the database, Hamiltonian and evolution components.
"""
from dataclasses import dataclass

import numpy as np

from ..utils.errors import DomainError, RangeError


def _is_power_of_two(size: int) -> bool:
    return size > 0 and size & (size - 1) == 0


@dataclass(frozen=True, eq=False)
class DiagonalOperator:
    """
    Real diagonal of a 2^n x 2^n operator, stored as a length-2^n vector.

    Holds database operators, bit database operators and problem Hamiltonians.
    """

    diag: np.ndarray

    def __post_init__(self):
        diag = np.array(self.diag, dtype=np.float64)
        if diag.ndim != 1 or not _is_power_of_two(diag.size):
            raise RangeError(f"diagonal length {diag.size} is not a power of two")
        if not np.all(np.isfinite(diag)):
            raise DomainError("diagonal entries must be finite")
        diag.setflags(write=False)
        object.__setattr__(self, "diag", diag)

    @property
    def dimension(self) -> int:
        return int(self.diag.size)

    @property
    def n(self) -> int:
        return self.dimension.bit_length() - 1

    def is_binary(self) -> bool:
        return bool(np.all((self.diag == 0.0) | (self.diag == 1.0)))

    def __add__(self, other: "DiagonalOperator") -> "DiagonalOperator":
        return DiagonalOperator(self.diag + other.diag)

    def __mul__(self, scalar: float) -> "DiagonalOperator":
        return DiagonalOperator(self.diag * scalar)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiagonalOperator):
            return NotImplemented
        return bool(np.array_equal(self.diag, other.diag))

    def __hash__(self) -> int:
        return hash(self.diag.tobytes())

    def __repr__(self) -> str:
        entries = ",".join(f"{x:g}" for x in self.diag[:16])
        suffix = ",..." if self.dimension > 16 else ""
        return f"diag{{{entries}{suffix}}}"


@dataclass(frozen=True, eq=False)
class WaveState:
    """Complex amplitude vector of length 2^n."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=np.complex128)
        if amplitudes.ndim != 1 or not _is_power_of_two(amplitudes.size):
            raise RangeError(f"state length {amplitudes.size} is not a power of two")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def basis(cls, n: int, index: int) -> "WaveState":
        amplitudes = np.zeros(1 << n, dtype=np.complex128)
        amplitudes[index] = 1.0
        return cls(amplitudes)

    @classmethod
    def uniform(cls, n: int) -> "WaveState":
        size = 1 << n
        return cls(np.full(size, 1.0 / np.sqrt(size), dtype=np.complex128))

    @property
    def dimension(self) -> int:
        return int(self.amplitudes.size)

    @property
    def n(self) -> int:
        return self.dimension.bit_length() - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2
