"""Lattice points of Z^m and dense complex matrix primitives.

Lattice points are plain tuples of ints. Matrices are ``complex128`` numpy
arrays; functions here never mutate their arguments.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ConvergenceError, SingularMatrixError

MultiIndex = tuple[int, ...]

#: Largest matrix dimension accepted by :func:`eigendecompose`.
MAX_DIM = 8
TOL_EIG = 1e-8
# Hadamard bounds |det V| <= 1 for unit columns, so this is a conditioning floor.
_EIGVEC_DET_FLOOR = 1e-8


def as_index(coords: Iterable[int]) -> MultiIndex:
    t = tuple(int(c) for c in coords)
    if len(t) < 1:
        raise ValueError("a multi-index needs at least one coordinate")
    return t


def _check_same_dim(s: Sequence[int], t: Sequence[int]) -> None:
    if len(s) != len(t):
        raise ValueError(f"dimension mismatch: {len(s)} != {len(t)}")


def leq(s: Sequence[int], t: Sequence[int]) -> bool:
    """Componentwise (partial) order on Z^m."""
    _check_same_dim(s, t)
    return all(a <= b for a, b in zip(s, t))


def unit(alpha: int, m: int) -> MultiIndex:
    """The unit step along axis ``alpha`` (1-based) in Z^m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if not 1 <= alpha <= m:
        raise ValueError(f"axis {alpha} out of range 1..{m}")
    return tuple(1 if b == alpha else 0 for b in range(1, m + 1))


def total(t: Sequence[int]) -> int:
    """Sum of coordinates, written |t|."""
    return int(sum(t))


def add(s: Sequence[int], t: Sequence[int]) -> MultiIndex:
    _check_same_dim(s, t)
    return tuple(a + b for a, b in zip(s, t))


def sub(s: Sequence[int], t: Sequence[int]) -> MultiIndex:
    _check_same_dim(s, t)
    return tuple(a - b for a, b in zip(s, t))


def step(t: Sequence[int], alpha: int, k: int = 1) -> MultiIndex:
    """``t + k * 1_alpha``."""
    out = list(t)
    out[alpha - 1] += k
    return tuple(out)


def box(origin: Sequence[int], extent: Sequence[int]) -> Iterator[MultiIndex]:
    """Points ``origin <= t <= origin + extent`` in lexicographic order."""
    _check_same_dim(origin, extent)
    if any(e < 0 for e in extent):
        raise ValueError("box extents must be non-negative")
    ranges = [range(o, o + e + 1) for o, e in zip(origin, extent)]
    return itertools.product(*ranges)


@dataclass(frozen=True)
class PeriodVector:
    """Per-axis periods ``(T_1, ..., T_m)``; a zero entry imposes no period."""

    periods: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "periods", tuple(int(p) for p in self.periods))
        if not self.periods:
            raise ValueError("empty period vector")
        if any(p < 0 for p in self.periods):
            raise ValueError("periods must be non-negative")
        if not any(self.periods):
            raise ValueError("at least one period must be positive")

    @property
    def m(self) -> int:
        return len(self.periods)

    @property
    def periodic_axes(self) -> tuple[int, ...]:
        """Axes (1-based) with ``T_alpha >= 1``."""
        return tuple(a for a, p in enumerate(self.periods, 1) if p >= 1)

    @property
    def free_axes(self) -> tuple[int, ...]:
        """Axes (1-based) with ``T_alpha == 0``."""
        return tuple(a for a, p in enumerate(self.periods, 1) if p == 0)

    @property
    def depths(self) -> tuple[int, ...]:
        """Extent of the fundamental domain along each axis."""
        return tuple(max(p, 1) for p in self.periods)

    def __getitem__(self, alpha: int) -> int:
        """Period along axis ``alpha`` (1-based)."""
        if not 1 <= alpha <= self.m:
            raise IndexError(f"axis {alpha} outside 1..{self.m}")
        return self.periods[alpha - 1]

    def __iter__(self):
        return iter(self.periods)

    def __len__(self) -> int:
        return self.m


# -- matrices ---------------------------------------------------------------

def as_matrix(data, n: int | None = None) -> np.ndarray:
    """Validated square complex copy of ``data``, marked read-only."""
    M = np.array(data, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {M.shape}")
    if n is not None and M.shape[0] != n:
        raise ValueError(f"expected a {n}x{n} matrix, got {M.shape[0]}x{M.shape[0]}")
    M.setflags(write=False)
    return M


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex)


def max_abs(M) -> float:
    return float(np.max(np.abs(M))) if np.size(M) else 0.0


def det_tolerance(M: np.ndarray) -> float:
    n = M.shape[0]
    return 1e-12 * max(1.0, max_abs(M)) ** n


def determinant(M: np.ndarray) -> complex:
    return complex(np.linalg.det(M))


def is_invertible(M: np.ndarray) -> bool:
    return abs(determinant(M)) > det_tolerance(M)


def inverse(M: np.ndarray) -> np.ndarray:
    if not is_invertible(M):
        raise SingularMatrixError(f"matrix is singular (|det| = {abs(determinant(M)):.3g})")
    return np.linalg.inv(M)


def multiply(*factors: np.ndarray) -> np.ndarray:
    """Ordered product, leftmost factor first."""
    if not factors:
        raise ValueError("nothing to multiply")
    out = np.asarray(factors[0], dtype=complex)
    for F in factors[1:]:
        out = out @ F
    return out


def power(M: np.ndarray, k: int) -> np.ndarray:
    """Integer power by repeated squaring; negative ``k`` inverts first."""
    M = np.asarray(M, dtype=complex)
    k = int(k)
    if k < 0:
        M, k = inverse(M), -k
    result = identity(M.shape[0])
    base = M
    while k:
        if k & 1:
            result = result @ base
        k >>= 1
        if k:
            base = base @ base
    return result


def hermitian_transpose(M: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(M)).T


def is_hermitian(M: np.ndarray, tol: float = 1e-12) -> bool:
    return max_abs(M - hermitian_transpose(M)) <= tol


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B - B @ A


@dataclass(frozen=True)
class Eigendecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    is_diagonalizable: bool
    residual: float


def eigendecompose(M: np.ndarray) -> Eigendecomposition:
    """Dense eigendecomposition with a defectiveness flag.

    The matrix is declared defective when the unit-column eigenvector matrix
    fails the determinant floor, i.e. its columns are numerically dependent.
    """
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    if n > MAX_DIM:
        raise ValueError(f"eigendecompose supports n <= {MAX_DIM}, got {n}")
    try:
        w, V = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolver did not converge: {exc}") from exc
    scale = max(1.0, max_abs(M))
    residual = max_abs(M @ V - V * w) / scale
    if residual > TOL_EIG:
        raise ConvergenceError(f"eigen residual {residual:.3g} exceeds {TOL_EIG}")
    diagonalizable = abs(np.linalg.det(V)) > _EIGVEC_DET_FLOOR
    return Eigendecomposition(w, V, bool(diagonalizable), residual)
