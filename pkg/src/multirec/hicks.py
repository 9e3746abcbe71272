"""Discrete multitime Samuelson-Hicks multiplier-accelerator model.

State ``x = (Y, C)``: national income and consumption. With constant
propensity ``gamma`` and accelerator ``alpha`` every axis uses

    A = [[gamma + alpha, -alpha / gamma],
         [gamma,          0            ]]

and ``x(t) = A^{|t|} x0``. Compatible variable coefficients depend on ``t``
only through ``|t|``: ``gamma(t) = f(|t|)``, ``alpha(t) = g(|t|)``, giving
the single-index recurrence ``z(k+1) = A(k) z(k)`` with ``x(t) = z(|t|)``.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import lattice as lt
from .engine import CoefficientSystem
from .errors import SingularMatrixError
from .floquet import floquet_multipliers

TOL_ROOT = 1e-10


@dataclass(frozen=True)
class HicksConstantParams:
    gamma: complex
    alpha: complex

    def __post_init__(self):
        object.__setattr__(self, "gamma", complex(self.gamma))
        object.__setattr__(self, "alpha", complex(self.alpha))
        if self.gamma == 0:
            raise ValueError("gamma (marginal propensity to consume) must be nonzero")
        if self.alpha == 0:
            raise ValueError("alpha (accelerator) must be nonzero")

    @property
    def regime(self) -> str | None:
        """'decelerator', 'keeper' or 'accelerator' for real positive alpha."""
        a = self.alpha
        if a.imag != 0 or a.real <= 0:
            return None
        if a.real < 1:
            return "decelerator"
        return "keeper" if a.real == 1 else "accelerator"


@dataclass(frozen=True)
class HicksPeriodicParams:
    """``f`` (propensity) and ``g`` (accelerator) sequences of period ``T``.

    Stores ``f(-1)`` and one period ``f(0..T-1)``, ``g(0..T-1)``; values for
    ``k >= 0`` wrap modulo ``T``. ``f(-1)`` is independent of ``f(T-1)``;
    use :meth:`periodic_extension` to tie them.
    """

    f_minus1: complex
    f: tuple[complex, ...]
    g: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "f_minus1", complex(self.f_minus1))
        object.__setattr__(self, "f", tuple(complex(v) for v in self.f))
        object.__setattr__(self, "g", tuple(complex(v) for v in self.g))
        if not self.f or len(self.f) != len(self.g):
            raise ValueError("f and g must hold one full period of equal length")
        if self.f_minus1 == 0 or any(v == 0 for v in self.f):
            raise ValueError("f must be nonzero everywhere")

    @classmethod
    def periodic_extension(cls, f: Sequence, g: Sequence):
        """Params with ``f(-1) = f(T-1)``, so ``A(k + T) = A(k)`` for all ``k >= 0``."""
        return cls(f[-1], tuple(f), tuple(g))

    @classmethod
    def from_constant(cls, gamma, alpha):
        return cls(gamma, (gamma,), (alpha,))

    @property
    def T(self) -> int:
        return len(self.f)

    def f_at(self, k: int) -> complex:
        if k == -1:
            return self.f_minus1
        if k < -1:
            raise ValueError("f is defined for k >= -1")
        return self.f[k % self.T]

    def g_at(self, k: int) -> complex:
        if k < 0:
            raise ValueError("g is defined for k >= 0")
        return self.g[k % self.T]

    @property
    def invertible(self) -> bool:
        return all(v != 0 for v in self.g)

    @property
    def hypothesis_violations(self) -> tuple[int, ...]:
        """Indices ``k`` in one period where ``f(k) + g(k)`` is 0 or 1.

        The model assumes these sums avoid 0 and 1. Nothing computed here
        depends on it, so violations are reported rather than rejected.
        """
        return tuple(k for k, (fk, gk) in enumerate(zip(self.f, self.g)) if fk + gk in (0, 1))


@dataclass(frozen=True)
class HicksState:
    Y: complex
    C: complex

    @property
    def nonnegative(self) -> bool:
        """Real and non-negative income and consumption (reported, never enforced)."""
        return all(abs(v.imag) <= 1e-12 * max(1.0, abs(v)) and v.real >= 0 for v in (self.Y, self.C))

    def as_vector(self) -> np.ndarray:
        return np.array([self.Y, self.C], dtype=complex)


def _state(v) -> HicksState:
    return HicksState(complex(v[0]), complex(v[1]))


def _matrix(gamma, alpha, gamma_prev) -> np.ndarray:
    if gamma_prev == 0:
        raise ValueError("propensity at the previous step must be nonzero")
    return np.array([[gamma + alpha, -alpha / gamma_prev], [gamma, 0]], dtype=complex)


def hicks_matrix_constant(p: HicksConstantParams) -> np.ndarray:
    return _matrix(p.gamma, p.alpha, p.gamma)


def characteristic_roots(A) -> tuple[complex, complex]:
    """Roots of ``r^2 - tr(A) r + det(A)``; for the Hicks matrix ``r^2 - (gamma+alpha) r + alpha``."""
    A = np.asarray(A, dtype=complex)
    tr = complex(A[0, 0] + A[1, 1])
    det = complex(A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0])
    s = cmath.sqrt(tr * tr - 4 * det)
    return (tr - s) / 2, (tr + s) / 2


def power_closed_form(A, k: int, tol_root: float = TOL_ROOT) -> np.ndarray:
    """``A^k`` for a 2x2 matrix from its characteristic roots ``r1, r2``.

    Distinct roots:
        A^k = (r2^k - r1^k)/(r2 - r1) A + (r2 r1^k - r1 r2^k)/(r2 - r1) I
    Double root r:
        A^k = k r^(k-1) A - (k-1) r^k I
    Roots closer than ``tol_root`` (relative) use the second form with
    their mean.
    """
    A = np.asarray(A, dtype=complex)
    if A.shape != (2, 2):
        raise ValueError("power_closed_form needs a 2x2 matrix")
    if k < 0:
        raise ValueError("k must be non-negative")
    I = np.eye(2, dtype=complex)
    r1, r2 = characteristic_roots(A)
    if abs(r1 - r2) <= tol_root * max(1.0, abs(r1), abs(r2)):
        r = (r1 + r2) / 2
        if k == 0:
            return I
        return k * r ** (k - 1) * A - (k - 1) * r ** k * I
    d = r2 - r1
    return (r2 ** k - r1 ** k) / d * A + (r2 * r1 ** k - r1 * r2 ** k) / d * I


def hicks_solve_constant(p: HicksConstantParams, Y0, C0, t: Sequence[int]) -> HicksState:
    if any(x < 0 for x in t):
        raise ValueError("the model is posed for t >= 0")
    A = hicks_matrix_constant(p)
    return _state(power_closed_form(A, lt.total(t)) @ np.array([Y0, C0], dtype=complex))


def hicks_A(p: HicksPeriodicParams, k: int) -> np.ndarray:
    """``A(k) = [[f(k)+g(k), -g(k)/f(k-1)], [f(k), 0]]``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    return _matrix(p.f_at(k), p.g_at(k), p.f_at(k - 1))


def hicks_system(p: HicksPeriodicParams, m: int) -> CoefficientSystem:
    """Multitime system ``A_b(t) = A(|t|)`` on every axis, based at the origin."""
    if m < 1:
        raise ValueError("m must be >= 1")
    # A(k) for k >= 1 depends only on (k-1) mod T; A(0) may differ through f(-1)
    cache = [lt.as_matrix(hicks_A(p, k)) for k in range(p.T + 1)]

    def evaluate(alpha, t):
        k = lt.total(t)
        return cache[0] if k == 0 else cache[1 + (k - 1) % p.T]

    return CoefficientSystem.from_function(evaluate, m, 2, (0,) * m, periods=(p.T,) * m,
                                           kind="hicks", source=p)


def hicks_Cp(p: HicksPeriodicParams, cp: int, k: int) -> np.ndarray:
    """``C_p(k) = A(k+p-1) ... A(k+1) A(k)``, the identity for ``p = 0``."""
    if cp < 0 or k < 0:
        raise ValueError("p and k must be non-negative")
    out = np.eye(2, dtype=complex)
    for j in range(cp):
        out = hicks_A(p, k + j) @ out
    return out


def hicks_solve(p: HicksPeriodicParams, x0, t: Sequence[int]) -> HicksState:
    """``x(t) = C_{|t|}(0) x0``."""
    if any(x < 0 for x in t):
        raise ValueError("the model is posed for t >= 0")
    return _state(hicks_Cp(p, lt.total(t), 0) @ np.asarray(x0, dtype=complex))


def hicks_monodromy(p: HicksPeriodicParams) -> np.ndarray:
    """``C_T(0) = A(T-1) ... A(0)``."""
    if not p.invertible:
        raise SingularMatrixError("g vanishes somewhere, so some A(k) is singular")
    return hicks_Cp(p, p.T, 0)


@dataclass(frozen=True)
class HicksMultipliers:
    lambda1: complex
    lambda2: complex
    trace: complex
    det_direct: complex
    det_identity: complex
    det_identity_residual: float


def determinant_identity(p: HicksPeriodicParams) -> complex:
    """``det C_T(0) = f(T-1)/f(-1) * prod_{j<T} g(j)``."""
    return p.f_at(p.T - 1) / p.f_minus1 * complex(np.prod(np.array(p.g)))


def hicks_multipliers(p: HicksPeriodicParams) -> HicksMultipliers:
    C = hicks_monodromy(p)
    lam1, lam2 = floquet_multipliers(C)
    direct = lt.determinant(C)
    closed = determinant_identity(p)
    residual = abs(direct - closed) / max(abs(closed), 1e-300)
    return HicksMultipliers(lam1, lam2, complex(np.trace(C)), direct, closed, residual)


def hicks_trajectory(p, x0, extent: Sequence[int]) -> list[tuple[tuple[int, ...], HicksState]]:
    """States over ``0 <= t <= extent`` in lexicographic order, for either parameter kind."""
    m = len(extent)
    x0 = np.asarray(x0, dtype=complex)
    if isinstance(p, HicksConstantParams):
        A = hicks_matrix_constant(p)
        powers = {}
        rows = []
        for t in lt.box((0,) * m, extent):
            k = lt.total(t)
            if k not in powers:
                powers[k] = power_closed_form(A, k) @ x0
            rows.append((t, _state(powers[k])))
        return rows
    states = [x0]
    for t in lt.box((0,) * m, extent):
        while len(states) <= lt.total(t):
            states.append(hicks_A(p, len(states) - 1) @ states[-1])
    return [(t, _state(states[lt.total(t)])) for t in lt.box((0,) * m, extent)]
