"""Monodromy matrices, commuting matrix roots and Floquet factorizations.

Two settings are covered:

* multi-periodic coefficients, ``A_a(t + T_b 1_b) = A_a(t)`` for every pair
  of axes, factorized as ``Phi(t) = P(t) B_1^{t^1} ... B_m^{t^m}``;
* a single vector period, ``A_a(t + T) = A_a(t)``, factorized as
  ``Phi(t) = P(t) B^{|t|}``.

Here ``Phi(t) = chi(t, t0)``. Exponents use the absolute coordinates of
``t``, so ``P(t0)`` is generally not the identity when ``t0 != 0``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from . import lattice as lt
from .engine import (TOL_COMPAT, CoefficientSystem, c_product, scaled_tol,
                     transition, transition_table)
from .errors import (ConvergenceError, DomainError, FloquetVerificationError,
                     IncompatibleSystemError, NonCommutingError,
                     PeriodicityError, RootExtractionUnsupported,
                     SingularMatrixError)
from .lattice import MultiIndex, PeriodVector

TOL_FLOQUET = 1e-8
RETRY_CAP = 16
_BRANCH_SNAP = 1e-14
# eigenvalue split, relative to the traceless part, below which a 2x2 counts as defective
_DEFECT_SPLIT = 1e-6


# -- monodromy --------------------------------------------------------------

@dataclass(frozen=True)
class MonodromySet:
    """Monodromy data at ``t0``.

    ``matrices`` maps each periodic axis to ``C_{a,T_a}(t0)`` in the
    multi-periodic case; in the single-period case it holds one entry under
    key 0, ``chi(t0 + T, t0)``.
    """

    t0: MultiIndex
    periods: tuple[int, ...]
    kind: str
    matrices: Mapping[int, np.ndarray]
    commutation_residual: float = 0.0

    @property
    def single(self) -> np.ndarray:
        if self.kind != "periodic":
            raise AttributeError("only single-period monodromy sets hold one matrix")
        return self.matrices[0]


def _periodicity_box(periods: Sequence[int]) -> MultiIndex:
    return tuple(max(p, 1) - 1 for p in periods)


def check_multi_periodicity(sys: CoefficientSystem, periods: PeriodVector,
                            tol: float = TOL_COMPAT) -> float:
    """Max deviation of ``A_a(t + T_b 1_b)`` from ``A_a(t)`` over one period."""
    worst = 0.0
    for t in lt.box(sys.t0, _periodicity_box(periods.periods)):
        for a in range(1, sys.m + 1):
            A = sys.coefficient(a, t)
            for b in periods.periodic_axes:
                shifted = sys.coefficient(a, lt.step(t, b, periods[b]))
                r = lt.max_abs(shifted - A)
                if r > scaled_tol(tol, A):
                    raise PeriodicityError(
                        f"A_{a} is not periodic with period {periods[b]} along axis {b} at t={t}")
                worst = max(worst, r)
    return worst


def _require_invertible(sys: CoefficientSystem, extent: Sequence[int]) -> None:
    for t in lt.box(sys.t0, extent):
        for a in range(1, sys.m + 1):
            if not lt.is_invertible(sys.coefficient(a, t)):
                raise SingularMatrixError(f"coefficient A_{a}({t}) is singular")


def monodromy_multi(sys: CoefficientSystem, periods=None, tol: float = TOL_COMPAT) -> MonodromySet:
    """Per-axis monodromies ``C_{a,T_a}(t0)`` of a multi-periodic system."""
    periods = _period_vector(sys, periods)
    if periods.m != sys.m:
        raise ValueError("period vector dimension does not match the system")
    check_multi_periodicity(sys, periods, tol)
    _require_invertible(sys, _periodicity_box(periods.periods))
    mats = {a: c_product(sys, a, periods[a], sys.t0) for a in periods.periodic_axes}
    worst = 0.0
    axes = list(mats)
    for i, a in enumerate(axes):
        for b in axes[i + 1:]:
            r = lt.max_abs(lt.commutator(mats[a], mats[b]))
            worst = max(worst, r)
            if r > scaled_tol(tol, mats[a], mats[b]):
                raise NonCommutingError(
                    f"monodromies along axes {a} and {b} do not commute (residual {r:.3g}); "
                    "check the period vector")
    return MonodromySet(sys.t0, periods.periods, "multi", mats, worst)


def _period_vector(sys, periods) -> PeriodVector:
    if periods is None:
        if sys.periods is None:
            raise ValueError("system carries no period vector; pass one explicitly")
        return sys.periods
    return periods if isinstance(periods, PeriodVector) else PeriodVector(tuple(periods))


def monodromy_periodic(sys: CoefficientSystem, period: Sequence[int], tol: float = TOL_COMPAT) -> MonodromySet:
    """``C(t0) = chi(t0 + T, t0)`` for a system periodic under the shift ``T``.

    Built as the ordered product of ``C_{a,T^a}`` at staggered base points
    and cross-checked against stepping the axes in the opposite order.
    """
    T = lt.as_index(period)
    if len(T) != sys.m:
        raise ValueError("period dimension does not match the system")
    if any(p < 0 for p in T) or not any(T):
        raise ValueError("period must be non-negative and nonzero")
    extent = tuple(max(p, 1) for p in T)
    for t in lt.box(sys.t0, extent):
        shifted = lt.add(t, T)
        for a in range(1, sys.m + 1):
            A = sys.coefficient(a, t)
            if lt.max_abs(sys.coefficient(a, shifted) - A) > scaled_tol(tol, A):
                raise PeriodicityError(f"A_{a} is not periodic under shift {T} at t={t}")
    _require_invertible(sys, extent)

    s = sys.t0
    factors = []
    for a in range(1, sys.m + 1):
        base = s[:a] + tuple(x + p for x, p in zip(s[a:], T[a:]))
        factors.append(c_product(sys, a, T[a - 1], base))
    C = lt.multiply(*factors)

    other = lt.identity(sys.n)
    point = list(s)
    for a in range(1, sys.m + 1):
        other = c_product(sys, a, T[a - 1], point) @ other
        point[a - 1] += T[a - 1]
    if lt.max_abs(C - other) > scaled_tol(tol, C, other):
        raise IncompatibleSystemError("monodromy depends on the stepping order; system is not compatible")
    return MonodromySet(sys.t0, T, "periodic", {0: C})


# -- roots ------------------------------------------------------------------

def principal_root(z: complex, k: int) -> complex:
    """Principal ``k``-th root: argument of ``z`` taken in (-pi, pi]."""
    if k < 1:
        raise ValueError("root order must be positive")
    z = complex(z)
    if z == 0:
        return 0j
    theta = math.atan2(z.imag, z.real)
    # tiny negative imaginary parts from roundoff must not flip the branch
    if z.real < 0 and abs(z.imag) <= _BRANCH_SNAP * abs(z):
        theta = math.pi
    return abs(z) ** (1.0 / k) * cmath.exp(1j * theta / k)


def _check_roots(Ps, ks, Qs, tol) -> None:
    for P, k, Q in zip(Ps, ks, Qs):
        r = lt.max_abs(lt.power(Q, k) - P)
        if r > scaled_tol(tol, P):
            raise ConvergenceError(f"root check failed: residual {r:.3g}")
    for i in range(len(Qs)):
        for j in range(i + 1, len(Qs)):
            r = lt.max_abs(lt.commutator(Qs[i], Qs[j]))
            if r > scaled_tol(tol, Qs[i], Qs[j]):
                raise ConvergenceError(f"roots do not commute: residual {r:.3g}")


def _is_defective_2x2(P: np.ndarray) -> bool:
    """Non-scalar ``P`` whose traceless part ``S`` is nilpotent (``S^2 = -det(S) I``).

    Eigenvector conditioning is unreliable here: roundoff splits a double
    eigenvalue by about sqrt(eps), which is why this test works on ``S``.
    """
    S = P - (np.trace(P) / 2) * lt.identity(2)
    size = lt.max_abs(S)
    if size <= 1e-12 * max(1.0, lt.max_abs(P)):
        return False
    return abs(lt.determinant(S)) ** 0.5 <= _DEFECT_SPLIT * size


def _roots_2x2(Ps, ks) -> list[np.ndarray]:
    """Roots of the form ``u I + v S`` around the nilpotent part ``S`` of a defective pivot."""
    pivot = next(P for P in Ps if _is_defective_2x2(P))
    I2 = lt.identity(2)
    S = pivot - (np.trace(pivot) / 2) * I2
    norm = np.vdot(S, S).real
    Qs = []
    for P, k in zip(Ps, ks):
        c = np.trace(P) / 2
        R = P - c * I2
        w = np.vdot(S, R) / norm
        if lt.max_abs(R - w * S) > scaled_tol(TOL_COMPAT, P):
            raise NonCommutingError("matrix is not a polynomial in the defective pivot")
        u = principal_root(c, k)
        v = w / (k * u ** (k - 1))
        Qs.append(u * I2 + v * S)
    return Qs


def root_2x2_jordan(P, k: int) -> np.ndarray:
    """``k``-th root of a defective invertible 2x2 matrix ``P = lam I + S``.

    Returns ``u I + v S`` with ``u`` the principal root of ``lam`` and
    ``v = 1 / (k u^(k-1))``; this works because ``S^2 = 0``.
    """
    P = lt.as_matrix(P)
    if P.shape != (2, 2):
        raise ValueError("root_2x2_jordan needs a 2x2 matrix")
    if not lt.is_invertible(P):
        raise SingularMatrixError("matrix is singular")
    if not _is_defective_2x2(P):
        raise ValueError("matrix is diagonalizable; use commuting_roots")
    (Q,) = _roots_2x2([P], [k])
    _check_roots([P], [k], [Q], TOL_FLOQUET)
    return Q


def _joint_eigenbasis(M: np.ndarray) -> np.ndarray | None:
    """Eigenvector matrix of ``M``, with clustered eigenvalues resolved by SVD."""
    w, V = np.linalg.eig(M)
    n = M.shape[0]
    scale = max(1.0, float(np.max(np.abs(w))))
    cluster_tol = 1e-6 * scale
    V = V.copy()
    done = np.zeros(n, dtype=bool)
    for i in range(n):
        if done[i]:
            continue
        members = np.flatnonzero(np.abs(w - w[i]) <= cluster_tol)
        done[members] = True
        if len(members) > 1:
            center = w[members].mean()
            _, _, Vh = np.linalg.svd(M - center * np.eye(n))
            V[:, members] = Vh[-len(members):].conj().T
    V = V / np.linalg.norm(V, axis=0)
    if abs(np.linalg.det(V)) <= 1e-8:
        return None
    return V


def _roots_diagonalizable(Ps, ks, seed: int, retry_cap: int, tol: float) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    n = Ps[0].shape[0]
    scales = [max(1.0, lt.max_abs(P)) for P in Ps]
    last_error = None
    for _ in range(retry_cap):
        c = rng.normal(size=len(Ps)) + 1j * rng.normal(size=len(Ps))
        M = sum(ci * P / s for ci, P, s in zip(c, Ps, scales))
        V = _joint_eigenbasis(np.asarray(M, dtype=complex))
        if V is None:
            last_error = "combination has a defective eigenbasis"
            continue
        Vinv = np.linalg.inv(V)
        Qs = []
        for P, k in zip(Ps, ks):
            D = Vinv @ P @ V
            theta = np.array([principal_root(d, k) for d in np.diag(D)])
            Qs.append((V * theta) @ Vinv)
        try:
            _check_roots(Ps, ks, Qs, tol)
        except ConvergenceError as exc:
            last_error = str(exc)
            continue
        return Qs
    raise ConvergenceError(f"no common eigenbasis found after {retry_cap} attempts ({last_error})")


def commuting_roots(Ps: Sequence, ks: Sequence[int], seed: int = 0, retry_cap: int = RETRY_CAP,
                    tol: float = TOL_FLOQUET) -> list[np.ndarray]:
    """Pairwise commuting ``Q_a`` with ``Q_a^{k_a} = P_a``.

    Supported when every ``P_a`` is diagonalizable (principal roots in a
    common eigenbasis found from a seeded random combination of the family)
    or when ``n = 2`` (roots built around the nilpotent part of a defective
    member). Other defective families raise ``RootExtractionUnsupported``.
    """
    Ps = [lt.as_matrix(P) for P in Ps]
    ks = [int(k) for k in ks]
    if not Ps or len(Ps) != len(ks):
        raise ValueError("need one root order per matrix")
    if any(k < 1 for k in ks):
        raise ValueError("root orders must be positive")
    n = Ps[0].shape[0]
    if any(P.shape != (n, n) for P in Ps):
        raise ValueError("matrices must share a size")
    for i, P in enumerate(Ps):
        if not lt.is_invertible(P):
            raise SingularMatrixError(f"matrix {i + 1} is singular")
        for j in range(i + 1, len(Ps)):
            if lt.max_abs(lt.commutator(P, Ps[j])) > scaled_tol(TOL_COMPAT, P, Ps[j]):
                raise NonCommutingError(f"matrices {i + 1} and {j + 1} do not commute")
    if n == 2 and any(_is_defective_2x2(P) for P in Ps):
        Qs = _roots_2x2(Ps, ks)
        _check_roots(Ps, ks, Qs, tol)
        return Qs
    if n == 2 or all(lt.eigendecompose(P).is_diagonalizable for P in Ps):
        return _roots_diagonalizable(Ps, ks, seed, retry_cap, tol)
    raise RootExtractionUnsupported(
        f"commuting roots of a defective commuting family with n={n} are not supported: "
        "their existence is only conjectured for n >= 3")


def floquet_multipliers(M) -> list[complex]:
    """Eigenvalues of a monodromy matrix.

    For 2x2 input these are the roots of ``lam^2 - tr(M) lam + det(M)``,
    returned as ``[(tr + s)/2, (tr - s)/2]`` with ``s`` the principal square
    root of the discriminant.
    """
    M = lt.as_matrix(M)
    if not lt.is_invertible(M):
        raise SingularMatrixError("monodromy matrix is singular")
    if M.shape[0] == 2:
        tr = complex(np.trace(M))
        det = lt.determinant(M)
        s = cmath.sqrt(tr * tr - 4 * det)
        plus, minus = tr + s, tr - s
        # recover the smaller root from the product to avoid cancellation
        if abs(plus) >= abs(minus):
            lam1 = plus / 2
            lam2 = det / lam1
        else:
            lam2 = minus / 2
            lam1 = det / lam2
        return [lam1, lam2]
    return [complex(x) for x in lt.eigendecompose(M).eigenvalues]


# -- decompositions ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FloquetDecomposition:
    """``Phi(t) = P(t) B_1^{t^1} ... B_m^{t^m}`` with periodic ``P``.

    ``mode`` is ``"multi"`` (period ``T_a`` along each axis) or
    ``"periodic"`` (single shift vector ``T``, all ``B_a`` equal).
    ``P_table`` holds ``P`` at reduced offsets from ``t0``. Along axes with
    ``T_a = 0`` the multi-periodic ``P`` carries no period, so values off the
    table are recomputed from the system.
    """

    t0: MultiIndex
    periods: tuple[int, ...]
    mode: str
    B: tuple[np.ndarray, ...]
    P_table: Mapping[MultiIndex, np.ndarray]
    monodromy: MonodromySet
    system: CoefficientSystem = field(repr=False)
    residuals: Mapping[str, float] = field(default_factory=dict)

    @property
    def m(self) -> int:
        return len(self.t0)

    def exponential(self, t: Sequence[int], sign: int = 1) -> np.ndarray:
        """``B_1^{sign t^1} ... B_m^{sign t^m}``."""
        out = lt.identity(self.system.n)
        for B, x in zip(self.B, t):
            out = out @ lt.power(B, sign * x)
        return out

    def reduce_offset(self, t: Sequence[int]) -> MultiIndex:
        offset = lt.sub(t, self.t0)
        if any(o < 0 for o in offset):
            raise DomainError(f"point {tuple(t)} is below the base point {self.t0}")
        if self.mode == "multi":
            return tuple(o % p if p else o for o, p in zip(offset, self.periods))
        shifts = min(o // p for o, p in zip(offset, self.periods) if p)
        return tuple(o - shifts * p for o, p in zip(offset, self.periods))

    def direct_P(self, t: Sequence[int]) -> np.ndarray:
        """``Phi(t) B^{-t}`` computed from the system."""
        return transition(self.system, t, self.t0) @ self.exponential(t, -1)

    def P(self, t: Sequence[int]) -> np.ndarray:
        offset = self.reduce_offset(t)
        if offset in self.P_table:
            return self.P_table[offset]
        return self.direct_P(lt.add(self.t0, offset))

    def multipliers(self) -> dict[int, list[complex]]:
        return {a: floquet_multipliers(C) for a, C in self.monodromy.matrices.items()}


def default_verification_box(periods: Sequence[int]) -> MultiIndex:
    """Two periods per axis."""
    return tuple(2 * max(p, 1) for p in periods)


def verify_decomposition(dec: FloquetDecomposition, box: Sequence[int] | None = None,
                         tol: float = TOL_FLOQUET) -> dict[str, float]:
    """Check every factorization invariant; raise on failure, else return residuals."""
    box = default_verification_box(dec.periods) if box is None else lt.as_index(box)
    n = dec.system.n
    res = {"commutation": 0.0, "root": 0.0, "periodicity": 0.0, "factorization": 0.0}
    failures = []

    def record(name, value, *mats):
        res[name] = max(res[name], value)
        if value > scaled_tol(tol, *mats):
            failures.append(f"{name} residual {value:.3g}")

    for i, Bi in enumerate(dec.B):
        for Bj in dec.B[i + 1:]:
            record("commutation", lt.max_abs(lt.commutator(Bi, Bj)), Bi, Bj)
    if dec.mode == "multi":
        for a, T in enumerate(dec.periods, 1):
            if T:
                C = dec.monodromy.matrices[a]
                record("root", lt.max_abs(lt.power(dec.B[a - 1], T) - C), C)
            else:
                record("root", lt.max_abs(dec.B[a - 1] - lt.identity(n)))
    else:
        C = dec.monodromy.single
        record("root", lt.max_abs(lt.power(dec.B[0], lt.total(dec.periods)) - C), C)

    Phi = transition_table(dec.system, box)
    if dec.mode == "multi":
        shifts = [lt.step((0,) * dec.m, a, T) for a, T in enumerate(dec.periods, 1) if T]
    else:
        shifts = [dec.periods]
    # P(t + d) = P(t) is checked as Phi(t + d) = Phi(t) B^d, which avoids the
    # cancellation in forming Phi(t) B^-t when the multipliers spread widely
    shift_factors = [(d, dec.exponential(d)) for d in shifts]
    for t, F in Phi.items():
        stored = dec.P(t)
        if not lt.is_invertible(stored):
            failures.append(f"P{t} is singular")
        record("factorization", lt.max_abs(stored @ dec.exponential(t) - F), F)
        for d, E in shift_factors:
            u = lt.add(t, d)
            if u in Phi:
                record("periodicity", lt.max_abs(F @ E - Phi[u]), Phi[u])
    if failures:
        raise FloquetVerificationError("decomposition failed verification: " + "; ".join(failures))
    return res


def _fundamental_P_table(sys, dec_B, extent) -> dict[MultiIndex, np.ndarray]:
    table = {}
    for t, F in transition_table(sys, extent).items():
        E = lt.identity(sys.n)
        for B, x in zip(dec_B, t):
            E = E @ lt.power(B, -x)
        P = F @ E
        P.setflags(write=False)
        table[lt.sub(t, sys.t0)] = P
    return table


def decompose_multi(sys: CoefficientSystem, periods=None, seed: int = 0,
                    box: Sequence[int] | None = None, tol: float = TOL_FLOQUET) -> FloquetDecomposition:
    """Floquet factorization of a multi-periodic compatible system.

    ``B_a`` is a commuting ``T_a``-th root of the axis monodromy for
    ``T_a >= 1`` and the identity otherwise; ``P(t) = Phi(t) prod B_a^{-t^a}``.
    """
    periods = _period_vector(sys, periods)
    mono = monodromy_multi(sys, periods)
    axes = periods.periodic_axes
    roots = commuting_roots([mono.matrices[a] for a in axes], [periods[a] for a in axes], seed=seed)
    B = [lt.identity(sys.n)] * sys.m
    for a, Q in zip(axes, roots):
        B[a - 1] = Q
    B = tuple(lt.as_matrix(b) for b in B)
    table = _fundamental_P_table(sys, B, _periodicity_box(periods.periods))
    dec = FloquetDecomposition(sys.t0, periods.periods, "multi", B, table, mono, sys)
    return replace(dec, residuals=verify_decomposition(dec, box, tol))


def decompose_periodic(sys: CoefficientSystem, period: Sequence[int], seed: int = 0,
                       box: Sequence[int] | None = None, tol: float = TOL_FLOQUET) -> FloquetDecomposition:
    """Factorization ``Phi(t) = P(t) B^{|t|}`` with ``B^{|T|} = C(t0)`` and ``P(t + T) = P(t)``."""
    mono = monodromy_periodic(sys, period)
    T = mono.periods
    (root,) = commuting_roots([mono.single], [lt.total(T)], seed=seed)
    root = lt.as_matrix(root)
    B = (root,) * sys.m
    extent = tuple(max(p, 1) for p in T)
    # keep only offsets that cannot be shifted back by T inside the domain
    table = {o: P for o, P in _fundamental_P_table(sys, B, extent).items()
             if min(x // p for x, p in zip(o, T) if p) == 0}
    dec = FloquetDecomposition(sys.t0, T, "periodic", B, table, mono, sys)
    return replace(dec, residuals=verify_decomposition(dec, box, tol))


# -- change of variables between the original and reduced recurrences ------

def lift(dec: FloquetDecomposition, y: Mapping[MultiIndex, np.ndarray]) -> dict[MultiIndex, np.ndarray]:
    """``x(t) = P(t) y(t)``: solutions of the constant recurrence to the original one."""
    return {t: dec.P(t) @ np.asarray(v, dtype=complex) for t, v in y.items()}


def reduce(dec: FloquetDecomposition, x: Mapping[MultiIndex, np.ndarray]) -> dict[MultiIndex, np.ndarray]:
    """``y(t) = P(t)^-1 x(t)``."""
    out = {}
    for t, v in x.items():
        P = dec.P(t)
        if not lt.is_invertible(P):
            raise SingularMatrixError(f"P{t} is singular")
        out[t] = np.linalg.solve(P, np.asarray(v, dtype=complex))
    return out


def reduced_solution(dec: FloquetDecomposition, v, extent: Sequence[int]) -> dict[MultiIndex, np.ndarray]:
    """``y(t) = B_1^{t^1} ... B_m^{t^m} v`` over ``t0 <= t <= t0 + extent``."""
    v = np.asarray(v, dtype=complex)
    return {t: dec.exponential(t) @ v for t in lt.box(dec.t0, extent)}
