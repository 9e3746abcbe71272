"""Multiple linear recurrences ``x(t + 1_a) = A_a(t) x(t)`` on ``{t >= t0}``.

Coefficient families, the compatibility check, the ordered products
``C_{a,k}(t)``, transition matrices and solutions.

Product convention: ``C_{a,k}(t) = A_a(t+(k-1)1_a) ... A_a(t+1_a) A_a(t)``,
so the factor at the highest lattice offset is leftmost.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import lattice as lt
from .errors import DomainError, NonCommutingError, SingularMatrixError
from .lattice import MultiIndex, PeriodVector

KINDS = ("constant", "multi_periodic_table", "whole_lattice_table_window", "hicks")
TOL_COMPAT = 1e-9

TableKey = tuple[int, MultiIndex]


def scaled_tol(tol: float, *mats) -> float:
    return tol * max([1.0] + [lt.max_abs(M) for M in mats])


@dataclass(frozen=True, eq=False)
class CoefficientSystem:
    """The family ``A_1(t), ..., A_m(t)`` over the domain ``{t >= t0}``.

    Build instances with the ``constant``, ``multi_periodic``, ``window`` or
    ``from_function`` constructors rather than directly.

    ``table`` is keyed by ``(alpha, offset)`` where ``offset = t - t0``
    reduced into the stored domain.
    """

    m: int
    n: int
    t0: MultiIndex
    kind: str
    periods: PeriodVector | None = None
    table: Mapping[TableKey, np.ndarray] = field(default_factory=dict)
    matrices: tuple[np.ndarray, ...] = ()
    extent: MultiIndex | None = None
    func: Callable[[int, MultiIndex], np.ndarray] | None = field(default=None, repr=False)
    source: object = field(default=None, repr=False)

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, matrices: Sequence, t0: Sequence[int] | None = None):
        mats = tuple(lt.as_matrix(A) for A in matrices)
        if not mats:
            raise ValueError("need at least one coefficient matrix")
        n = mats[0].shape[0]
        for A in mats:
            if A.shape != (n, n):
                raise ValueError("all coefficient matrices must share a size")
        m = len(mats)
        t0 = lt.as_index(t0) if t0 is not None else (0,) * m
        if len(t0) != m:
            raise ValueError("t0 dimension does not match the number of axes")
        return cls(m=m, n=n, t0=t0, kind="constant", periods=PeriodVector((1,) * m), matrices=mats)

    @classmethod
    def multi_periodic(cls, table: Mapping[TableKey, object], periods, t0: Sequence[int] | None = None):
        """Table over the fundamental domain ``prod_a {0..max(T_a,1)-1}``."""
        periods = periods if isinstance(periods, PeriodVector) else PeriodVector(tuple(periods))
        m = periods.m
        t0 = lt.as_index(t0) if t0 is not None else (0,) * m
        offsets = list(lt.box((0,) * m, [d - 1 for d in periods.depths]))
        stored = _validated_table(table, m, offsets)
        n = next(iter(stored.values())).shape[0]
        return cls(m=m, n=n, t0=t0, kind="multi_periodic_table", periods=periods, table=stored)

    @classmethod
    def window(cls, table: Mapping[TableKey, object], extent: Sequence[int], t0: Sequence[int] | None = None):
        """Table over the finite window ``t0 <= t <= t0 + extent``; undefined outside."""
        extent = lt.as_index(extent)
        m = len(extent)
        t0 = lt.as_index(t0) if t0 is not None else (0,) * m
        stored = _validated_table(table, m, list(lt.box((0,) * m, extent)))
        n = next(iter(stored.values())).shape[0]
        return cls(m=m, n=n, t0=t0, kind="whole_lattice_table_window", table=stored, extent=extent)

    @classmethod
    def from_function(cls, func, m: int, n: int, t0: Sequence[int] | None = None,
                      periods=None, kind: str = "hicks", source=None):
        """System evaluated by ``func(alpha, t)``."""
        if kind not in KINDS:
            raise ValueError(f"unknown kind {kind!r}")
        t0 = lt.as_index(t0) if t0 is not None else (0,) * m
        if periods is not None and not isinstance(periods, PeriodVector):
            periods = PeriodVector(tuple(periods))
        return cls(m=m, n=n, t0=t0, kind=kind, periods=periods, func=func, source=source)

    # -- evaluation ---------------------------------------------------------

    def contains(self, t: Sequence[int]) -> bool:
        if not lt.leq(self.t0, t):
            return False
        if self.extent is not None:
            return lt.leq(t, lt.add(self.t0, self.extent))
        return True

    def coefficient(self, alpha: int, t: Sequence[int]) -> np.ndarray:
        """``A_alpha(t)``."""
        if not 1 <= alpha <= self.m:
            raise ValueError(f"axis {alpha} out of range 1..{self.m}")
        t = tuple(t)
        if not self.contains(t):
            raise DomainError(f"point {t} is outside the domain of the system (t0={self.t0})")
        if self.kind == "constant":
            return self.matrices[alpha - 1]
        if self.func is not None:
            return self.func(alpha, t)
        offset = lt.sub(t, self.t0)
        if self.kind == "multi_periodic_table":
            offset = tuple(o % p if p else 0 for o, p in zip(offset, self.periods.periods))
        return self.table[(alpha, offset)]

    def all_invertible(self, extent: Sequence[int] | None = None) -> bool:
        extent = default_box(self) if extent is None else extent
        return all(lt.is_invertible(self.coefficient(a, t))
                   for t in lt.box(self.t0, extent) for a in range(1, self.m + 1))


def _validated_table(table, m, offsets) -> dict:
    stored = {}
    n = None
    for (alpha, offset), M in table.items():
        offset = lt.as_index(offset)
        if len(offset) != m or not 1 <= alpha <= m:
            raise ValueError(f"bad table key {(alpha, offset)}")
        M = lt.as_matrix(M, n)
        n = M.shape[0]
        stored[(int(alpha), offset)] = M
    expected = {(a, o) for a in range(1, m + 1) for o in offsets}
    missing = expected - stored.keys()
    extra = stored.keys() - expected
    if missing:
        raise ValueError(f"table is missing {len(missing)} entries, e.g. {sorted(missing)[0]}")
    if extra:
        raise ValueError(f"table has entries outside its domain, e.g. {sorted(extra)[0]}")
    return stored


def default_box(sys: CoefficientSystem) -> MultiIndex:
    """One period per axis plus one step (a single step for constant axes)."""
    if sys.kind == "whole_lattice_table_window":
        return tuple(max(e - 1, 0) for e in sys.extent)
    if sys.periods is not None:
        return sys.periods.depths
    return (1,) * sys.m


# -- compatibility ----------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    t: MultiIndex
    alpha: int
    beta: int
    residual: float


@dataclass(frozen=True)
class CompatibilityReport:
    ok: bool
    violations: tuple[Violation, ...]
    max_residual: float
    points_checked: int


def check_compatibility(sys: CoefficientSystem, box: Sequence[int] | None = None,
                        tol: float = TOL_COMPAT) -> CompatibilityReport:
    """Evaluate ``A_a(t+1_b) A_b(t) = A_b(t+1_a) A_a(t)`` over a box at ``t0``.

    For multi-periodic tables the default box (one period plus one step per
    axis) gives a complete verdict.
    """
    box = default_box(sys) if box is None else lt.as_index(box)
    violations = []
    worst = 0.0
    count = 0
    for t in lt.box(sys.t0, box):
        count += 1
        for a in range(1, sys.m + 1):
            for b in range(a + 1, sys.m + 1):
                lhs = sys.coefficient(a, lt.step(t, b)) @ sys.coefficient(b, t)
                rhs = sys.coefficient(b, lt.step(t, a)) @ sys.coefficient(a, t)
                r = lt.max_abs(lhs - rhs)
                worst = max(worst, r)
                if r > scaled_tol(tol, lhs, rhs):
                    violations.append(Violation(t, a, b, r))
    return CompatibilityReport(not violations, tuple(violations), worst, count)


# -- products, transitions, solutions ---------------------------------------

def c_product(sys: CoefficientSystem, alpha: int, k: int, t: Sequence[int]) -> np.ndarray:
    """``C_{alpha,k}(t)``, the product of ``k`` coefficients along ``alpha``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    t = tuple(t)
    if not lt.leq(sys.t0, t):
        raise DomainError(f"point {t} is below the base point {sys.t0}")
    out = lt.identity(sys.n)
    for i in range(k):
        out = sys.coefficient(alpha, lt.step(t, alpha, i)) @ out
    return out


def transition(sys: CoefficientSystem, t: Sequence[int], s: Sequence[int]) -> np.ndarray:
    """Transition matrix ``chi(t, s)`` for ``s <= t``.

    Steps axis m first from ``s``, then axis m-1, ..., finally axis 1.
    """
    t, s = tuple(t), tuple(s)
    if not lt.leq(s, t):
        raise DomainError(f"transition needs s <= t, got s={s}, t={t}")
    if not lt.leq(sys.t0, s):
        raise DomainError(f"point {s} is below the base point {sys.t0}")
    out = lt.identity(sys.n)
    point = list(s)
    for alpha in range(sys.m, 0, -1):
        k = t[alpha - 1] - s[alpha - 1]
        out = c_product(sys, alpha, k, point) @ out
        point[alpha - 1] = t[alpha - 1]
    return out


def solve(sys: CoefficientSystem, x0, t: Sequence[int]) -> np.ndarray:
    """Value at ``t`` of the solution with ``x(t0) = x0``."""
    x0 = np.asarray(x0, dtype=complex)
    if x0.shape != (sys.n,):
        raise ValueError(f"x0 must have length {sys.n}")
    return transition(sys, t, sys.t0) @ x0


def transition_table(sys: CoefficientSystem, extent: Sequence[int],
                     origin: Sequence[int] | None = None) -> dict[MultiIndex, np.ndarray]:
    """``chi(t, origin)`` for every ``t`` in the box, by one step per point.

    Each point is reached from its predecessor along the first axis with a
    positive offset; for compatible systems the choice is immaterial.
    """
    origin = sys.t0 if origin is None else tuple(origin)
    if not lt.leq(sys.t0, origin):
        raise DomainError(f"point {origin} is below the base point {sys.t0}")
    out = {}
    for t in lt.box(origin, extent):
        offset = lt.sub(t, origin)
        axis = next((a for a, o in enumerate(offset, 1) if o > 0), None)
        if axis is None:
            out[t] = lt.identity(sys.n)
        else:
            prev = lt.step(t, axis, -1)
            out[t] = sys.coefficient(axis, prev) @ out[prev]
    return out


def trajectory(sys: CoefficientSystem, x0, extent: Sequence[int]) -> list[tuple[MultiIndex, np.ndarray]]:
    """Solution values over ``t0 <= t <= t0 + extent``, lexicographic in t."""
    x0 = np.asarray(x0, dtype=complex)
    if x0.shape != (sys.n,):
        raise ValueError(f"x0 must have length {sys.n}")
    table = transition_table(sys, extent)
    return [(t, Phi @ x0) for t, Phi in table.items()]


def synthesize_compatible(P_table: Mapping[MultiIndex, object], periods, B: Sequence,
                          t0: Sequence[int] | None = None, tol: float = TOL_COMPAT) -> CoefficientSystem:
    """Compatible multi-periodic system ``A_a(t) = P(t+1_a) B_a P(t)^-1``.

    ``P_table`` maps offsets in the fundamental domain of ``periods`` to
    invertible matrices; ``B`` holds m pairwise commuting invertible matrices.
    """
    periods = periods if isinstance(periods, PeriodVector) else PeriodVector(tuple(periods))
    m = periods.m
    Bs = [lt.as_matrix(b) for b in B]
    if len(Bs) != m:
        raise ValueError(f"need {m} matrices B, got {len(Bs)}")
    for i, Bi in enumerate(Bs):
        if not lt.is_invertible(Bi):
            raise SingularMatrixError(f"B_{i + 1} is singular")
        for j in range(i + 1, m):
            if lt.max_abs(lt.commutator(Bi, Bs[j])) > scaled_tol(tol, Bi, Bs[j]):
                raise NonCommutingError(f"B_{i + 1} and B_{j + 1} do not commute")
    P = {lt.as_index(o): lt.as_matrix(M) for o, M in P_table.items()}
    offsets = list(lt.box((0,) * m, [d - 1 for d in periods.depths]))
    if set(P) != set(offsets):
        raise ValueError("P_table must cover exactly the fundamental domain")

    def P_at(offset):
        return P[tuple(o % p if p else 0 for o, p in zip(offset, periods.periods))]

    P_inv = {}
    for o, M in P.items():
        try:
            P_inv[o] = lt.inverse(M)
        except SingularMatrixError:
            raise SingularMatrixError(f"P at offset {o} is singular") from None
    table = {}
    for o in offsets:
        for a in range(1, m + 1):
            table[(a, o)] = P_at(lt.step(o, a)) @ Bs[a - 1] @ P_inv[o]
    return CoefficientSystem.multi_periodic(table, periods, t0)
