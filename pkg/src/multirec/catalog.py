"""Ready-made systems with known closed forms."""
from __future__ import annotations

import numpy as np
import scipy.linalg

from . import lattice as lt
from .engine import CoefficientSystem


def rotation_reflection_blocks(T2: int, n: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """``Q`` (rotation by pi/T2 on the leading 2x2 block) and ``S = diag(1, -1, 1, ...)``."""
    if T2 < 2:
        raise ValueError("T2 must be >= 2")
    if n < 2:
        raise ValueError("n must be >= 2")
    c, s = np.cos(np.pi / T2), np.sin(np.pi / T2)
    Q1 = np.array([[c, -s], [s, c]])
    S1 = np.diag([1.0, -1.0])
    rest = np.eye(n - 2)
    return (scipy.linalg.block_diag(Q1, rest).astype(complex),
            scipy.linalg.block_diag(S1, rest).astype(complex))


def rotation_reflection_system(T2: int, n: int = 2, t0=(0, 0)) -> CoefficientSystem:
    """Two-axis system ``A_1(t) = Q^{2 t^2} S``, ``A_2(t) = Q``.

    ``A_1`` and ``A_2`` never commute, yet the pair is compatible, with
    transition matrix ``chi(t, t0) = Q^{t^2} S^{t^1 - t0^1} Q^{-t0^2}``.
    Stored as a multi-periodic table with periods ``(1, T2)``.
    """
    Q, S = rotation_reflection_blocks(T2, n)
    table = {}
    for j in range(T2):
        offset = (0, j)
        t2 = t0[1] + j
        table[(1, offset)] = lt.power(Q, 2 * t2) @ S
        table[(2, offset)] = Q
    return CoefficientSystem.multi_periodic(table, (1, T2), t0)


def rotation_reflection_transition(T2: int, n: int, t, t0=(0, 0)) -> np.ndarray:
    Q, S = rotation_reflection_blocks(T2, n)
    return lt.power(Q, t[1]) @ lt.power(S, t[0] - t0[0]) @ lt.power(Q, -t0[1])
