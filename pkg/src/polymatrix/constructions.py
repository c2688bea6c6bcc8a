"""Explicit games with a unique equilibrium for each class and parity of K."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .equilibrium import (
    LEIBNIZ_MAX_DIM,
    UniquenessReport,
    Verdict,
    leibniz_det,
    uniqueness_preconditions,
)
from .game import AgentPartition, GameClass, PolymatrixGame


class ConstructionKind(str, enum.Enum):
    COORDINATION_EVEN = "coord-even"
    COORDINATION_ODD = "coord-odd"
    ZERO_SUM_EVEN = "zs-even"

    @property
    def game_class(self) -> GameClass:
        if self is ConstructionKind.ZERO_SUM_EVEN:
            return GameClass.ZERO_SUM
        return GameClass.COORDINATION

    @property
    def expected_abs_det(self) -> int:
        return 2 if self is ConstructionKind.COORDINATION_ODD else 1


class ConstructionError(ValueError):
    pass


@dataclass(frozen=True)
class ConstructionSpec:
    kind: ConstructionKind
    partition: AgentPartition

    def __post_init__(self):
        kind = ConstructionKind(self.kind)
        part = self.partition
        if not isinstance(part, AgentPartition):
            part = AgentPartition(tuple(part))
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "partition", part)
        K = part.K
        if kind is ConstructionKind.COORDINATION_ODD and K % 2 == 0:
            raise ConstructionError(f"{kind.value} needs an odd total dimension, got K={K}")
        if kind is not ConstructionKind.COORDINATION_ODD and K % 2 == 1:
            raise ConstructionError(f"{kind.value} needs an even total dimension, got K={K}")
        for i, k in enumerate(part.dims):
            if 2 * k > K:
                raise ConstructionError(
                    f"diagonal block would be nonzero: agent {i} has k={k} > K/2={K / 2:g}"
                )


def witness_matrix(kind: ConstructionKind | str, K: int) -> np.ndarray:
    """The consolidated witness matrix; it depends on ``K`` only.

    Even kinds put ones at ``(w, K/2 + w)``; the odd kind puts ones at
    ``(w, floor(K/2) + w)`` and ``(w, ceil(K/2) + w)``. Coordination
    mirrors them with ``+1``, zero-sum with ``-1``.
    """
    kind = ConstructionKind(kind)
    A = np.zeros((K, K))
    if kind is ConstructionKind.COORDINATION_ODD:
        shifts = (K // 2, K - K // 2)
    else:
        shifts = (K // 2,)
    mirror = -1.0 if kind is ConstructionKind.ZERO_SUM_EVEN else 1.0
    for shift in shifts:
        for w in range(K - shift):
            A[w, w + shift] = 1.0
            A[w + shift, w] = mirror
    return A


def construct(spec: ConstructionSpec, costs=None) -> PolymatrixGame:
    """Witness game for ``spec`` (costs default to zero)."""
    A = witness_matrix(spec.kind, spec.partition.K)
    return PolymatrixGame.from_matrix(A, spec.partition, spec.kind.game_class, costs, tol=0.0)


def verify_construction(spec: ConstructionSpec) -> UniquenessReport:
    """Run the uniqueness checks on the witness and insist on the known determinant.

    Small witnesses are checked exactly with :func:`leibniz_det`, larger
    ones through the sign-log determinant.
    """
    game = construct(spec)
    report = uniqueness_preconditions(game)
    expected = spec.kind.expected_abs_det
    if report.verdict is not Verdict.UNIQUE:
        raise ConstructionError(f"witness {spec} is not unique: {report.verdict.value}")
    if spec.partition.K <= LEIBNIZ_MAX_DIM:
        exact = leibniz_det(game.matrix)
        if abs(exact) != expected:
            raise ConstructionError(f"witness {spec} has det {exact}, expected |det| = {expected}")
    if abs(report.det_abs - expected) > 1e-9 * expected:
        raise ConstructionError(f"witness {spec} has |det| = {report.det_abs}, expected {expected}")
    return report
