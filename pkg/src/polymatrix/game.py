"""Polymatrix games: block storage, consolidation, classification, reduction.

Agents are indexed from 0. The consolidated coordinate order is agent 0's
block first, then agent 1's, and so on.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np


class GameClass(str, enum.Enum):
    ZERO_SUM = "zero-sum"
    COORDINATION = "coordination"
    GENERAL = "general"

    @property
    def symmetric(self) -> bool:
        """True when only the i < j blocks are free (mirror derived)."""
        return self is not GameClass.GENERAL


class NotPolymatrixError(ValueError):
    """A square matrix whose diagonal blocks are not zero."""


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class AgentPartition:
    """Strategy-space dimensions ``k_1..k_n`` of the agents."""

    dims: Tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(k) for k in self.dims)
        if len(dims) < 2:
            raise ValueError("a polymatrix game needs at least 2 agents")
        if any(k < 1 for k in dims):
            raise ValueError(f"every agent needs dimension >= 1, got {dims}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def parse(cls, text: str) -> "AgentPartition":
        return cls(tuple(int(tok) for tok in text.replace(" ", "").split(",") if tok))

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def K(self) -> int:
        return sum(self.dims)

    @property
    def offsets(self) -> Tuple[int, ...]:
        return tuple(int(v) for v in np.cumsum((0,) + self.dims[:-1]))

    def slice(self, i: int) -> slice:
        self.check_agent(i)
        start = self.offsets[i]
        return slice(start, start + self.dims[i])

    def check_agent(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise IndexError(f"agent index {i} out of range for {self.n} agents")

    def split(self, x) -> list:
        """Per-agent views of a consolidated vector."""
        x = np.asarray(x)
        return [x[self.slice(i)] for i in range(self.n)]

    def __str__(self) -> str:
        return ",".join(str(k) for k in self.dims)


@dataclass(frozen=True, eq=False)
class PolymatrixGame:
    """An unconstrained polymatrix game ``G = (n, k, A, b)``.

    ``blocks`` maps ordered agent pairs ``(i, j)`` to the payoff matrix of
    agent ``i`` against agent ``j``. For zero-sum and coordination games only
    pairs with ``i < j`` are stored; the mirror block is derived, so
    ``A = -A.T`` (resp. ``A = A.T``) holds exactly. Missing pairs are zero.
    """

    partition: AgentPartition
    blocks: Mapping[Tuple[int, int], np.ndarray]
    costs: np.ndarray
    game_class: GameClass = GameClass.GENERAL

    def __post_init__(self):
        part = self.partition
        if not isinstance(part, AgentPartition):
            part = AgentPartition(tuple(part))
            object.__setattr__(self, "partition", part)
        game_class = GameClass(self.game_class)
        object.__setattr__(self, "game_class", game_class)

        stored: Dict[Tuple[int, int], np.ndarray] = {}
        for (i, j), payoff in sorted(self.blocks.items()):
            i, j = int(i), int(j)
            part.check_agent(i)
            part.check_agent(j)
            if i == j:
                raise ValueError(f"diagonal block ({i},{i}) cannot be stored")
            if game_class.symmetric and i > j:
                raise ValueError(
                    f"{game_class.value} games store only i<j blocks, got ({i},{j})"
                )
            payoff = _frozen(payoff)
            expected = (part.dims[i], part.dims[j])
            if payoff.shape != expected:
                raise ValueError(
                    f"block ({i},{j}) has shape {payoff.shape}, expected {expected}"
                )
            stored[(i, j)] = payoff
        object.__setattr__(self, "blocks", stored)

        costs = _frozen(np.zeros(part.K) if self.costs is None else self.costs)
        if costs.shape != (part.K,):
            raise ValueError(f"costs must have length {part.K}, got shape {costs.shape}")
        object.__setattr__(self, "costs", costs)

    @classmethod
    def from_matrix(
        cls,
        A,
        dims: Sequence[int] | AgentPartition,
        game_class: GameClass | str = GameClass.GENERAL,
        costs=None,
        tol: Optional[float] = None,
    ) -> "PolymatrixGame":
        """Split a consolidated matrix into blocks.

        For symmetric classes the lower blocks must mirror the upper ones
        within ``tol`` (see :func:`classify`); only the upper ones are kept.
        """
        part = dims if isinstance(dims, AgentPartition) else AgentPartition(tuple(dims))
        A = np.asarray(A, dtype=float)
        if A.shape != (part.K, part.K):
            raise ValueError(f"matrix shape {A.shape} does not match K={part.K}")
        tol = _default_tol(A) if tol is None else tol
        _check_zero_diagonal(A, part, tol)
        game_class = GameClass(game_class)
        if game_class is GameClass.ZERO_SUM and np.max(np.abs(A + A.T), initial=0.0) > tol:
            raise ValueError("matrix is not skew-symmetric")
        if game_class is GameClass.COORDINATION and np.max(np.abs(A - A.T), initial=0.0) > tol:
            raise ValueError("matrix is not symmetric")
        blocks = {}
        for i in range(part.n):
            for j in range(part.n):
                if i == j or (game_class.symmetric and i > j):
                    continue
                block = A[part.slice(i), part.slice(j)]
                if np.any(block):
                    blocks[(i, j)] = block
        return cls(part, blocks, costs, game_class)

    def block(self, i: int, j: int) -> np.ndarray:
        """Payoff matrix ``A^(ij)``, deriving mirrored blocks as needed."""
        part = self.partition
        part.check_agent(i)
        part.check_agent(j)
        if (i, j) in self.blocks:
            return self.blocks[(i, j)]
        if i != j and self.game_class.symmetric and (j, i) in self.blocks:
            mirror = self.blocks[(j, i)].T
            return -mirror if self.game_class is GameClass.ZERO_SUM else mirror.copy()
        return np.zeros((part.dims[i], part.dims[j]))

    @cached_property
    def matrix(self) -> np.ndarray:
        return _frozen(consolidate(self))

    @property
    def K(self) -> int:
        return self.partition.K

    def with_costs(self, costs) -> "PolymatrixGame":
        return PolymatrixGame(self.partition, self.blocks, costs, self.game_class)


def consolidate(game: PolymatrixGame) -> np.ndarray:
    """The ``K x K`` consolidated payoff matrix of ``game``."""
    part = game.partition
    A = np.zeros((part.K, part.K))
    for (i, j), payoff in game.blocks.items():
        si, sj = part.slice(i), part.slice(j)
        A[si, sj] = payoff
        if game.game_class is GameClass.ZERO_SUM:
            A[sj, si] = -payoff.T
        elif game.game_class is GameClass.COORDINATION:
            A[sj, si] = payoff.T
    return A


def _default_tol(A: np.ndarray) -> float:
    return 1e-12 * max(1.0, float(np.max(np.abs(A), initial=0.0)))


def _check_zero_diagonal(A: np.ndarray, part: AgentPartition, tol: float) -> None:
    for i in range(part.n):
        s = part.slice(i)
        worst = float(np.max(np.abs(A[s, s]), initial=0.0))
        if worst > tol:
            raise NotPolymatrixError(
                f"not a polymatrix consolidated matrix: diagonal block {i} has entry {worst:g}"
            )


def classify(A, partition: Optional[AgentPartition | Sequence[int]] = None,
             tol: Optional[float] = None) -> GameClass:
    """Class of a consolidated matrix.

    Zero-sum wins the tie when ``A`` is (numerically) zero. Without a
    partition, every agent is taken to control one coordinate.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if partition is None:
        partition = AgentPartition((1,) * A.shape[0])
    elif not isinstance(partition, AgentPartition):
        partition = AgentPartition(tuple(partition))
    if partition.K != A.shape[0]:
        raise ValueError(f"partition K={partition.K} does not match matrix size {A.shape[0]}")
    tol = _default_tol(A) if tol is None else tol
    _check_zero_diagonal(A, partition, tol)
    if np.max(np.abs(A + A.T), initial=0.0) <= tol:
        return GameClass.ZERO_SUM
    if np.max(np.abs(A - A.T), initial=0.0) <= tol:
        return GameClass.COORDINATION
    return GameClass.GENERAL


def _profile(game: PolymatrixGame, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (game.K,):
        raise ValueError(f"strategy profile must have length {game.K}, got shape {x.shape}")
    return x


def payoff_field(game: PolymatrixGame, x) -> np.ndarray:
    """Utility gradients of all agents, ``-b + A x``."""
    return game.matrix @ _profile(game, x) - game.costs


def utility(game: PolymatrixGame, x, i: int) -> float:
    """``x_i^T (-b_i + sum_j A^(ij) x_j)``."""
    x = _profile(game, x)
    s = game.partition.slice(i)
    return float(x[s] @ (game.matrix[s] @ x - game.costs[s]))


@dataclass(frozen=True, eq=False)
class AffineReduction:
    """Result of eliminating one coordinate of an affinely constrained agent.

    Agent ``agent`` is restricted to ``coeffs . x_agent = offset``; its
    coordinate ``pivot`` is expressed through the others as
    ``x_agent = basis @ y + shift``.
    """

    game: PolymatrixGame
    original: PolymatrixGame
    agent: int
    pivot: int
    coeffs: np.ndarray
    offset: float
    basis: np.ndarray = field(repr=False)
    shift: np.ndarray = field(repr=False)

    def lift(self, y) -> np.ndarray:
        """Map a reduced profile back to the original strategy space."""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.game.K,):
            raise ValueError(f"reduced profile must have length {self.game.K}")
        parts = self.game.partition.split(y)
        parts[self.agent] = self.basis @ parts[self.agent] + self.shift
        return np.concatenate(parts)

    def restrict(self, x) -> np.ndarray:
        """Drop the pivot coordinate (inverse of :meth:`lift` on the constraint set)."""
        x = _profile(self.original, x)
        s = self.original.partition.slice(self.agent)
        keep = np.ones(self.original.K, dtype=bool)
        keep[s.start + self.pivot] = False
        return x[keep]

    def tangent_projector(self) -> np.ndarray:
        """Orthogonal projector onto the constraint's tangent space (original coordinates)."""
        K = self.original.K
        a = np.zeros(K)
        a[self.original.partition.slice(self.agent)] = self.coeffs
        return np.eye(K) - np.outer(a, a) / (a @ a)


def affine_reduce(game: PolymatrixGame, i: int, a, c: float, w: int,
                  preserve_class: bool = False) -> AffineReduction:
    """Eliminate coordinate ``w`` of agent ``i`` under ``a . x_i = c``.

    With ``x_i = P y + q`` every block ``A^(ij)`` becomes ``P^T A^(ij)``,
    every ``A^(ji)`` becomes ``A^(ji) P``, agent ``i``'s cost becomes
    ``P^T b_i`` and agent ``j``'s cost absorbs ``-A^(ji) q``. Terms that do
    not depend on the deciding agent's own strategy are dropped.

    The result is tagged general unless ``preserve_class`` is set; the map
    is a congruence ``T^T A T``, so symmetry and skew-symmetry survive it.
    """
    part = game.partition
    part.check_agent(i)
    k = part.dims[i]
    a = np.asarray(a, dtype=float)
    if a.shape != (k,):
        raise ValueError(f"constraint coefficients must have length {k}")
    if not 0 <= w < k:
        raise IndexError(f"pivot {w} out of range for agent of dimension {k}")
    if a[w] == 0:
        raise ValueError("cannot pivot on zero coefficient")
    if k == 1:
        raise ValueError("reduction would leave the agent without strategies")

    keep = [v for v in range(k) if v != w]
    P = np.zeros((k, k - 1))
    P[keep, range(k - 1)] = 1.0
    P[w] = -a[keep] / a[w]
    q = np.zeros(k)
    q[w] = c / a[w]

    dims = list(part.dims)
    dims[i] = k - 1
    new_part = AgentPartition(tuple(dims))

    new_costs = [np.array(bj, dtype=float) for bj in part.split(game.costs)]
    new_costs[i] = P.T @ new_costs[i]
    new_blocks = {}
    for j in range(part.n):
        if j == i:
            continue
        new_costs[j] = new_costs[j] - game.block(j, i) @ q
        new_blocks[(i, j)] = P.T @ game.block(i, j)
        new_blocks[(j, i)] = game.block(j, i) @ P
    for (r, s) in [(r, s) for r in range(part.n) for s in range(part.n)]:
        if r != s and i not in (r, s):
            new_blocks[(r, s)] = game.block(r, s)

    game_class = game.game_class if preserve_class else GameClass.GENERAL
    if game_class.symmetric:
        new_blocks = {key: val for key, val in new_blocks.items() if key[0] < key[1]}
    reduced = PolymatrixGame(new_part, new_blocks, np.concatenate(new_costs), game_class)
    return AffineReduction(reduced, game, i, w, _frozen(a), float(c), _frozen(P), _frozen(q))

