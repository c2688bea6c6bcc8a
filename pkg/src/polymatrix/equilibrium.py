"""Nash equilibria of unconstrained polymatrix games.

A profile is a Nash equilibrium exactly when ``A x = b``, so everything
here is linear algebra on the consolidated matrix.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np

from .game import GameClass, PolymatrixGame

LEIBNIZ_MAX_DIM = 10
EPS = np.finfo(float).eps


class NoEquilibriumError(ValueError):
    """Raised where an equilibrium is required but ``A x = b`` is inconsistent."""


@dataclass(frozen=True)
class NonUnique:
    """``A`` is singular and ``A x = b`` is consistent."""

    W: int


@dataclass(frozen=True)
class NoEquilibrium:
    """``A x = b`` has no solution."""

    residual: float


class Verdict(str, enum.Enum):
    UNIQUE = "Unique"
    NON_UNIQUE = "NonUnique"
    NO_EQUILIBRIUM = "NoEquilibrium"


def rank_tolerance(singular_values: np.ndarray, K: int) -> float:
    smax = float(singular_values[0]) if len(singular_values) else 0.0
    return smax * K * EPS


def consistency_tolerance(b: np.ndarray) -> float:
    return 1e-8 * max(1.0, float(np.linalg.norm(b)))


def nash_residual(game: PolymatrixGame, x) -> float:
    """``||A x - b||``; zero exactly at Nash equilibria."""
    x = np.asarray(x, dtype=float)
    if x.shape != (game.K,):
        raise ValueError(f"strategy profile must have length {game.K}")
    return float(np.linalg.norm(game.matrix @ x - game.costs))


@dataclass(frozen=True, eq=False)
class EquilibriumSet:
    """The affine set ``particular + span(basis)`` of all equilibria.

    ``basis`` holds ``W`` orthonormal nullspace vectors as rows.
    """

    particular: np.ndarray
    basis: np.ndarray
    rank: int
    rank_tol: float
    singular_values: np.ndarray

    @property
    def W(self) -> int:
        return int(self.basis.shape[0])

    @property
    def unique(self) -> bool:
        return self.W == 0

    def point(self, coords) -> np.ndarray:
        """``particular + sum_w coords[w] * basis[w]``."""
        coords = np.asarray(coords, dtype=float)
        return self.particular + coords @ self.basis

    def to_dict(self) -> dict:
        return {
            "W": self.W,
            "rank": self.rank,
            "rank_tol": self.rank_tol,
            "particular": self.particular,
            "basis": [row for row in self.basis],
        }


def _orient(basis: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each basis vector made positive
    out = basis.copy()
    for row in out:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return out


def _svd(A: np.ndarray):
    U, s, Vt = np.linalg.svd(A)
    tol = rank_tolerance(s, A.shape[0])
    rank = int(np.sum(s > tol))
    return U, s, Vt, rank, tol


def equilibrium_set(game: PolymatrixGame) -> EquilibriumSet | NoEquilibrium:
    """All equilibria of ``game``, or :class:`NoEquilibrium`."""
    A, b = game.matrix, game.costs
    U, s, Vt, rank, tol = _svd(A)
    coeffs = (U[:, :rank].T @ b) / s[:rank]
    particular = Vt[:rank].T @ coeffs
    residual = float(np.linalg.norm(A @ particular - b))
    if residual > consistency_tolerance(b):
        return NoEquilibrium(residual)
    basis = _orient(Vt[rank:])
    particular.setflags(write=False)
    basis.setflags(write=False)
    s.setflags(write=False)
    return EquilibriumSet(particular, basis, rank, tol, s)


def solve_unique(game: PolymatrixGame) -> np.ndarray | NonUnique | NoEquilibrium:
    """The unique equilibrium ``A^{-1} b`` when ``A`` has full numerical rank."""
    A = game.matrix
    s = np.linalg.svd(A, compute_uv=False)
    if int(np.sum(s > rank_tolerance(s, game.K))) == game.K:
        return np.linalg.solve(A, game.costs)
    eqset = equilibrium_set(game)
    if isinstance(eqset, NoEquilibrium):
        return eqset
    return NonUnique(eqset.W)


def closest_equilibrium(eqset: EquilibriumSet, x0) -> np.ndarray:
    """Orthogonal projection of ``x0`` onto the equilibrium set."""
    x0 = np.asarray(x0, dtype=float)
    p = eqset.particular
    if eqset.W == 0:
        return p.copy()
    return p + eqset.basis.T @ (eqset.basis @ (x0 - p))


def leibniz_terms(A) -> Iterator[Tuple[Tuple[int, ...], int, float]]:
    """Nonzero terms ``(sigma, sgn(sigma), prod_w A[w, sigma_w])`` of the Leibniz sum.

    Permutations are enumerated row by row; a branch is abandoned as soon as
    it hits a zero entry, since every completion contributes zero. The sign
    is ``(-1)**N(sigma)`` with ``N`` the inversion count, accumulated as
    each column is placed.
    """
    A = np.asarray(A, dtype=float)
    m = A.shape[0]
    if A.shape != (m, m):
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if m > LEIBNIZ_MAX_DIM:
        raise ValueError(f"leibniz_det is capped at {LEIBNIZ_MAX_DIM}x{LEIBNIZ_MAX_DIM}, got {m}")
    rows = [[(c, float(A[r, c])) for c in range(m) if A[r, c] != 0.0] for r in range(m)]
    sigma: List[int] = []

    def extend(r: int, used: int, inversions: int, prod: float):
        if r == m:
            yield tuple(sigma), (-1) ** inversions, prod
            return
        for c, val in rows[r]:
            bit = 1 << c
            if used & bit:
                continue
            # earlier rows mapped to larger columns are inversions
            sigma.append(c)
            yield from extend(r + 1, used | bit, inversions + (used >> (c + 1)).bit_count(),
                              prod * val)
            sigma.pop()

    yield from extend(0, 0, 0, 1.0)


def leibniz_det(A) -> float:
    """Determinant by the Leibniz permutation sum (small matrices only)."""
    A = np.asarray(A, dtype=float)
    if A.shape == (0, 0):
        return 1.0
    return math.fsum(sign * prod for _, sign, prod in leibniz_terms(A))


@dataclass(frozen=True)
class UniquenessReport:
    """Uniqueness preconditions and the numerical verdict for one game."""

    dims: Tuple[int, ...]
    game_class: GameClass
    half_condition: Tuple[bool, ...]
    parity_condition: bool
    det_sign: int
    det_log_abs: Optional[float]
    rank: int
    rank_tol: float
    min_singular_value: float
    verdict: Verdict

    @property
    def K(self) -> int:
        return sum(self.dims)

    @property
    def det_abs(self) -> float:
        return 0.0 if self.det_log_abs is None else math.exp(self.det_log_abs)

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "class": self.game_class.value,
            "half_condition": list(self.half_condition),
            "parity_condition": self.parity_condition,
            "determinant": {"sign": self.det_sign, "log_abs": self.det_log_abs},
            "rank": self.rank,
            "rank_tol": self.rank_tol,
            "min_singular_value": self.min_singular_value,
            "verdict": self.verdict.value,
        }


def uniqueness_preconditions(game: PolymatrixGame) -> UniquenessReport:
    """Check ``k_i <= K/2``, the parity of ``K`` and the rank of ``A``.

    The determinant is reported as (sign, log|det|); a numerically singular
    matrix reports sign 0 and no logarithm.
    """
    dims = game.partition.dims
    K = game.K
    A = game.matrix
    s = np.linalg.svd(A, compute_uv=False)
    tol = rank_tolerance(s, K)
    rank = int(np.sum(s > tol))
    if rank == K:
        sign, logabs = np.linalg.slogdet(A)
        det_sign, det_log = int(sign), float(logabs)
        verdict = Verdict.UNIQUE
    else:
        det_sign, det_log = 0, None
        eqset = equilibrium_set(game)
        verdict = Verdict.NO_EQUILIBRIUM if isinstance(eqset, NoEquilibrium) else Verdict.NON_UNIQUE
    return UniquenessReport(
        dims=dims,
        game_class=game.game_class,
        half_condition=tuple(2 * k <= K for k in dims),
        parity_condition=K % 2 == 0,
        det_sign=det_sign,
        det_log_abs=det_log,
        rank=rank,
        rank_tol=tol,
        min_singular_value=float(s[-1]),
        verdict=verdict,
    )
