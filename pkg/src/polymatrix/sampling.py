"""Gaussian sampling of polymatrix games and Monte-Carlo uniqueness estimates."""
from __future__ import annotations

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .equilibrium import Verdict, uniqueness_preconditions
from .game import AgentPartition, GameClass, PolymatrixGame


@dataclass(frozen=True)
class SamplerConfig:
    game_class: GameClass
    partition: AgentPartition
    scale: float = 1.0
    seed: int = 0
    samples: int = 1000
    gaussian_costs: bool = False

    def __post_init__(self):
        object.__setattr__(self, "game_class", GameClass(self.game_class))
        if not isinstance(self.partition, AgentPartition):
            object.__setattr__(self, "partition", AgentPartition(tuple(self.partition)))
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return {
            "class": self.game_class.value,
            "dims": list(self.partition.dims),
            "scale": self.scale,
            "seed": self.seed,
            "samples": self.samples,
            "gaussian_costs": self.gaussian_costs,
        }


def free_pairs(game_class: GameClass, n: int) -> List[Tuple[int, int]]:
    """Agent pairs whose blocks are drawn independently, in drawing order."""
    return [(i, j) for i in range(n) for j in range(n)
            if i != j and (i < j or not GameClass(game_class).symmetric)]


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for sample ``index``; evaluation order does not matter."""
    return np.random.default_rng([int(seed), int(index)])


def sample_game(config: SamplerConfig, index: int) -> PolymatrixGame:
    """The ``index``-th game of ``config``: i.i.d. ``N(0, scale^2)`` free blocks."""
    if not 0 <= index < config.samples:
        raise IndexError(f"sample index {index} out of range [0, {config.samples})")
    rng = sample_rng(config.seed, index)
    dims = config.partition.dims
    blocks = {
        (i, j): rng.normal(0.0, config.scale, size=(dims[i], dims[j]))
        for i, j in free_pairs(config.game_class, len(dims))
    }
    costs = (rng.normal(0.0, config.scale, size=config.partition.K)
             if config.gaussian_costs else None)
    return PolymatrixGame(config.partition, blocks, costs, config.game_class)


@dataclass(frozen=True)
class SampleStats:
    rank: int
    min_singular_value: float
    rank_tol: float
    verdict: Verdict
    det_sign: int


def _evaluate(config: SamplerConfig, index: int) -> SampleStats:
    report = uniqueness_preconditions(sample_game(config, index))
    return SampleStats(report.rank, report.min_singular_value, report.rank_tol,
                       report.verdict, report.det_sign)


def _evaluate_chunk(args) -> List[SampleStats]:
    config, start, stop = args
    return [_evaluate(config, index) for index in range(start, stop)]


@dataclass(frozen=True)
class MonteCarloReport:
    config: SamplerConfig
    unique_count: int
    unique_fraction: float
    min_sv_min: float
    min_sv_median: float
    min_sv_max: float
    min_sv_over_tol_min: float
    rank_histogram: Dict[int, int]
    verdict_counts: Dict[str, int]
    det_sign_counts: Dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["config"] = self.config.to_dict()
        out["rank_histogram"] = {str(k): v for k, v in sorted(self.rank_histogram.items())}
        out["det_sign_counts"] = {str(k): v for k, v in sorted(self.det_sign_counts.items())}
        return out

    CSV_HEADER = ("class", "dims", "samples", "fraction", "min_sv_min")

    def csv_row(self) -> tuple:
        return (self.config.game_class.value, str(self.config.partition),
                self.config.samples, self.unique_fraction, self.min_sv_min)


def mc_unique_fraction(config: SamplerConfig, workers: Optional[int] = 1,
                       chunk: int = 250) -> MonteCarloReport:
    """Fraction of sampled games with a unique equilibrium.

    With ``workers > 1`` samples are evaluated in a process pool; the report
    does not depend on the worker count.
    """
    bounds = [(config, start, min(start + chunk, config.samples))
              for start in range(0, config.samples, chunk)]
    if workers is not None and workers <= 1:
        stats = [s for part in map(_evaluate_chunk, bounds) for s in part]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            stats = [s for part in pool.map(_evaluate_chunk, bounds) for s in part]

    unique = sum(s.verdict is Verdict.UNIQUE for s in stats)
    min_sv = np.sort([s.min_singular_value for s in stats])
    ratios = [s.min_singular_value / s.rank_tol if s.rank_tol > 0 else np.inf for s in stats]
    return MonteCarloReport(
        config=config,
        unique_count=unique,
        unique_fraction=unique / config.samples,
        min_sv_min=float(min_sv[0]),
        min_sv_median=float(np.median(min_sv)),
        min_sv_max=float(min_sv[-1]),
        min_sv_over_tol_min=float(min(ratios)),
        rank_histogram=dict(sorted(Counter(s.rank for s in stats).items())),
        verdict_counts=dict(sorted(Counter(s.verdict.value for s in stats).items())),
        det_sign_counts=dict(sorted(Counter(s.det_sign for s in stats).items())),
    )
