"""Monte Carlo check of the mode-based learner and theoretical curve export.

Each trial builds a fresh world (random majority value per bin), draws a
training sample, learns per-bin modes and scores them on fresh test
instances. Trials are seeded from ``(master_seed, m, trial_index)`` alone, so
results do not depend on scheduling or on which other grid points are run.
"""

from __future__ import annotations

import math
import weakref
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import stats

from .bounds import GApproxParams, ea_g_lower_bound, ea_uniform, old_overall_bound
from .distributions import AliasTable, BinDistribution, uniform_weights
from .exceptions import ValidationError

__all__ = [
    "DEFAULT_M_GRID",
    "DEFAULT_SEED",
    "CurvePoint",
    "CurveSeries",
    "SimulationConfig",
    "SimulationPoint",
    "THEORY_SERIES",
    "run",
    "run_trial",
    "simulated_series",
    "t_quantile",
    "theoretical_curves",
    "trial_seed",
]

DEFAULT_M_GRID = (0, 1250, 2500, 5000, 10000, 20000, 30000, 40000, 50000, 60000, 70000)
DEFAULT_SEED = 19950701
THEORY_SERIES = ("exact", "old_bound", "g_lower_bound", "optimal")
_UNSEEN = -1


@dataclass(frozen=True)
class SimulationConfig:
    """Full description of a simulation experiment.

    ``distribution`` defaults to uniform over ``num_bins``; when given, its
    size must match ``num_bins``.
    """

    num_bins: int = 10000
    distribution: BinDistribution | None = None
    majority_prob: float = 0.9
    m_grid: tuple[int, ...] = DEFAULT_M_GRID
    repetitions: int = 30
    test_size: int = 1000
    master_seed: int = DEFAULT_SEED

    def __post_init__(self):
        if int(self.num_bins) != self.num_bins or self.num_bins < 1:
            raise ValidationError(f"num_bins must be a positive integer, got {self.num_bins!r}")
        dist = self.distribution if self.distribution is not None else uniform_weights(self.num_bins)
        if dist.num_bins != self.num_bins:
            raise ValidationError(f"distribution has {dist.num_bins} bins, config says {self.num_bins}")
        object.__setattr__(self, "distribution", dist)
        if not (0.5 <= self.majority_prob <= 1.0):
            raise ValidationError(f"p must be in [0.5, 1], got {self.majority_prob!r}")
        grid = tuple(int(m) for m in self.m_grid)
        if not grid:
            raise ValidationError("m_grid must not be empty")
        if any(m < 0 for m in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValidationError("m_grid must be strictly increasing non-negative integers")
        object.__setattr__(self, "m_grid", grid)
        if int(self.repetitions) != self.repetitions or self.repetitions < 2:
            raise ValidationError("repetitions must be at least 2 for a confidence interval")
        if int(self.test_size) != self.test_size or self.test_size < 1:
            raise ValidationError("test_size must be a positive integer")
        if int(self.master_seed) != self.master_seed:
            raise ValidationError("master_seed must be an integer")


@dataclass(frozen=True)
class SimulationPoint:
    m: int
    mean_accuracy: float
    std_dev: float
    ci_half_width: float
    accuracies: tuple[float, ...] = field(default=(), repr=False, compare=False)

    @property
    def std_error(self) -> float:
        return self.std_dev / math.sqrt(len(self.accuracies)) if self.accuracies else float("nan")


class CurvePoint(NamedTuple):
    m: int
    value: float
    ci_half_width: float | None = None


@dataclass(frozen=True)
class CurveSeries:
    label: str
    method: str
    points: tuple[CurvePoint, ...]

    def __post_init__(self):
        pts = tuple(CurvePoint(*p) for p in self.points)
        if any(b.m < a.m for a, b in zip(pts, pts[1:])):
            raise ValidationError(f"series {self.label!r}: points must be sorted by m")
        object.__setattr__(self, "points", pts)


def t_quantile(df: int) -> float:
    """Two-sided 95% Student-t critical value."""
    return float(stats.t.ppf(0.975, df))


def trial_seed(master_seed: int, m: int, trial_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master_seed % 2**64, m, trial_index])


_ALIAS_CACHE: "weakref.WeakKeyDictionary[BinDistribution, AliasTable]" = weakref.WeakKeyDictionary()


def _alias_for(dist: BinDistribution) -> AliasTable:
    table = _ALIAS_CACHE.get(dist)
    if table is None:
        table = AliasTable(dist.weights)
        _ALIAS_CACHE[dist] = table
    return table


def run_trial(config: SimulationConfig, m: int, trial_index: int) -> float:
    """Train on ``m`` random instances and return accuracy on ``test_size`` more."""
    if not (0 <= trial_index < config.repetitions):
        raise ValidationError(f"trial_index must be in [0, {config.repetitions}), got {trial_index}")
    rng = np.random.default_rng(trial_seed(config.master_seed, m, trial_index))
    alias = _alias_for(config.distribution)
    nbins = config.num_bins
    p = config.majority_prob

    majority = rng.integers(0, 2, size=nbins)

    def draw(n):
        bins = alias.sample(rng, n)
        hit = rng.random(n) < p
        values = np.where(hit, majority[bins], 1 - majority[bins])
        return bins, values

    bins, values = draw(m)
    totals = np.bincount(bins, minlength=nbins)
    ones = np.bincount(bins, weights=values, minlength=nbins)
    zeros = totals - ones
    coin = rng.integers(0, 2, size=nbins)
    learned = np.where(ones > zeros, 1, np.where(zeros > ones, 0, coin))
    learned[totals == 0] = _UNSEEN

    test_bins, test_values = draw(config.test_size)
    predicted = learned[test_bins]
    unseen = predicted == _UNSEEN
    predicted[unseen] = rng.integers(0, 2, size=int(unseen.sum()))
    return float(np.mean(predicted == test_values))


def _summarize(m: int, accs: Sequence[float]) -> SimulationPoint:
    a = np.asarray(accs, dtype=np.float64)
    n = a.size
    mean = float(a.mean())
    std = float(a.std(ddof=1))
    half = t_quantile(n - 1) * std / math.sqrt(n)
    return SimulationPoint(m, mean, std, half, tuple(float(x) for x in a))


def run(config: SimulationConfig, workers: int = 1) -> list[SimulationPoint]:
    """Run every grid point; ``workers > 1`` spreads trials over threads."""
    jobs = [(m, i) for m in config.m_grid for i in range(config.repetitions)]
    _alias_for(config.distribution)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            accs = list(pool.map(lambda job: run_trial(config, *job), jobs))
    else:
        accs = [run_trial(config, m, i) for m, i in jobs]
    reps = config.repetitions
    return [
        _summarize(m, accs[k * reps : (k + 1) * reps])
        for k, m in enumerate(config.m_grid)
    ]


def simulated_series(points: Sequence[SimulationPoint], label: str) -> CurveSeries:
    return CurveSeries(
        label,
        "simulated",
        tuple(CurvePoint(pt.m, pt.mean_accuracy, pt.ci_half_width) for pt in points),
    )


def theoretical_curves(
    num_bins: int,
    p: float,
    m_grid: Sequence[int],
    which: Sequence[str] = THEORY_SERIES,
    trunc_eps: float = 1e-12,
    params: GApproxParams = GApproxParams(),
) -> list[CurveSeries]:
    """Evaluate the requested closed-form curves at every ``m`` in ``m_grid``.

    Series come back in the canonical order of :data:`THEORY_SERIES`.
    """
    unknown = set(which) - set(THEORY_SERIES)
    if unknown:
        raise ValidationError(f"unknown series: {sorted(unknown)}")
    if not which:
        raise ValidationError("select at least one series")
    grid = sorted(int(m) for m in m_grid)

    evaluators = {
        "exact": lambda m: ea_uniform(m, num_bins, p, trunc_eps).value,
        "old_bound": lambda m: old_overall_bound(m, num_bins, p),
        "g_lower_bound": lambda m: ea_g_lower_bound(m, num_bins, p, params).value,
        "optimal": lambda m: float(p),
    }
    out = []
    for name in THEORY_SERIES:
        if name in which:
            f = evaluators[name]
            out.append(CurveSeries(name, name, tuple(CurvePoint(m, f(m)) for m in grid)))
    return out
