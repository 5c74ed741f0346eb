"""Bootstrapped replay on expanded data.

Each of B replicates resamples the log with replacement up to K*T
records, optionally jitters every drawn context with fresh Gaussian
noise (the smoothed-bootstrap trick that stops learners from overfitting
the duplicated records), and replays a fresh learner over it.  Because a
uniform log matches ~1/K of the draws, every replicate accepts ~T
records: the replicate payoffs estimate the distribution of the payoff
over a full horizon-T run, not the truncated horizon T/K that plain
replay emulates.

The replicate spread is also what the confidence region is built from.
A replicate draws expansion*T records where the original estimate rests
on ~T/expansion accepted ones, so replicate quantiles are rescaled by
sqrt(expansion) to the estimator's own sampling scale (the usual
resample-size correction) before being re-centered around the point
estimate.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _engine
from .core import (AllReplicatesEmpty, DegenerateDistribution, EvalReport,
                   LoggedDataset, NoAcceptedRecords)
from .replay import _check_uniform, replay_evaluate


@dataclass(frozen=True)
class BredConfig:
    """Knobs for one bootstrapped evaluation.

    ``h`` is the jitter bandwidth: None picks 50/sqrt(T) for the dataset
    at hand, 0 disables jittering.  ``expansion_factor`` defaults to the
    dataset's K.
    """

    b: int = 30
    h: float | None = None
    expansion_factor: int | None = None
    level: float = 0.95

    def __post_init__(self):
        if self.b < 1:
            raise ValueError("b must be >= 1")
        if self.h is not None and self.h < 0:
            raise ValueError("h must be >= 0")
        if self.expansion_factor is not None and self.expansion_factor < 1:
            raise ValueError("expansion_factor must be >= 1")
        if not 0.0 < self.level < 1.0:
            raise ValueError("level must be in (0, 1)")


@dataclass(frozen=True)
class StandardizedCdf:
    """Right-continuous empirical CDF of the standardized replicate payoffs.

    The stored values are (g_b - mean) / s with s the replicate sample
    standard deviation, i.e. the sqrt(T)-standardized bootstrap values:
    they have mean 0 and sample standard deviation 1 by construction.
    """

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.sort(np.asarray(self.values, dtype=np.float64)))

    def __call__(self, x: float) -> float:
        return float(np.searchsorted(self.values, x, side="right") / len(self.values))

    def quantile(self, p: float) -> float:
        """Smallest stored value z with CDF(z) >= p."""
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must be in [0, 1]")
        idx = max(math.ceil(p * len(self.values)), 1) - 1
        return float(self.values[idx])


def bootstrap_resample(dataset: LoggedDataset, size: int,
                       rng: np.random.Generator) -> LoggedDataset:
    """``size`` records drawn i.i.d. uniformly with replacement.

    Pool annotations do not survive resampling (the draw breaks the
    contiguous-pool structure they describe).
    """
    if size < 1:
        raise ValueError("size must be >= 1")
    idx = rng.integers(0, len(dataset), size=size)
    return LoggedDataset(dataset.contexts[idx], dataset.actions[idx],
                         dataset.rewards[idx], d=dataset.d, k=dataset.k,
                         logging=dataset.logging)


def jitter(context: np.ndarray, h: float, rng: np.random.Generator) -> np.ndarray:
    """Context plus independent Normal(0, h^2) noise per coordinate."""
    if h < 0:
        raise ValueError("h must be >= 0")
    context = np.asarray(context, dtype=np.float64)
    if h == 0.0:
        return context.copy()
    return context + h * rng.standard_normal(context.shape)


def default_bandwidth(t: int) -> float:
    """Jitter bandwidth heuristic 50/sqrt(T); vanishes as the log grows."""
    if t < 1:
        raise ValueError("t must be >= 1")
    return 50.0 / math.sqrt(t)


def _region(g_hat: float, cdf: StandardizedCdf, spread: float, level: float,
            ) -> tuple[float, float, float]:
    """Basic bootstrap region from standardized quantiles.

    ``spread`` is the replicate standard deviation already rescaled to
    the estimator's sampling scale.  Clamped to bracket the point
    estimate, which matters only for extreme levels on tiny, skewed
    replicate sets.
    """
    alpha = 1.0 - level
    lo = g_hat - cdf.quantile(1.0 - alpha / 2.0) * spread
    hi = g_hat - cdf.quantile(alpha / 2.0) * spread
    return min(lo, g_hat), max(hi, g_hat), level


def confidence_region(report: EvalReport, level: float) -> tuple[float, float]:
    """(lo, hi) region for the payoff mean at the given level.

    Requires a non-degenerate report (>= 2 included replicates with
    spread); raises `DegenerateDistribution` otherwise.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    if report.cdf is None or report.sigma_hat == 0.0 or len(report.replicate_estimates) < 2:
        raise DegenerateDistribution(
            "confidence region undefined: replicate estimates have no spread")
    spread = (report.sigma_hat / math.sqrt(report.dataset_size)
              * math.sqrt(report.expansion_factor))
    lo, hi, _ = _region(report.g_hat, report.cdf, spread, level)
    return lo, hi


def bred_evaluate(algo, dataset: LoggedDataset, config: BredConfig | None,
                  rng: np.random.Generator, *, threads: int = 1,
                  force: bool = False) -> EvalReport:
    """Bootstrapped replay over B replicates; returns the full report.

    Per replicate, with its own child streams: resample to
    expansion_factor*T records, jitter each drawn context independently
    (fresh noise even for repeats of one original record), replay a
    fresh learner, and record its payoff and accepted count.  Replicates
    that accept nothing are excluded from the aggregate but counted.
    """
    config = BredConfig() if config is None else config
    _check_uniform(dataset, force)
    t = len(dataset)
    expansion = config.expansion_factor if config.expansion_factor is not None else dataset.k
    size = expansion * t
    h = config.h if config.h is not None else default_bandwidth(t)
    apply_jitter = h > 0.0 and _engine.wants_contexts(algo)
    streams = rng.spawn(config.b)

    def one(rep_rng: np.random.Generator) -> tuple[int, float | None]:
        resample_rng, jitter_rng, pass_rng = rep_rng.spawn(3)
        replicate = bootstrap_resample(dataset, size, resample_rng)
        if apply_jitter:
            replicate.contexts += h * jitter_rng.standard_normal(replicate.contexts.shape)
        try:
            result = replay_evaluate(algo, replicate, pass_rng, force=force)
        except NoAcceptedRecords:
            return 0, None
        return result.accepted, result.g_hat

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one, streams))
    else:
        outcomes = [one(s) for s in streams]

    accepted_counts = np.array([c for c, _ in outcomes], dtype=np.int64)
    estimates = np.array([g for _, g in outcomes if g is not None])
    excluded = config.b - len(estimates)
    if len(estimates) == 0:
        raise AllReplicatesEmpty(f"all {config.b} replicates accepted zero records")

    g_hat = float(estimates.mean())
    if len(estimates) >= 2:
        residuals = estimates - estimates.mean()
        residuals -= residuals.mean()  # second pass kills rounding in the mean
        s = float(np.sqrt(residuals @ residuals / (len(estimates) - 1)))
    else:
        s = 0.0
    sigma_hat = math.sqrt(t) * s
    cdf = StandardizedCdf(residuals / s) if s > 0.0 else None
    region = None
    if cdf is not None:
        region = _region(g_hat, cdf, s * math.sqrt(expansion), config.level)
    return EvalReport(
        g_hat=g_hat,
        replicate_estimates=estimates,
        accepted_counts=accepted_counts,
        sigma_hat=sigma_hat,
        confidence_region=region,
        excluded_replicates=excluded,
        dataset_size=t,
        expansion_factor=expansion,
        cdf=cdf)
