"""The classical replay estimator: rejection-based offline evaluation.

Records are scanned in logged order.  At each record the learner picks
an action for the logged context; on a match the reward is revealed to
the learner and counted, otherwise the record is discarded.  On
uniformly-logged data this evaluates the learner as if it had played
live, but with only ~T/K effective steps.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _engine
from .core import (AllPermutationsEmpty, LoggedDataset, NoAcceptedRecords,
                   NonUniformLogging)


@dataclass(frozen=True)
class ReplayResult:
    """Outcome of one replay pass.

    ``g_hat * accepted`` equals ``reward_sum``, the integer sum of
    accepted rewards.  ``accepted_indices`` is filled only when the pass
    was run with ``trace=True``.
    """

    g_hat: float
    accepted: int
    total: int
    reward_sum: int
    accepted_indices: np.ndarray | None = None


def _check_uniform(dataset: LoggedDataset, force: bool) -> None:
    if dataset.logging != "uniform" and not force:
        raise NonUniformLogging(
            f"dataset logging tag is {dataset.logging!r}; replay assumes uniform "
            "logging (pass force=True to override)")


def replay_evaluate(algo, dataset: LoggedDataset, rng: np.random.Generator, *,
                    force: bool = False, trace: bool = False) -> ReplayResult:
    """Replay a learner over the dataset; returns the accepted-mean payoff.

    ``algo`` is an `AlgorithmSpec` or a factory ``(k, d, rng) ->
    BanditAlgorithm``.  The learner's state evolves only on accepted
    records.  Raises `NoAcceptedRecords` when nothing matched and
    `NonUniformLogging` for non-uniform data unless ``force``.
    """
    _check_uniform(dataset, force)
    (policy_rng,) = rng.spawn(1)
    contexts = dataset.contexts if _engine.wants_contexts(algo) else None
    reward_sum, accepted, mask = _engine.run_pass(
        algo, contexts, dataset.actions, dataset.rewards, None,
        dataset.k, dataset.d, policy_rng)
    if accepted == 0:
        raise NoAcceptedRecords(f"all {len(dataset)} records were rejected")
    return ReplayResult(
        g_hat=reward_sum / accepted,
        accepted=accepted,
        total=len(dataset),
        reward_sum=reward_sum,
        accepted_indices=np.flatnonzero(mask) if trace else None)


def expected_acceptance(t: int, k: int) -> float:
    """Expected number of accepted records under uniform logging: T/K."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return t / k


def permutation_ground_truth(dataset: LoggedDataset, algo,
                             n_perm: int, rng: np.random.Generator, *,
                             force: bool = False) -> tuple[float, float]:
    """Replay on n_perm random orderings of the data; (mean, std error).

    Permutations where every record is rejected are skipped but counted;
    raises `AllPermutationsEmpty` if none survive.
    """
    if n_perm < 1:
        raise ValueError("n_perm must be >= 1")
    _check_uniform(dataset, force)
    estimates = []
    for perm_rng in rng.spawn(n_perm):
        shuffle_rng, replay_rng = perm_rng.spawn(2)
        order = shuffle_rng.permutation(len(dataset))
        try:
            result = replay_evaluate(algo, dataset.take(order), replay_rng, force=force)
        except NoAcceptedRecords:
            continue
        estimates.append(result.g_hat)
    if not estimates:
        raise AllPermutationsEmpty(f"all {n_perm} permutations accepted zero records")
    estimates = np.asarray(estimates)
    std_err = float(estimates.std(ddof=1) / np.sqrt(len(estimates))) if len(estimates) > 1 else 0.0
    return float(estimates.mean()), std_err


def subsample(dataset: LoggedDataset, n: int, rng: np.random.Generator) -> LoggedDataset:
    """n records drawn without replacement, relative order preserved."""
    if not 1 <= n <= len(dataset):
        raise ValueError(f"n must be in [1, {len(dataset)}], got {n}")
    keep = np.sort(rng.choice(len(dataset), size=n, replace=False))
    return dataset.take(keep)
