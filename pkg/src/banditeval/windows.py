"""Windowed evaluation over streams with a changing action pool.

Real recommendation logs are only piecewise-static: the available items
change over time.  The stream is cut into maximal runs with a constant
action pool; within each window the world is treated as static, a
ground truth is estimated by replaying on many permutations of the full
window, and the estimators are then run on a subsample of T_i/K_i
records to fake the time acceleration they would face on real data.
"""
from __future__ import annotations

import logging as _logging
from dataclasses import dataclass

import numpy as np

from .bred import BredConfig, bred_evaluate
from .core import AllReplicatesEmpty, LoggedDataset, NoAcceptedRecords
from .replay import (AllPermutationsEmpty, permutation_ground_truth,
                     replay_evaluate, subsample)
from .synthetic import DEFAULT_M, N_ACTIONS, SyntheticModel, generate_model, simulate_log

log = _logging.getLogger(__name__)


@dataclass(frozen=True)
class Window:
    """Half-open record range [start, end) sharing one action pool."""

    start: int
    end: int
    pool: frozenset[int]

    @property
    def t_i(self) -> int:
        return self.end - self.start

    @property
    def k_i(self) -> int:
        return len(self.pool)


def partition_by_action_pool(dataset: LoggedDataset) -> list[Window]:
    """Maximal constant-pool runs; their concatenation is the stream.

    A dataset without pool annotations is one window over the full pool.
    """
    if dataset.pools is None:
        return [Window(0, len(dataset), frozenset(range(dataset.k)))]
    windows = []
    start = 0
    current = dataset.pools[0]
    for i in range(1, len(dataset)):
        if dataset.pools[i] != current:
            windows.append(Window(start, i, current))
            start, current = i, dataset.pools[i]
    windows.append(Window(start, len(dataset), current))
    return windows


def window_dataset(dataset: LoggedDataset, window: Window) -> LoggedDataset:
    """Self-contained dataset for one window, actions remapped to [0, K_i)."""
    sl = slice(window.start, window.end)
    pool = np.array(sorted(window.pool), dtype=np.int64)
    remap = np.full(dataset.k, -1, dtype=np.int64)
    remap[pool] = np.arange(len(pool))
    return LoggedDataset(dataset.contexts[sl], remap[dataset.actions[sl]],
                         dataset.rewards[sl], d=dataset.d, k=len(pool),
                         logging=dataset.logging)


def run_windowed_experiment(dataset: LoggedDataset, algo,
                            rng: np.random.Generator, *, n_perm: int = 100,
                            config: BredConfig | None = None) -> list[dict]:
    """Per-window ground truth vs. estimators on a T_i/K_i subsample.

    Returns one row dict per window: (window, t_i, k_i, truth,
    replay_est, bred_est, bred_lo, bred_hi, status).  Windows shorter
    than their pool size, or where an estimator accepts nothing, are
    skipped with a log entry and a non-"ok" status.
    """
    windows = partition_by_action_pool(dataset)
    streams = rng.spawn(len(windows))
    rows = []
    for idx, (window, win_rng) in enumerate(zip(windows, streams)):
        row = {"window": idx, "t_i": window.t_i, "k_i": window.k_i,
               "truth": None, "replay_est": None, "bred_est": None,
               "bred_lo": None, "bred_hi": None, "status": "ok"}
        if window.t_i < window.k_i:
            log.warning("window %d skipped: T_i=%d < K_i=%d", idx, window.t_i, window.k_i)
            row["status"] = "skipped_small"
            rows.append(row)
            continue
        truth_rng, sub_rng, replay_rng, bred_rng = win_rng.spawn(4)
        wds = window_dataset(dataset, window)
        try:
            truth, _ = permutation_ground_truth(wds, algo, n_perm, truth_rng)
            row["truth"] = truth
            sub = subsample(wds, window.t_i // window.k_i, sub_rng)
            row["replay_est"] = replay_evaluate(algo, sub, replay_rng).g_hat
            report = bred_evaluate(algo, sub, config, bred_rng)
            row["bred_est"] = report.g_hat
            if report.confidence_region is not None:
                row["bred_lo"], row["bred_hi"] = report.confidence_region[:2]
        except (NoAcceptedRecords, AllPermutationsEmpty, AllReplicatesEmpty) as exc:
            log.warning("window %d skipped: %s", idx, exc)
            row["status"] = f"skipped_{type(exc).__name__}"
        rows.append(row)
    return rows


def make_multipool_dataset(rng: np.random.Generator, segments: int,
                           segment_len: int, pool_size: int, m: int = DEFAULT_M,
                           ) -> tuple[LoggedDataset, list[SyntheticModel]]:
    """Synthetic multi-window stream: fresh model and pool per segment.

    Adjacent segments always get different pools so the partition has
    exactly ``segments`` windows.
    """
    if not 1 <= pool_size <= N_ACTIONS:
        raise ValueError(f"pool_size must be in [1, {N_ACTIONS}]")
    if segments < 1 or segment_len < 1:
        raise ValueError("segments and segment_len must be >= 1")
    if segments > 1 and pool_size == N_ACTIONS:
        raise ValueError("pool_size must be < K for pools to change between segments")
    parts = []
    models = []
    previous: frozenset[int] | None = None
    for seg_rng in rng.spawn(segments):
        model_rng, pool_rng, log_rng = seg_rng.spawn(3)
        model = generate_model(model_rng, m)
        while True:
            pool = frozenset(int(a) for a in pool_rng.choice(N_ACTIONS, pool_size, replace=False))
            if pool != previous:
                break
        previous = pool
        parts.append(simulate_log(model, segment_len, log_rng, pool=tuple(pool)))
        models.append(model)
    first = parts[0]
    combined = LoggedDataset(
        np.vstack([p.contexts for p in parts]),
        np.concatenate([p.actions for p in parts]),
        np.concatenate([p.rewards for p in parts]),
        d=first.d, k=first.k, logging="uniform",
        pools=tuple(pool for p in parts for pool in p.pools))
    return combined, models
