"""Estimator-error sweeps over dataset sizes and seeds.

For every (size, seed) cell a fresh log is generated from the model and
each method estimates the learner's payoff; the error is measured
against the direct-play ground truth for that size.  All streams are
derived from the master generator in a fixed order before any work is
dispatched, so the emitted CSVs are byte-identical for any thread count.

The two BRED variants (with and without jitter) deliberately share the
same per-cell stream: they then see identical resamples and learner
tie-breaks and differ only in the jitter noise, which makes the jitter
ablation a paired comparison.
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .algorithms import AlgorithmSpec
from .bred import BredConfig, bred_evaluate
from .core import BanditEvalError, restart_stream
from .replay import replay_evaluate
from .synthetic import SyntheticModel, ground_truth_ctr, simulate_log

METHODS = ("replay", "bred", "bred_nojitter")

LONG_COLUMNS = ("method", "T", "seed", "estimate", "truth", "abs_error",
                "accepted", "status")
AGG_COLUMNS = ("method", "T", "mean_abs_error", "std_err")


@dataclass(frozen=True)
class SweepSpec:
    """One error-vs-size experiment definition."""

    sizes: tuple[int, ...]
    seeds: int
    methods: tuple[str, ...]
    algo: AlgorithmSpec
    b: int = 30
    h: float | None = None  # None: 50/sqrt(T) per size; used by the 'bred' method
    truth_runs: int = 50
    level: float = 0.95

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(t) for t in self.sizes))
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.sizes or any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError("sizes must be non-empty and strictly increasing")
        if self.seeds < 1:
            raise ValueError("seeds must be >= 1")
        unknown = set(self.methods) - set(METHODS)
        if not self.methods or unknown:
            raise ValueError(f"methods must be a non-empty subset of {METHODS}")


def _clone(rng: np.random.Generator) -> np.random.Generator:
    """A generator restarted from the same seed material (clean spawn state)."""
    return restart_stream(rng.bit_generator.seed_seq)


def run_error_sweep(model: SyntheticModel, spec: SweepSpec,
                    rng: np.random.Generator, *, threads: int = 1
                    ) -> tuple[list[dict], list[dict]]:
    """Run the sweep; returns (long rows, aggregated rows).

    Long rows carry one estimate per (method, size, seed) with the
    recomputable absolute error and the accepted-record count (for BRED,
    the mean accepted count per included replicate).  Evaluator failures
    mark the cell's status and are left out of the aggregate.
    """
    truth_streams = rng.spawn(len(spec.sizes))
    cell_streams = [rng.spawn(spec.seeds) for _ in spec.sizes]

    def truth_task(i: int) -> float:
        mean, _ = ground_truth_ctr(model, spec.algo, spec.sizes[i],
                                   spec.truth_runs, truth_streams[i])
        return mean

    def cell_task(i: int, j: int) -> dict[str, tuple]:
        t = spec.sizes[i]
        log_rng, replay_rng, bred_rng = cell_streams[i][j].spawn(3)
        dataset = simulate_log(model, t, log_rng)
        out = {}
        for method in spec.methods:
            try:
                if method == "replay":
                    result = replay_evaluate(spec.algo, dataset, replay_rng)
                    out[method] = ("ok", result.g_hat, float(result.accepted))
                else:
                    h = 0.0 if method == "bred_nojitter" else spec.h
                    config = BredConfig(b=spec.b, h=h, level=spec.level)
                    report = bred_evaluate(spec.algo, dataset, config, _clone(bred_rng))
                    included = report.accepted_counts[report.accepted_counts > 0]
                    out[method] = ("ok", report.g_hat, float(included.mean()))
            except BanditEvalError as exc:
                out[method] = (type(exc).__name__, None, None)
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            truth_futs = [pool.submit(truth_task, i) for i in range(len(spec.sizes))]
            cell_futs = {(i, j): pool.submit(cell_task, i, j)
                         for i in range(len(spec.sizes)) for j in range(spec.seeds)}
            truths = [f.result() for f in truth_futs]
            cells = {key: f.result() for key, f in cell_futs.items()}
    else:
        truths = [truth_task(i) for i in range(len(spec.sizes))]
        cells = {(i, j): cell_task(i, j)
                 for i in range(len(spec.sizes)) for j in range(spec.seeds)}

    long_rows = []
    for method in spec.methods:
        for i, t in enumerate(spec.sizes):
            for j in range(spec.seeds):
                status, estimate, accepted = cells[(i, j)][method]
                row = {"method": method, "T": t, "seed": j, "estimate": estimate,
                       "truth": truths[i], "abs_error": None, "accepted": accepted,
                       "status": status}
                if estimate is not None:
                    row["abs_error"] = abs(estimate - truths[i])
                long_rows.append(row)

    agg_rows = []
    for method in spec.methods:
        for i, t in enumerate(spec.sizes):
            errors = np.array([r["abs_error"] for r in long_rows
                               if r["method"] == method and r["T"] == t
                               and r["status"] == "ok"])
            if len(errors) == 0:
                continue
            std_err = float(errors.std(ddof=1) / np.sqrt(len(errors))) if len(errors) > 1 else 0.0
            agg_rows.append({"method": method, "T": t,
                             "mean_abs_error": float(errors.mean()),
                             "std_err": std_err})
    return long_rows, agg_rows


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(rows: list[dict], columns: tuple[str, ...], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format(row.get(c)) for c in columns])
