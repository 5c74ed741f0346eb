"""Synthetic news-click model: ground-truth oracle and log generation.

The world has K=10 news items and 15-dimensional contexts.  A context is
x = c + n where c is the signal the click model actually uses and n is
nuisance noise shown to the learner but ignored by the model.  Four
"universal" items click at a base rate q_i ~ U(0.4, 0.5) regardless of
context; six "specific" items have low base rates q_i ~ U(0.1, 0.2) plus
a sparse linear taste term w_i.c with m relevant weights.

The Gaussian spread parameters are read as variances by default (the
convention is ambiguous in common usage, so the standard deviations are
explicit fields and can be overridden at generation time): signal
variance 1, nuisance variance 1/2, weight variance 1/5.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _engine
from .core import DimensionMismatch, LoggedDataset, ParseError

N_ACTIONS = 10
CONTEXT_DIM = 15
UNIVERSAL_COUNT = 4
SPECIFIC_COUNT = 6
DEFAULT_M = 5
DEFAULT_SIGNAL_SD = 1.0
DEFAULT_NUISANCE_SD = float(np.sqrt(0.5))
DEFAULT_WEIGHT_SD = float(np.sqrt(0.2))


@dataclass(frozen=True)
class SyntheticModel:
    """Linear click model over a fixed action set.

    ``q`` (K,) holds base click rates; ``weights`` (K, d) the taste
    vectors, all-zero for the universal rows.  Click probability of
    action a in signal context c is clamp(q_a + weights_a . c, 0, 1).
    """

    q: np.ndarray
    weights: np.ndarray
    m: int
    signal_sd: float = DEFAULT_SIGNAL_SD
    nuisance_sd: float = DEFAULT_NUISANCE_SD

    def __post_init__(self):
        q = np.asarray(self.q, dtype=np.float64)
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "weights", w)
        if q.shape != (N_ACTIONS,) or w.shape != (N_ACTIONS, CONTEXT_DIM):
            raise DimensionMismatch(
                f"model arrays must be ({N_ACTIONS},) and ({N_ACTIONS},{CONTEXT_DIM})")
        if not 1 <= self.m <= CONTEXT_DIM:
            raise ValueError(f"m must be in [1, {CONTEXT_DIM}]")
        if (w[:UNIVERSAL_COUNT] != 0).any():
            raise ValueError("universal rows must have zero weights")

    @property
    def k(self) -> int:
        return N_ACTIONS

    @property
    def d(self) -> int:
        return CONTEXT_DIM


def generate_model(rng: np.random.Generator, m: int = DEFAULT_M, *,
                   weight_sd: float = DEFAULT_WEIGHT_SD,
                   signal_sd: float = DEFAULT_SIGNAL_SD,
                   nuisance_sd: float = DEFAULT_NUISANCE_SD) -> SyntheticModel:
    """Draw a fresh model: base rates, then sparse taste rows.

    Each specific row gets exactly ``m`` nonzero positions, chosen
    uniformly without replacement, with Normal(0, weight_sd^2) values.
    """
    if not 1 <= m <= CONTEXT_DIM:
        raise ValueError(f"m must be in [1, {CONTEXT_DIM}]")
    q = np.empty(N_ACTIONS)
    q[:UNIVERSAL_COUNT] = rng.uniform(0.4, 0.5, UNIVERSAL_COUNT)
    q[UNIVERSAL_COUNT:] = rng.uniform(0.1, 0.2, SPECIFIC_COUNT)
    weights = np.zeros((N_ACTIONS, CONTEXT_DIM))
    for i in range(UNIVERSAL_COUNT, N_ACTIONS):
        support = rng.choice(CONTEXT_DIM, size=m, replace=False)
        weights[i, support] = rng.normal(0.0, weight_sd, m)
    return SyntheticModel(q, weights, m, signal_sd=signal_sd, nuisance_sd=nuisance_sd)


def draw_context(model: SyntheticModel, rng: np.random.Generator
                 ) -> tuple[np.ndarray, np.ndarray]:
    """One context: returns (x, c) with x = c + nuisance.

    The model's click probabilities depend only on c; learners see x.
    """
    c = model.signal_sd * rng.standard_normal(CONTEXT_DIM)
    n = model.nuisance_sd * rng.standard_normal(CONTEXT_DIM)
    return c + n, c


def click_probability(model: SyntheticModel, action: int, c: np.ndarray) -> float:
    """clamp(q_a + w_a . c, 0, 1); the nuisance part of x plays no role."""
    if not 0 <= action < N_ACTIONS:
        raise DimensionMismatch(f"action {action} outside [0, {N_ACTIONS})")
    return float(np.clip(model.q[action] + model.weights[action] @ c, 0.0, 1.0))


def _draw_world(model: SyntheticModel, t: int, rng: np.random.Generator
                ) -> tuple[np.ndarray, np.ndarray]:
    """Contexts for t steps: (X shown to learners, C used by the model).

    Draw order (signal block, then nuisance block) is part of the
    reproducibility contract.
    """
    c = model.signal_sd * rng.standard_normal((t, CONTEXT_DIM))
    x = c + model.nuisance_sd * rng.standard_normal((t, CONTEXT_DIM))
    return x, c


def simulate_log(model: SyntheticModel, t: int, rng: np.random.Generator, *,
                 pool: tuple[int, ...] | None = None) -> LoggedDataset:
    """Uniform-logging dataset of t records.

    Actions are uniform over the pool (default: all K actions); rewards
    are Bernoulli draws from the model's click probability.  Draw order:
    signal contexts, nuisance, actions, reward uniforms.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    x, c = _draw_world(model, t, rng)
    if pool is None:
        actions = rng.integers(0, N_ACTIONS, size=t)
        pools = None
    else:
        pool_arr = np.array(sorted(pool), dtype=np.int64)
        if len(pool_arr) == 0 or pool_arr.min() < 0 or pool_arr.max() >= N_ACTIONS:
            raise DimensionMismatch(f"pool {sorted(pool)} outside [0, {N_ACTIONS})")
        actions = pool_arr[rng.integers(0, len(pool_arr), size=t)]
        pools = (frozenset(int(a) for a in pool_arr),) * t
    probs = np.clip(model.q[actions] + np.einsum("td,td->t", c, model.weights[actions]),
                    0.0, 1.0)
    rewards = (rng.random(t) < probs).astype(np.int64)
    return LoggedDataset(x, actions, rewards, d=CONTEXT_DIM, k=N_ACTIONS,
                         logging="uniform", pools=pools)


def ground_truth_ctr(model: SyntheticModel, algo, t: int, runs: int,
                     rng: np.random.Generator, *, threads: int = 1
                     ) -> tuple[float, float]:
    """Per-trial payoff of a learner played directly against the model.

    Runs the full bandit loop for t steps (reward revealed every step),
    ``runs`` times with independent streams; returns (mean, standard
    error).  This is the oracle all estimator-error curves are measured
    against.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if t < 1:
        raise ValueError("t must be >= 1")
    streams = rng.spawn(runs)

    def one(run_rng: np.random.Generator) -> float:
        env_rng, policy_rng = run_rng.spawn(2)
        x, c = _draw_world(model, t, env_rng)
        probs = np.clip(model.q[None, :] + c @ model.weights.T, 0.0, 1.0)
        table = (env_rng.random((t, N_ACTIONS)) < probs).astype(np.int64)
        reward_sum, _, _ = _engine.run_pass(
            algo, x, None, None, table, N_ACTIONS, CONTEXT_DIM, policy_rng)
        return reward_sum / t

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool_:
            payoffs = np.array(list(pool_.map(one, streams)))
    else:
        payoffs = np.array([one(s) for s in streams])
    std_err = float(payoffs.std(ddof=1) / np.sqrt(runs)) if runs > 1 else 0.0
    return float(payoffs.mean()), std_err


def save_model(model: SyntheticModel, path: str | Path) -> None:
    lines = [
        f"k={N_ACTIONS} d={CONTEXT_DIM} m={model.m} "
        f"signal_sd={model.signal_sd:.17g} nuisance_sd={model.nuisance_sd:.17g}",
        "q " + " ".join(format(v, ".17g") for v in model.q),
    ]
    for row in model.weights:
        lines.append("w " + " ".join(format(v, ".17g") for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path: str | Path) -> SyntheticModel:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ParseError("empty model file", 1)
    header = dict(item.split("=", 1) for item in lines[0].split())
    try:
        m = int(header["m"])
        signal_sd = float(header["signal_sd"])
        nuisance_sd = float(header["nuisance_sd"])
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad model header: {exc}", 1) from None
    if len(lines) < 2 + N_ACTIONS:
        raise ParseError("model file truncated", len(lines))
    if not lines[1].startswith("q "):
        raise ParseError("expected q line", 2)
    q = np.array([float(v) for v in lines[1].split()[1:]])
    weights = []
    for i in range(N_ACTIONS):
        line = lines[2 + i]
        if not line.startswith("w "):
            raise ParseError("expected w line", 3 + i)
        weights.append([float(v) for v in line.split()[1:]])
    return SyntheticModel(q, np.array(weights), m,
                          signal_sd=signal_sd, nuisance_sd=nuisance_sd)
