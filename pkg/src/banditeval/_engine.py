"""Dispatch between the compiled kernels and the generic Python loop.

Evaluators describe one pass as arrays plus a learner factory.  Built-in
`AlgorithmSpec` learners run on the compiled kernels; anything else (a
plain ``factory(k, d, rng) -> BanditAlgorithm`` callable, or a fixed
policy with an arbitrary rule) falls back to the per-record Python loop
over the `BanditAlgorithm` contract.  Both paths consume the policy
stream identically, so they produce the same trajectory.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from . import _kernels
from .algorithms import AlgorithmSpec
from .core import BanditAlgorithm

AlgoLike = "AlgorithmSpec | Callable[[int, int, np.random.Generator], BanditAlgorithm]"


def build_learner(algo, k: int, d: int, rng: np.random.Generator) -> BanditAlgorithm:
    if isinstance(algo, AlgorithmSpec):
        return algo.build(k, d, rng)
    if callable(algo):
        return algo(k, d, rng)
    raise TypeError(
        "expected an AlgorithmSpec or a factory callable (k, d, rng) -> BanditAlgorithm, "
        f"got {type(algo).__name__}")


def wants_contexts(algo) -> bool:
    """False only when a compiled pass exists that never reads contexts."""
    if isinstance(algo, AlgorithmSpec) and _kernels.kernel_available(algo.name, algo.rule):
        return algo.uses_context
    return True


def run_pass(algo, contexts, actions, rewards, table, k: int, d: int,
             rng: np.random.Generator) -> tuple[int, int, np.ndarray]:
    """One evaluation pass; returns (reward_sum, accepted, accepted mask).

    Replay mode matches the learner's choice against ``actions`` and
    reveals ``rewards`` on acceptance.  When ``table`` (n_steps, K) is
    given the pass is direct play: every step accepted, reward looked up
    for the chosen action.  ``rng`` is the policy stream; the learner
    owns it for the whole pass.
    """
    if isinstance(algo, AlgorithmSpec) and _kernels.kernel_available(algo.name, algo.rule):
        params = dict(algo.params)
        params["k"] = k
        return _kernels.run_kernel_pass(algo.name, params, contexts, actions,
                                        rewards, table, rng)
    learner = build_learner(algo, k, d, rng)
    return python_pass(learner, contexts, actions, rewards, table)


def python_pass(learner: BanditAlgorithm, contexts, actions, rewards,
                table) -> tuple[int, int, np.ndarray]:
    """Reference per-record loop over the `BanditAlgorithm` contract."""
    n_steps = len(contexts)
    mask = np.zeros(n_steps, dtype=np.uint8)
    reward_sum = 0
    accepted = 0
    for i in range(n_steps):
        x = contexts[i]
        chosen = learner.choose(x)
        if table is not None:
            r = int(table[i, chosen])
        elif chosen == actions[i]:
            r = int(rewards[i])
        else:
            continue
        learner.learn(x, chosen, r)
        reward_sum += r
        accepted += 1
        mask[i] = 1
    return reward_sum, accepted, mask
