"""Compiled single-pass evaluation loops for the built-in learners.

Each kernel runs one full replay (or direct-play) pass: it scans records
in order, lets the learner pick an action, and on a match reveals the
record to the learner and accumulates the reward.  ``use_table`` flips
the pass into direct play: every step is accepted and the reward comes
from a precomputed per-action reward table instead of the logged action.

The kernels mirror the Python policy classes in `algorithms` exactly:
same score formulas, same tie-breaking from the same single uniform draw
per step (supplied in ``noise``, pre-drawn from the policy stream).  A
genuine score tie is an exact floating-point equality in both
implementations, so trajectories agree bit for bit.
"""
from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]

from .algorithms import LINUCB_COND_LIMIT, LINUCB_REFRESH_EVERY

_EMPTY_TABLE = np.zeros((1, 1), dtype=np.int64)


@njit(cache=True, nogil=True)
def _ucb_pass(actions, rewards, table, use_table, noise, k, alpha):
    n_steps = table.shape[0] if use_table else actions.shape[0]
    counts = np.zeros(k, dtype=np.int64)
    sums = np.zeros(k, dtype=np.float64)
    steps = 0
    reward_sum = 0
    accepted = 0
    mask = np.zeros(n_steps, dtype=np.uint8)
    scores = np.empty(k, dtype=np.float64)
    for i in range(n_steps):
        u = noise[i]
        n_unpulled = 0
        for a in range(k):
            if counts[a] == 0:
                n_unpulled += 1
        if n_unpulled > 0:
            pick = int(u * n_unpulled)
            seen = 0
            chosen = 0
            for a in range(k):
                if counts[a] == 0:
                    if seen == pick:
                        chosen = a
                        break
                    seen += 1
        else:
            bonus_base = 2.0 * np.log(np.float64(steps))
            best = -np.inf
            for a in range(k):
                na = np.float64(counts[a])
                scores[a] = sums[a] / na + alpha * np.sqrt(bonus_base / na)
                if scores[a] > best:
                    best = scores[a]
            n_ties = 0
            for a in range(k):
                if scores[a] == best:
                    n_ties += 1
            pick = int(u * n_ties)
            seen = 0
            chosen = 0
            for a in range(k):
                if scores[a] == best:
                    if seen == pick:
                        chosen = a
                        break
                    seen += 1
        if use_table:
            r = table[i, chosen]
        elif chosen == actions[i]:
            r = rewards[i]
        else:
            continue
        counts[chosen] += 1
        sums[chosen] += r
        steps += 1
        reward_sum += r
        accepted += 1
        mask[i] = 1
    return reward_sum, accepted, mask


@njit(cache=True, nogil=True)
def _linucb_pass(contexts, actions, rewards, table, use_table, noise, k, alpha, ridge):
    n_steps = contexts.shape[0]
    d = contexts.shape[1]
    design = np.zeros((k, d, d))
    design_inv = np.zeros((k, d, d))
    for a in range(k):
        for i in range(d):
            design[a, i, i] = ridge
            design_inv[a, i, i] = 1.0 / ridge
    response = np.zeros((k, d))
    theta = np.zeros((k, d))
    updates = np.zeros(k, dtype=np.int64)
    scores = np.empty(k, dtype=np.float64)
    ax = np.empty(d, dtype=np.float64)
    reward_sum = 0
    accepted = 0
    mask = np.zeros(n_steps, dtype=np.uint8)
    for t in range(n_steps):
        x = contexts[t]
        best = -np.inf
        for a in range(k):
            value = 0.0
            width = 0.0
            for i in range(d):
                acc = 0.0
                for j in range(d):
                    acc += design_inv[a, i, j] * x[j]
                width += x[i] * acc
                value += theta[a, i] * x[i]
            if width < 0.0:
                width = 0.0
            scores[a] = value + alpha * np.sqrt(width)
            if scores[a] > best:
                best = scores[a]
        n_ties = 0
        for a in range(k):
            if scores[a] == best:
                n_ties += 1
        pick = int(noise[t] * n_ties)
        seen = 0
        chosen = 0
        for a in range(k):
            if scores[a] == best:
                if seen == pick:
                    chosen = a
                    break
                seen += 1
        if use_table:
            r = np.float64(table[t, chosen])
        elif chosen == actions[t]:
            r = np.float64(rewards[t])
        else:
            continue
        for i in range(d):
            for j in range(d):
                design[chosen, i, j] += x[i] * x[j]
            response[chosen, i] += r * x[i]
        denom = 1.0
        for i in range(d):
            acc = 0.0
            for j in range(d):
                acc += design_inv[chosen, i, j] * x[j]
            ax[i] = acc
            denom += x[i] * acc
        for i in range(d):
            for j in range(d):
                design_inv[chosen, i, j] -= ax[i] * ax[j] / denom
        updates[chosen] += 1
        trace = 0.0
        for i in range(d):
            trace += design[chosen, i, i]
        if updates[chosen] % LINUCB_REFRESH_EVERY == 0 or trace / ridge > LINUCB_COND_LIMIT:
            design_inv[chosen] = np.linalg.inv(design[chosen])
        for i in range(d):
            acc = 0.0
            for j in range(d):
                acc += design_inv[chosen, i, j] * response[chosen, j]
            theta[chosen, i] = acc
        reward_sum += np.int64(r)
        accepted += 1
        mask[t] = 1
    return reward_sum, accepted, mask


@njit(cache=True, nogil=True)
def _random_pass(actions, rewards, table, use_table, noise, k):
    n_steps = table.shape[0] if use_table else actions.shape[0]
    reward_sum = 0
    accepted = 0
    mask = np.zeros(n_steps, dtype=np.uint8)
    for i in range(n_steps):
        chosen = int(noise[i] * k)
        if use_table:
            r = table[i, chosen]
        elif chosen == actions[i]:
            r = rewards[i]
        else:
            continue
        reward_sum += r
        accepted += 1
        mask[i] = 1
    return reward_sum, accepted, mask


@njit(cache=True, nogil=True)
def _fixed_pass(actions, rewards, table, use_table, action):
    n_steps = table.shape[0] if use_table else actions.shape[0]
    reward_sum = 0
    accepted = 0
    mask = np.zeros(n_steps, dtype=np.uint8)
    for i in range(n_steps):
        if use_table:
            r = table[i, action]
        elif action == actions[i]:
            r = rewards[i]
        else:
            continue
        reward_sum += r
        accepted += 1
        mask[i] = 1
    return reward_sum, accepted, mask


def kernel_available(name: str, rule) -> bool:
    """Whether a compiled pass exists for this learner configuration."""
    return HAVE_NUMBA and rule is None and name in ("ucb", "linucb", "random", "fixed")


def run_kernel_pass(name, params, contexts, actions, rewards, table,
                    policy_rng) -> tuple[int, int, np.ndarray]:
    """One compiled evaluation pass; returns (reward_sum, accepted, mask).

    ``table`` switches to direct play when not None.  ``contexts`` may be
    None for context-blind learners.  The policy stream is materialized
    as one uniform per step, matching the Python policies' consumption.
    """
    use_table = table is not None
    if use_table:
        table = np.ascontiguousarray(table, dtype=np.int64)
        n_steps = table.shape[0]
        actions = np.zeros(n_steps, dtype=np.int64)
        rewards = np.zeros(n_steps, dtype=np.int64)
    else:
        table = _EMPTY_TABLE
        actions = np.ascontiguousarray(actions, dtype=np.int64)
        rewards = np.ascontiguousarray(rewards, dtype=np.int64)
        n_steps = actions.shape[0]
    if name == "fixed":
        g, t_acc, mask = _fixed_pass(actions, rewards, table, use_table,
                                     int(params["action"]))
        return int(g), int(t_acc), mask
    noise = policy_rng.random(n_steps)
    if name == "ucb":
        g, t_acc, mask = _ucb_pass(actions, rewards, table, use_table, noise,
                                   int(params["k"]), float(params.get("alpha", 1.0)))
    elif name == "linucb":
        contexts = np.ascontiguousarray(contexts, dtype=np.float64)
        g, t_acc, mask = _linucb_pass(contexts, actions, rewards, table, use_table, noise,
                                      int(params["k"]), float(params.get("alpha", 1.0)),
                                      float(params.get("ridge", 1.0)))
    elif name == "random":
        g, t_acc, mask = _random_pass(actions, rewards, table, use_table, noise,
                                      int(params["k"]))
    else:
        raise ValueError(f"no kernel for algorithm {name!r}")
    return int(g), int(t_acc), mask
