"""Bandit learners: UCB, disjoint LinUCB, fixed policies, uniform random.

Every randomized built-in consumes exactly one uniform draw per
``choose`` call (used for tie-breaking or action sampling).  That fixed
consumption pattern is what lets the compiled evaluation kernels in
`_kernels` replay the same stream and reproduce the exact trajectory of
the pure-Python implementations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Mapping

import numpy as np

from .core import BanditAlgorithm, restart_stream

# Refresh the incrementally-maintained inverse from the exact design
# matrix every this many rank-one updates per arm.
LINUCB_REFRESH_EVERY = 256
# A = ridge*I + sum(x x^T) is SPD with min eigenvalue >= ridge and max
# eigenvalue <= trace(A), so trace(A)/ridge bounds the condition number.
LINUCB_COND_LIMIT = 1e12


def _pick(ties: np.ndarray, u: float) -> int:
    """Uniform choice among tied indices from one unit draw."""
    return int(ties[int(u * len(ties))])


class UcbPolicy(BanditAlgorithm):
    """UCB1 with a multiplicative exploration coefficient.

    Score of a pulled arm: mean reward + alpha * sqrt(2 ln t / n_a) with
    t the number of learned steps.  Unpulled arms are chosen first.  The
    context is ignored.
    """

    def __init__(self, k: int, alpha: float = 1.0, rng: np.random.Generator | None = None):
        if k < 1:
            raise ValueError("k must be >= 1")
        if alpha <= 0:
            raise ValueError("alpha must be > 0")
        self.k = int(k)
        self.alpha = float(alpha)
        rng = np.random.default_rng() if rng is None else rng
        self._seed = rng.bit_generator.seed_seq
        self._rng = rng
        self.counts = np.zeros(self.k, dtype=np.int64)
        self.sums = np.zeros(self.k, dtype=np.float64)
        self.steps = 0

    def choose(self, context: np.ndarray) -> int:
        u = self._rng.random()
        unpulled = np.flatnonzero(self.counts == 0)
        if len(unpulled):
            return _pick(unpulled, u)
        n = self.counts.astype(np.float64)
        scores = self.sums / n + self.alpha * np.sqrt(2.0 * math.log(self.steps) / n)
        ties = np.flatnonzero(scores == scores.max())
        return _pick(ties, u)

    def learn(self, context: np.ndarray, action: int, reward: int) -> None:
        self.counts[action] += 1
        self.sums[action] += reward
        self.steps += 1

    def fresh(self) -> "UcbPolicy":
        return UcbPolicy(self.k, self.alpha, rng=restart_stream(self._seed))


class LinUcbPolicy(BanditAlgorithm):
    """Disjoint LinUCB with per-arm ridge regression.

    Maintains A_a = ridge*I + sum(x x^T) and b_a = sum(r x) for each arm;
    theta_a = A_a^-1 b_a; score = theta_a.x + alpha * sqrt(x A_a^-1 x).
    The inverse is kept up to date with Sherman-Morrison rank-one updates
    and recomputed from A_a on a fixed cadence (and whenever the cheap
    trace/ridge condition bound degrades) to stop numerical drift.
    """

    def __init__(self, k: int, d: int, alpha: float = 1.0, ridge: float = 1.0,
                 rng: np.random.Generator | None = None):
        if k < 1 or d < 1:
            raise ValueError("k and d must be >= 1")
        if alpha < 0:
            raise ValueError("alpha must be >= 0")
        if ridge <= 0:
            raise ValueError("ridge must be > 0")
        self.k = int(k)
        self.d = int(d)
        self.alpha = float(alpha)
        self.ridge = float(ridge)
        rng = np.random.default_rng() if rng is None else rng
        self._seed = rng.bit_generator.seed_seq
        self._rng = rng
        eye = np.eye(self.d)
        self.design = np.stack([self.ridge * eye] * self.k)
        self.design_inv = np.stack([eye / self.ridge] * self.k)
        self.response = np.zeros((self.k, self.d))
        self.theta = np.zeros((self.k, self.d))
        self._updates = np.zeros(self.k, dtype=np.int64)

    def _score(self, context: np.ndarray) -> np.ndarray:
        scores = np.empty(self.k)
        for a in range(self.k):
            ax = self.design_inv[a] @ context
            width = context @ ax
            if width < 0.0:
                width = 0.0
            scores[a] = self.theta[a] @ context + self.alpha * math.sqrt(width)
        return scores

    def choose(self, context: np.ndarray) -> int:
        u = self._rng.random()
        scores = self._score(context)
        ties = np.flatnonzero(scores == scores.max())
        return _pick(ties, u)

    def learn(self, context: np.ndarray, action: int, reward: int) -> None:
        a = int(action)
        x = context
        self.design[a] += np.outer(x, x)
        self.response[a] += reward * x
        ax = self.design_inv[a] @ x
        self.design_inv[a] -= np.outer(ax, ax) / (1.0 + x @ ax)
        self._updates[a] += 1
        if (self._updates[a] % LINUCB_REFRESH_EVERY == 0
                or np.trace(self.design[a]) / self.ridge > LINUCB_COND_LIMIT):
            self.design_inv[a] = np.linalg.inv(self.design[a])
        self.theta[a] = self.design_inv[a] @ self.response[a]

    def fresh(self) -> "LinUcbPolicy":
        return LinUcbPolicy(self.k, self.d, self.alpha, self.ridge,
                            rng=restart_stream(self._seed))


class FixedPolicy(BanditAlgorithm):
    """A static policy: ``learn`` is a no-op, ``choose`` is deterministic.

    ``rule`` is either a constant action id or a callable mapping a
    context vector to an action id.
    """

    def __init__(self, k: int, rule: int | Callable[[np.ndarray], int]):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = int(k)
        self.rule = rule
        if isinstance(rule, (int, np.integer)) and not 0 <= int(rule) < k:
            raise ValueError(f"constant action {rule} outside [0, {k})")

    def choose(self, context: np.ndarray) -> int:
        if callable(self.rule):
            return int(self.rule(context))
        return int(self.rule)

    def learn(self, context: np.ndarray, action: int, reward: int) -> None:
        pass

    def fresh(self) -> "FixedPolicy":
        return FixedPolicy(self.k, self.rule)


class RandomPolicy(BanditAlgorithm):
    """Uniform-random action choice; ``learn`` is a no-op."""

    def __init__(self, k: int, rng: np.random.Generator | None = None):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = int(k)
        rng = np.random.default_rng() if rng is None else rng
        self._seed = rng.bit_generator.seed_seq
        self._rng = rng

    def choose(self, context: np.ndarray) -> int:
        return int(self._rng.random() * self.k)

    def learn(self, context: np.ndarray, action: int, reward: int) -> None:
        pass

    def fresh(self) -> "RandomPolicy":
        return RandomPolicy(self.k, rng=restart_stream(self._seed))


def fixed_policy(rule: int | Callable[[np.ndarray], int], k: int = 1) -> FixedPolicy:
    """Static policy from a constant action or a context->action rule."""
    return FixedPolicy(k, rule)


def random_policy(rng: np.random.Generator, k: int) -> RandomPolicy:
    return RandomPolicy(k, rng=rng)


_ALGO_PARAMS: dict[str, tuple[str, ...]] = {
    "ucb": ("alpha",),
    "linucb": ("alpha", "ridge"),
    "random": (),
    "fixed": ("action",),
}


@dataclass(frozen=True)
class AlgorithmSpec:
    """Named learner configuration; the factory used by all evaluators.

    ``build(k, d, rng)`` constructs a fresh learner owning the given
    stream.  Specs for the built-in names also carry enough information
    for the evaluators to run the compiled fast path instead of the
    per-record Python loop; ``rule`` holds an opaque context->action
    callable for non-constant fixed policies (Python path only).
    """

    name: str
    params: Mapping[str, float]
    rule: Callable[[np.ndarray], int] | None = None

    def build(self, k: int, d: int, rng: np.random.Generator) -> BanditAlgorithm:
        p = self.params
        if self.name == "ucb":
            return UcbPolicy(k, alpha=p.get("alpha", 1.0), rng=rng)
        if self.name == "linucb":
            return LinUcbPolicy(k, d, alpha=p.get("alpha", 1.0),
                                ridge=p.get("ridge", 1.0), rng=rng)
        if self.name == "random":
            return RandomPolicy(k, rng=rng)
        if self.name == "fixed":
            return FixedPolicy(k, self.rule if self.rule is not None else int(p["action"]))
        raise ValueError(f"unknown algorithm {self.name!r}")

    @property
    def uses_context(self) -> bool:
        """Whether choices can depend on the context vector."""
        return self.name == "linucb" or (self.name == "fixed" and self.rule is not None)

    @property
    def uses_rng(self) -> bool:
        return self.name != "fixed"


def make_algorithm(name: str, rule: Callable[[np.ndarray], int] | None = None,
                   **params: float) -> AlgorithmSpec:
    """Validated spec for one of the built-in learners."""
    name = name.lower()
    if name not in _ALGO_PARAMS:
        raise ValueError(f"unknown algorithm {name!r}; expected one of {sorted(_ALGO_PARAMS)}")
    if name == "fixed" and rule is not None:
        return AlgorithmSpec(name, MappingProxyType({}), rule=rule)
    allowed = _ALGO_PARAMS[name]
    extra = set(params) - set(allowed)
    if extra:
        raise ValueError(f"{name} does not accept parameters {sorted(extra)}")
    if name == "fixed" and "action" not in params:
        raise ValueError("fixed policy needs action=<id> or a rule callable")
    return AlgorithmSpec(name, MappingProxyType({k: float(v) for k, v in params.items()}))


def parse_algorithm(tokens: list[str]) -> AlgorithmSpec:
    """Parse CLI tokens like ``["linucb", "alpha=1", "ridge=1"]``."""
    if not tokens:
        raise ValueError("empty algorithm specification")
    params = {}
    for tok in tokens[1:]:
        if "=" not in tok:
            raise ValueError(f"algorithm parameter {tok!r} is not key=value")
        key, _, value = tok.partition("=")
        try:
            params[key] = float(value)
        except ValueError:
            raise ValueError(f"algorithm parameter {tok!r} has a non-numeric value") from None
    return make_algorithm(tokens[0], **params)
