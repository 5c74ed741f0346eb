"""Domain types, the learner contract, and the deterministic RNG scheme.

Randomness is organized as a tree of independent streams: a master seed
plus a path of integer ids maps to one `numpy.random.Generator` via
`SeedSequence` spawn keys.  Evaluators derive per-replicate and
per-purpose child streams with ``rng.spawn``, always in a fixed order
decided before any parallel dispatch, so results never depend on thread
count or scheduling.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterator, Sequence

import numpy as np

if TYPE_CHECKING:
    from .bred import StandardizedCdf

LOGGING_TAGS = ("uniform", "unknown")


class BanditEvalError(Exception):
    """Base class for all evaluation errors."""


class NoAcceptedRecords(BanditEvalError):
    """Replay rejected every record; the estimate is undefined."""


class NonUniformLogging(BanditEvalError):
    """The dataset was not logged by the uniform-random policy."""


class AllPermutationsEmpty(BanditEvalError):
    """Every permutation replay ended with zero accepted records."""


class AllReplicatesEmpty(BanditEvalError):
    """Every bootstrap replicate ended with zero accepted records."""


class DegenerateDistribution(BanditEvalError):
    """All replicate estimates coincide; no spread to build a region from."""


class ParseError(BanditEvalError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class DimensionMismatch(BanditEvalError):
    """Record contents disagree with the declared dimensions d, K."""


class SchemaError(BanditEvalError):
    """CSV input does not follow the expected column schema."""


def rng_stream(master_seed: int, *stream_ids: int) -> np.random.Generator:
    """Deterministic generator for (master_seed, stream path).

    Distinct id paths give statistically independent streams; the same
    (seed, ids) always reproduces the same stream.
    """
    key = tuple(int(i) for i in stream_ids)
    return np.random.default_rng(np.random.SeedSequence(int(master_seed), spawn_key=key))


def restart_stream(seed_seq: np.random.SeedSequence) -> np.random.Generator:
    """Fresh generator from the seed material of an existing stream.

    Rebuilds the SeedSequence so the new stream starts with a clean
    spawn counter instead of sharing the original's.
    """
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed_seq.entropy, spawn_key=seed_seq.spawn_key))


@dataclass(frozen=True)
class Record:
    """One logged interaction: context vector, chosen action, binary reward."""

    context: np.ndarray
    action: int
    reward: int


@dataclass
class LoggedDataset:
    """An ordered sequence of records with declared dimensions.

    Stored columnar for speed: ``contexts`` is (T, d) float64, ``actions``
    and ``rewards`` are length-T integer arrays.  ``pools`` optionally
    annotates each record with the action pool that was available when it
    was logged (used by the windowed protocol); ``None`` means the full
    pool [0, K).
    """

    contexts: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    d: int
    k: int
    logging: str = "uniform"
    pools: tuple[frozenset[int], ...] | None = None

    def __post_init__(self):
        self.contexts = np.ascontiguousarray(self.contexts, dtype=np.float64)
        self.actions = np.asarray(self.actions, dtype=np.int64)
        self.rewards = np.asarray(self.rewards, dtype=np.int64)
        self.validate()

    def validate(self) -> None:
        if self.d < 1 or self.k < 1:
            raise DimensionMismatch(f"declared dimensions must be positive, got d={self.d} k={self.k}")
        if self.logging not in LOGGING_TAGS:
            raise DimensionMismatch(f"unknown logging tag {self.logging!r}")
        if self.contexts.ndim != 2 or len(self.contexts) == 0:
            raise DimensionMismatch("dataset must contain at least one record")
        t = len(self.contexts)
        if self.contexts.shape[1] != self.d:
            raise DimensionMismatch(
                f"context length {self.contexts.shape[1]} != declared d={self.d}")
        if self.actions.shape != (t,) or self.rewards.shape != (t,):
            raise DimensionMismatch("actions/rewards length disagrees with contexts")
        if self.actions.min() < 0 or self.actions.max() >= self.k:
            bad = int(np.flatnonzero((self.actions < 0) | (self.actions >= self.k))[0])
            raise DimensionMismatch(
                f"record {bad}: action {self.actions[bad]} outside [0, {self.k})")
        if not np.isin(self.rewards, (0, 1)).all():
            bad = int(np.flatnonzero(~np.isin(self.rewards, (0, 1)))[0])
            raise DimensionMismatch(f"record {bad}: reward {self.rewards[bad]} not in {{0,1}}")
        if self.pools is not None:
            if len(self.pools) != t:
                raise DimensionMismatch("pool annotations length disagrees with records")
            for i, pool in enumerate(self.pools):
                if not pool or min(pool) < 0 or max(pool) >= self.k:
                    raise DimensionMismatch(f"record {i}: pool {sorted(pool)} outside [0, {self.k})")
                if int(self.actions[i]) not in pool:
                    raise DimensionMismatch(
                        f"record {i}: action {self.actions[i]} not in its pool {sorted(pool)}")

    def __len__(self) -> int:
        return len(self.actions)

    def __getitem__(self, i: int) -> Record:
        return Record(self.contexts[i].copy(), int(self.actions[i]), int(self.rewards[i]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, LoggedDataset):
            return NotImplemented
        return (
            self.d == other.d
            and self.k == other.k
            and self.logging == other.logging
            and self.pools == other.pools
            and np.array_equal(self.contexts, other.contexts)
            and np.array_equal(self.actions, other.actions)
            and np.array_equal(self.rewards, other.rewards)
        )

    @property
    def records(self) -> tuple[Record, ...]:
        return tuple(self[i] for i in range(len(self)))

    def iter_records(self) -> Iterator[Record]:
        for i in range(len(self)):
            yield self[i]

    @classmethod
    def from_records(cls, records: Sequence[Record], d: int, k: int,
                     logging: str = "uniform") -> "LoggedDataset":
        contexts = np.stack([r.context for r in records]) if records else np.empty((0, d))
        actions = np.array([r.action for r in records], dtype=np.int64)
        rewards = np.array([r.reward for r in records], dtype=np.int64)
        return cls(contexts, actions, rewards, d=d, k=k, logging=logging)

    def take(self, indices: np.ndarray) -> "LoggedDataset":
        """New dataset holding the given records, in the given order."""
        pools = None
        if self.pools is not None:
            pools = tuple(self.pools[int(i)] for i in indices)
        return LoggedDataset(
            self.contexts[indices], self.actions[indices], self.rewards[indices],
            d=self.d, k=self.k, logging=self.logging, pools=pools)


class BanditAlgorithm:
    """Contract for stateful bandit learners.

    ``choose`` must return an action in [0, K) and may consume the
    instance's own RNG stream; ``learn`` folds one observed interaction
    into the state; ``fresh`` returns a new instance with initial state
    and the same RNG seed material, so two fresh copies fed identical
    interaction sequences produce identical action sequences.
    """

    k: int

    def choose(self, context: np.ndarray) -> int:
        raise NotImplementedError

    def learn(self, context: np.ndarray, action: int, reward: int) -> None:
        raise NotImplementedError

    def fresh(self) -> "BanditAlgorithm":
        raise NotImplementedError


@dataclass(frozen=True)
class EvalReport:
    """Aggregate of one bootstrapped evaluation run.

    ``replicate_estimates`` holds the per-replicate payoffs for replicates
    that accepted at least one record, in replicate order;
    ``accepted_counts`` keeps every replicate's accepted count (zeros mark
    the excluded ones).  ``sigma_hat`` is the unit-horizon standard
    deviation: the sampling spread of the payoff over a fresh horizon-T
    run is ``sigma_hat / sqrt(T)``.
    """

    g_hat: float
    replicate_estimates: np.ndarray
    accepted_counts: np.ndarray
    sigma_hat: float
    confidence_region: tuple[float, float, float] | None
    excluded_replicates: int
    dataset_size: int
    expansion_factor: int
    cdf: "StandardizedCdf | None" = field(repr=False, default=None)

    @property
    def degenerate(self) -> bool:
        """True when every replicate estimate coincides (sigma_hat == 0)."""
        return self.sigma_hat == 0.0
