import numpy as np
import pytest

from banditeval import LoggedDataset, generate_model, rng_stream, simulate_log


def make_dataset(actions, rewards, d=3, k=None, contexts=None, logging="uniform"):
    """Tiny hand-built dataset for edge-case tests."""
    actions = np.asarray(actions, dtype=np.int64)
    rewards = np.asarray(rewards, dtype=np.int64)
    if k is None:
        k = int(actions.max()) + 1
    if contexts is None:
        contexts = np.zeros((len(actions), d))
    return LoggedDataset(np.asarray(contexts, float), actions, rewards,
                         d=d, k=k, logging=logging)


class RecordingPolicy:
    """Wraps a learner and logs every (context, action, reward) it learned."""

    def __init__(self, inner):
        self.inner = inner
        self.k = inner.k
        self.history = []

    def choose(self, context):
        return self.inner.choose(context)

    def learn(self, context, action, reward):
        self.history.append((context.copy(), int(action), int(reward)))
        self.inner.learn(context, action, reward)

    def fresh(self):
        return RecordingPolicy(self.inner.fresh())


@pytest.fixture(scope="session")
def model():
    return generate_model(rng_stream(2024, 0), m=5)


@pytest.fixture(scope="session")
def small_log(model):
    return simulate_log(model, 2000, rng_stream(2024, 1))
