import time

import numpy as np
import pytest

from jobrec import evalharness, seqnet, synthgen
from jobrec.featurize import build_featurizer
from jobrec.seqnet import TrainConfig

# Small-scale corpus settings used by the heavier end-to-end tests.  The
# feature space and network are kept narrow so the full train/eval cycle
# stays well under the acceptance runtime budget.
SMALL_SEED = 0
SPLIT_SEED = 123
SMALL_TRAIN = TrainConfig(epochs=8, batch_size=128, hidden1=32, hidden2=16,
                          patience=3, seed=0)


@pytest.fixture(scope="session")
def small_corpus():
    return synthgen.generate(synthgen.GeneratorConfig.small(seed=SMALL_SEED))


@pytest.fixture(scope="session")
def small_featurizer(small_corpus):
    dataset, _ = small_corpus
    return build_featurizer(dataset, embed_dim=16, competency_k=8,
                            hash_width=8, seed=SMALL_SEED)


@pytest.fixture(scope="session")
def small_examples(small_corpus, small_featurizer):
    dataset, _ = small_corpus
    return seqnet.build_sequence_examples(dataset, small_featurizer)


@pytest.fixture(scope="session")
def small_split(small_examples):
    labels = np.array([e.label for e in small_examples], dtype=np.float64)
    rng = np.random.default_rng(SPLIT_SEED)
    train_idx, test_idx = seqnet._stratified_split(labels, 0.15, rng)
    train = [small_examples[i] for i in train_idx]
    test = [small_examples[i] for i in test_idx]
    return train, test


@pytest.fixture(scope="session")
def trained_models(small_split):
    """Both classifiers trained on the shared split, with wall time."""
    train, test = small_split
    start = time.perf_counter()
    params, history = seqnet.train(train, SMALL_TRAIN)
    ff_params, ff_history = evalharness.train_feedforward_baseline(
        train, SMALL_TRAIN)
    elapsed = time.perf_counter() - start
    return {
        "bilstm": params,
        "bilstm_history": history,
        "feedforward": ff_params,
        "feedforward_history": ff_history,
        "train_seconds": elapsed,
    }
