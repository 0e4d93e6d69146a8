import numpy as np
import pytest

from config import MODEL_NAMES
from core.baseline import ReplayBuffer, mlp_baseline_train
from core.errors import DimensionError, UsageError
from learners import create_learner, get_learner, list_learners


def test_every_model_is_registered():
    assert sorted(list_learners()) == sorted(MODEL_NAMES)
    assert list_learners()[0] == "cobweb4v"


def test_unknown_model(run_config):
    assert get_learner("perceptron") is None
    with pytest.raises(UsageError, match="unknown model"):
        create_learner("perceptron", 2, 2, run_config, 0)


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_untrained_learners_predict_uniform(name, run_config):
    learner = create_learner(name, 4, 5, run_config, 0)
    np.testing.assert_allclose(learner.predict_proba(np.zeros((3, 4))), np.full((3, 5), 0.2))


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_state_round_trip(name, run_config, small_synth):
    cls = get_learner(name)
    learner = create_learner(name, small_synth.dim, small_synth.n_classes, run_config, 0)
    learner.partial_fit(small_synth.train.features, small_synth.train.labels)
    restored = cls.from_state(learner.state(), run_config, 0)
    np.testing.assert_allclose(
        restored.predict_proba(small_synth.test.features), learner.predict_proba(small_synth.test.features)
    )
    assert restored.summary() == learner.summary()


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_dimension_checked(name, run_config):
    learner = create_learner(name, 4, 2, run_config, 0)
    with pytest.raises(DimensionError):
        learner.partial_fit(np.zeros((2, 3)), np.zeros(2, dtype=int))


def test_replay_buffer_survives_a_checkpoint(run_config, small_synth):
    learner = create_learner("mlp-replay", small_synth.dim, small_synth.n_classes, run_config, 0)
    learner.partial_fit(small_synth.train.features, small_synth.train.labels)
    restored = type(learner).from_state(learner.state(), run_config, 0)
    np.testing.assert_array_equal(restored.buffer.labels, learner.buffer.labels)
    assert len(restored.buffer) == run_config.mlp.replay_capacity


@pytest.mark.parametrize("name", ["mlp", "mlp-replay"])
def test_mlp_learners_follow_the_baseline_training_loop(name, run_config, small_synth):
    halves = np.array_split(np.arange(len(small_synth.train)), 3)
    splits = [(small_synth.train.features[i], small_synth.train.labels[i]) for i in halves]
    learner = create_learner(name, small_synth.dim, small_synth.n_classes, run_config, 4)
    for features, labels in splits:
        learner.partial_fit(features, labels)

    replay = None
    if name == "mlp-replay":
        replay = ReplayBuffer(run_config.mlp.replay_capacity, 4, small_synth.dim)
    curves = mlp_baseline_train(
        splits,
        lambda model: model.predict_proba(small_synth.test.features),
        small_synth.dim,
        small_synth.n_classes,
        run_config.mlp_config(4),
        replay=replay,
    )
    np.testing.assert_array_equal(curves[-1], learner.predict_proba(small_synth.test.features))
