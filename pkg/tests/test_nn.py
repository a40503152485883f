import numpy as np
import pytest

from repmotion.errors import ModelError, ValidationError
from repmotion.nn import MlpModel, TrainConfig, gradient_check, init_model, train


def xor_data(seed=0):
    rng = np.random.default_rng(seed)
    base = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], float)
    x = np.repeat(base, 100, axis=0) + rng.normal(0, 0.05, (400, 2))
    y = np.repeat([0, 1, 1, 0], 100)
    return x, y


@pytest.fixture(scope="module")
def xor_model():
    x, y = xor_data()
    return train(x, y, TrainConfig(hidden=(100,), learning_rate=1e-2, max_epochs=300), "binary"), x, y


def test_xor_training_accuracy(xor_model):
    model, x, y = xor_model
    assert np.mean((model.predict(x) >= 0.5) == y) >= 0.99
    assert model.predict([1.0, 0.0])[0] >= 0.95


def test_linear_regression():
    rng = np.random.default_rng(1)
    x = rng.uniform(-1, 1, (240, 1))
    y = 3 * x[:, 0] + 1
    model = train(x[:200], y[:200], TrainConfig(learning_rate=3e-3, max_epochs=400), "regression")
    assert np.mean((model.predict(x[200:]) - y[200:]) ** 2) <= 1e-2


def test_determinism():
    x, y = xor_data(2)
    cfg = TrainConfig(max_epochs=20, seed=5)
    assert train(x, y, cfg).dumps() == train(x, y, cfg).dumps()


def test_round_trip_is_bit_identical(xor_model):
    model, x, _ = xor_model
    again = MlpModel.loads(model.dumps())
    np.testing.assert_array_equal(again.predict(x), model.predict(x))


def test_zero_weight_binary_is_half():
    m = init_model("binary", [3, 4, 1], np.random.default_rng(0))
    for w in m.weights:
        w[:] = 0
    assert m.predict(np.ones((2, 3))) == pytest.approx([0.5, 0.5])


def test_multiclass_rows_sum_to_one():
    m = init_model("multiclass", [5, 8, 3], np.random.default_rng(0), classes=["a", "b", "c"])
    p = m.predict(np.random.default_rng(1).normal(size=(10, 5)) * 50)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-9)


def test_dimension_mismatch():
    m = init_model("binary", [3, 4, 1], np.random.default_rng(0))
    with pytest.raises(ValidationError):
        m.predict(np.ones((2, 4)))


def test_bad_training_inputs():
    with pytest.raises(ValidationError):
        train(np.ones((10, 2)), np.zeros(10), task="binary")
    with pytest.raises(ValidationError):
        train(np.array([[np.nan, 1.0]] * 4), [0, 1, 0, 1])
    with pytest.raises(ValidationError):
        train(np.ones((4, 2)), ["a"] * 4, task="multiclass")


def test_version_mismatch_rejected(xor_model):
    d = xor_model[0].to_dict()
    d["version"] = 99
    with pytest.raises(ModelError):
        MlpModel.from_dict(d)


@pytest.mark.parametrize("task,sizes", [
    ("binary", [27, 100, 1]),
    ("multiclass", [6, 10, 3]),
    ("regression", [12, 100, 1]),
    ("binary", [4, 6, 5, 1]),
])
def test_gradient_check(task, sizes):
    rng = np.random.default_rng(0)
    m = init_model(task, sizes, rng, classes=range(sizes[-1]) if task == "multiclass" else ())
    for b in m.biases:
        b[:] = rng.normal(0, 0.1, b.shape)
    x = rng.normal(size=(12, sizes[0]))
    y = (np.arange(12) % (sizes[-1] if task == "multiclass" else 2)).astype(float)
    assert gradient_check(m, x, y, alpha=1e-3) <= 1e-4


def test_negative_weight_shifts_bias():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(400, 2))
    y = (x[:, 0] + rng.normal(0, 1.0, 400) > 0).astype(int)
    plain = train(x, y, TrainConfig(max_epochs=60))
    heavy = train(x, y, TrainConfig(max_epochs=60, negative_weight=4.0))
    assert np.mean(heavy.predict(x) >= 0.5) < np.mean(plain.predict(x) >= 0.5)
