"""Linear-softmax predictor: math oracles, training, checkpoints, remote protocol."""

import http.server
import json
import math
import threading

import numpy as np
import pytest

from lfba.dataset import Dataset, SampleRecord
from lfba.predictor import (
    Prediction,
    PredictorModel,
    RemotePredictorError,
    TrainConfig,
    load_model,
    loss_and_gradient,
    predict,
    predict_batch,
    remote_predict,
    save_model,
    softmax,
    train,
    zero_model,
)


def random_model(rng, n=4, d=8):
    k = 1 << n
    return PredictorModel(weights=rng.normal(0, 1, (k, d)), bias=rng.normal(0, 1, k), n=n)


def toy_dataset(features, labels, n=4):
    records = []
    for i, (f, y) in enumerate(zip(features, labels)):
        records.append(
            SampleRecord(
                features=np.asarray(f, dtype=np.float64),
                label=int(y),
                label_bits=format(int(y), f"0{n}b"),
                run=1 + i % 2,
                timestamp=float(i),
                source="synthetic",
            )
        )
    return Dataset(n=n, d=len(features[0]), records=records)


def test_zero_model_predicts_uniform():
    model = zero_model(4, 64)
    pred = predict(model, np.full(64, 0.5))
    assert np.allclose(pred.probs, 1 / 16)
    assert pred.argmax.value == 0  # lowest index wins the 16-way tie


def test_predict_validates_input():
    model = zero_model(4, 8)
    with pytest.raises(ValueError):
        predict(model, np.zeros(7))
    with pytest.raises(ValueError):
        predict(model, np.array([np.inf] + [0.0] * 7))


def test_prediction_invariants_over_random_models():
    rng = np.random.default_rng(0)
    for _ in range(50):
        model = random_model(rng)
        pred = predict(model, rng.random(8))
        assert abs(pred.probs.sum() - 1.0) <= 1e-9
        assert np.all(pred.probs >= 0)
        assert pred.argmax.value == int(np.argmax(pred.probs))


def test_softmax_translation_invariance():
    rng = np.random.default_rng(1)
    logits = rng.normal(0, 3, 16)
    assert np.max(np.abs(softmax(logits + 123.456) - softmax(logits))) <= 1e-12


def test_predict_batch_matches_predict():
    rng = np.random.default_rng(2)
    model = random_model(rng)
    feats = rng.random((5, 8))
    batch = predict_batch(model, feats)
    for i in range(5):
        assert np.allclose(batch[i], predict(model, feats[i]).probs, atol=1e-12)


def test_loss_at_zero_model_is_log_k():
    model = zero_model(4, 8)
    loss, _, _ = loss_and_gradient(model, np.zeros((1, 8)), np.array([5]))
    assert abs(loss - math.log(16)) <= 1e-12


def test_zero_model_gradient_closed_form():
    # At uniform probabilities: bias gradient = probs - onehot, weight
    # gradient row k = (probs_k - 1{k=t}) * features.
    model = zero_model(4, 3)
    f = np.array([[0.2, 0.5, 0.9]])
    t = 6
    _, grad_w, grad_b = loss_and_gradient(model, f, np.array([t]))
    probs = np.full(16, 1 / 16)
    expect_b = probs.copy()
    expect_b[t] -= 1.0
    assert np.allclose(grad_b, expect_b, atol=1e-12)
    assert np.allclose(grad_w, np.outer(expect_b, f[0]), atol=1e-12)


def test_gradient_matches_finite_differences():
    # Central-difference oracle over every parameter, 10 random draws.
    rng = np.random.default_rng(7)
    step = 1e-5
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(2, 5))
        d = int(rng.integers(2, 7))
        k = 1 << n
        model = random_model(rng, n=n, d=d)
        feats = rng.random((int(rng.integers(1, 8)), d))
        labels = rng.integers(0, k, feats.shape[0])
        _, grad_w, grad_b = loss_and_gradient(model, feats, labels)

        def loss_at(w, b):
            m = PredictorModel(weights=w, bias=b, n=n)
            value, _, _ = loss_and_gradient(m, feats, labels)
            return value

        numeric_w = np.zeros_like(grad_w)
        for i in range(k):
            for j in range(d):
                up = model.weights.copy()
                down = model.weights.copy()
                up[i, j] += step
                down[i, j] -= step
                numeric_w[i, j] = (loss_at(up, model.bias) - loss_at(down, model.bias)) / (2 * step)
        numeric_b = np.zeros_like(grad_b)
        for i in range(k):
            up = model.bias.copy()
            down = model.bias.copy()
            up[i] += step
            down[i] -= step
            numeric_b[i] = (loss_at(model.weights, up) - loss_at(model.weights, down)) / (2 * step)

        scale = max(1e-8, float(np.max(np.abs(numeric_w))), float(np.max(np.abs(numeric_b))))
        worst = max(
            worst,
            float(np.max(np.abs(grad_w - numeric_w))) / scale,
            float(np.max(np.abs(grad_b - numeric_b))) / scale,
        )
    assert worst < 1e-4


def test_loss_and_gradient_rejects_empty_batch():
    with pytest.raises(ValueError):
        loss_and_gradient(zero_model(2, 2), np.zeros((0, 2)), np.array([], dtype=int))


def test_train_separates_linearly_separable_toy_set():
    # Two clusters around (0,0.2) and (0.9,0.8): margin comfortably above
    # the jitter, so a linear model must reach training accuracy 1.0.
    rng = np.random.default_rng(3)
    feats, labels = [], []
    for _ in range(50):
        feats.append([rng.uniform(0.0, 0.2), rng.uniform(0.0, 0.4)])
        labels.append(0)
    for _ in range(50):
        feats.append([rng.uniform(0.8, 1.0), rng.uniform(0.6, 1.0)])
        labels.append(1)
    data = toy_dataset(feats, labels, n=1)
    config = TrainConfig(learning_rate=0.05, epochs=60, seed=0)
    model, trace = train(data, config)
    preds = predict_batch(model, data.feature_matrix()).argmax(axis=1)
    assert np.array_equal(preds, data.label_array())
    assert len(trace) == config.epochs


def test_train_is_deterministic(default_dataset):
    config = TrainConfig(epochs=3)
    a, trace_a = train(default_dataset, config)
    b, trace_b = train(default_dataset, config)
    assert np.array_equal(a.weights, b.weights)
    assert np.array_equal(a.bias, b.bias)
    assert trace_a == trace_b
    c, _ = train(default_dataset, TrainConfig(epochs=3, seed=1))
    assert not np.array_equal(a.weights, c.weights)


def test_loss_trace_decreases_early(default_dataset):
    _, trace = train(default_dataset, TrainConfig())
    assert len(trace) == 25
    for i in range(4):
        assert trace[i + 1] < trace[i]


def test_train_validates_dataset():
    with pytest.raises(ValueError):
        train(Dataset(n=4, d=4), TrainConfig())


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        TrainConfig(momentum=1.0)
    with pytest.raises(ValueError):
        TrainConfig(batch_size=0)
    with pytest.raises(ValueError):
        TrainConfig(epochs=0)


def test_checkpoint_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(5)
    model = random_model(rng, n=3, d=5)
    path = str(tmp_path / "model.ckpt")
    save_model(model, path)
    back = load_model(path)
    assert back.n == model.n
    assert np.array_equal(back.weights, model.weights)
    assert np.array_equal(back.bias, model.bias)
    # Saving the loaded model reproduces the identical file.
    path2 = str(tmp_path / "model2.ckpt")
    save_model(back, path2)
    assert open(path, "rb").read() == open(path2, "rb").read()


def test_checkpoint_rejects_corrupt_files(tmp_path):
    path = tmp_path / "bad.ckpt"
    path.write_bytes(b"NOPE" + bytes(16))
    with pytest.raises(ValueError):
        load_model(str(path))
    good = tmp_path / "good.ckpt"
    save_model(zero_model(2, 3), str(good))
    truncated = good.read_bytes()[:-8]
    path.write_bytes(truncated)
    with pytest.raises(ValueError):
        load_model(str(path))


class _StubPredictor(http.server.BaseHTTPRequestHandler):
    """Scriptable remote endpoint: behavior keyed by the request path."""

    def log_message(self, fmt, *args):
        pass

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        k = 1 << body["n"]
        if self.path == "/uniform":
            probs = [1.0 / k] * k
        elif self.path == "/halfsum":
            probs = [0.5 / k] * k
        elif self.path == "/short":
            probs = [1.0]
        else:
            self.send_error(404)
            return
        payload = json.dumps({"probs": probs}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)


@pytest.fixture()
def stub_server():
    server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), _StubPredictor)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()
    thread.join()


def test_remote_predict_uniform_stub(stub_server):
    pred = remote_predict(stub_server + "/uniform", np.full(64, 0.5), n=4)
    assert isinstance(pred, Prediction)
    assert np.allclose(pred.probs, 1 / 16)


def test_remote_predict_rejects_bad_distributions(stub_server):
    with pytest.raises(RemotePredictorError):
        remote_predict(stub_server + "/halfsum", np.full(64, 0.5), n=4)
    with pytest.raises(RemotePredictorError):
        remote_predict(stub_server + "/short", np.full(64, 0.5), n=4)


def test_remote_predict_unreachable_endpoint():
    with pytest.raises(RemotePredictorError):
        remote_predict("http://127.0.0.1:9/nothing", np.full(64, 0.5), n=4, timeout=0.3)
