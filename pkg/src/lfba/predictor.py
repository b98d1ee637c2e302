"""Linear-softmax controller brain.

Maps frame features to a distribution over the 2^n control classes.  Trained
from scratch with mini-batch SGD plus momentum on mean cross-entropy; weights
start at zero, so for a fixed seed the whole fit is reproducible.  Heavier
external models attach through the wire protocol client at the bottom.
"""

from __future__ import annotations

import json
import struct
import urllib.error
import urllib.request
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from . import rng
from .codec import ClassLabel
from .dataset import Dataset

CHECKPOINT_MAGIC = b"LFBA"
CHECKPOINT_VERSION = 1

DEFAULT_TIMEOUT = 2.0
PROB_SUM_TOLERANCE = 1e-6


@dataclass
class PredictorModel:
    """K x d weight matrix and K bias vector over 2^n classes."""

    weights: np.ndarray
    bias: np.ndarray
    n: int

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        k = 1 << self.n
        if self.weights.ndim != 2 or self.weights.shape[0] != k:
            raise ValueError(f"weights must be {k} x d, got {self.weights.shape}")
        if self.bias.shape != (k,):
            raise ValueError(f"bias must have length {k}, got {self.bias.shape}")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ValueError("model parameters must be finite")

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    momentum: float = 0.9
    batch_size: int = 10
    epochs: int = 25
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not (0.0 <= self.momentum < 1.0):
            raise ValueError("momentum must be in [0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass(frozen=True)
class Prediction:
    """Class probabilities plus the deterministic argmax (lowest index wins ties)."""

    probs: np.ndarray
    argmax: ClassLabel


def zero_model(n: int, feature_dim: int) -> PredictorModel:
    k = 1 << n
    return PredictorModel(weights=np.zeros((k, feature_dim)), bias=np.zeros(k), n=n)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax along the last axis."""
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def predict(model: PredictorModel, features: np.ndarray) -> Prediction:
    """Probabilities and argmax class for one feature vector."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape != (model.feature_dim,):
        raise ValueError(f"expected {model.feature_dim} features, got shape {features.shape}")
    if not np.all(np.isfinite(features)):
        raise ValueError("features must be finite")
    probs = softmax(model.weights @ features + model.bias)
    return Prediction(probs=probs, argmax=ClassLabel(value=int(np.argmax(probs)), n=model.n))


def predict_batch(model: PredictorModel, features: np.ndarray) -> np.ndarray:
    """Probabilities for a batch of feature rows, shape (B, K)."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if features.shape[1] != model.feature_dim:
        raise ValueError(f"expected {model.feature_dim} features, got {features.shape[1]}")
    return softmax(features @ model.weights.T + model.bias)


def loss_and_gradient(
    model: PredictorModel, features: np.ndarray, labels: np.ndarray
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy over the batch and its gradients w.r.t. weights and bias."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    labels = np.atleast_1d(np.asarray(labels, dtype=np.int64))
    if features.shape[0] == 0:
        raise ValueError("batch must be non-empty")
    if features.shape[0] != labels.shape[0]:
        raise ValueError("features and labels disagree in batch size")
    if np.any(labels < 0) or np.any(labels >= model.num_classes):
        raise ValueError("label out of range")
    batch = features.shape[0]
    probs = softmax(features @ model.weights.T + model.bias)
    picked = probs[np.arange(batch), labels]
    loss = float(-np.mean(np.log(picked)))
    delta = probs.copy()
    delta[np.arange(batch), labels] -= 1.0
    delta /= batch
    grad_w = delta.T @ features
    grad_b = delta.sum(axis=0)
    return loss, grad_w, grad_b


def train(dataset: Dataset, config: TrainConfig = TrainConfig()) -> Tuple[PredictorModel, List[float]]:
    """Fit a model to the dataset; returns it with the per-epoch mean loss trace.

    Zero-initialized, shuffled each epoch with a seeded Fisher-Yates, momentum
    SGD (velocity = m*v + g, params -= lr*v).  The final partial batch is kept
    and averaged over its true size.  No data augmentation of any kind.
    """
    if len(dataset) == 0:
        raise ValueError("cannot train on an empty dataset")
    features = dataset.feature_matrix()
    labels = dataset.label_array()
    model = zero_model(dataset.n, dataset.d)
    vel_w = np.zeros_like(model.weights)
    vel_b = np.zeros_like(model.bias)
    trace: List[float] = []
    total = len(dataset)
    for epoch in range(config.epochs):
        order = rng.shuffled(range(total), rng.derive_seed(config.seed, epoch))
        epoch_loss = 0.0
        for start in range(0, total, config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, grad_w, grad_b = loss_and_gradient(model, features[idx], labels[idx])
            vel_w = config.momentum * vel_w + grad_w
            vel_b = config.momentum * vel_b + grad_b
            model.weights -= config.learning_rate * vel_w
            model.bias -= config.learning_rate * vel_b
            epoch_loss += loss * len(idx)
        trace.append(epoch_loss / total)
    return model, trace


def save_model(model: PredictorModel, path: str) -> None:
    """Little-endian checkpoint: magic, version, n, d, K, f64 weights row-major, f64 bias."""
    header = CHECKPOINT_MAGIC + struct.pack(
        "<IIII", CHECKPOINT_VERSION, model.n, model.feature_dim, model.num_classes
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(model.weights, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.bias, dtype="<f8").tobytes())


def load_model(path: str) -> PredictorModel:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != CHECKPOINT_MAGIC:
        raise ValueError("not a model checkpoint (bad magic)")
    version, n, d, k = struct.unpack_from("<IIII", data, 4)
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    if k != (1 << n):
        raise ValueError(f"checkpoint class count {k} != 2^{n}")
    offset = 4 + 16
    expected = offset + 8 * (k * d + k)
    if len(data) != expected:
        raise ValueError(f"checkpoint size {len(data)} != expected {expected}")
    weights = np.frombuffer(data, dtype="<f8", count=k * d, offset=offset).reshape(k, d)
    bias = np.frombuffer(data, dtype="<f8", count=k, offset=offset + 8 * k * d)
    return PredictorModel(weights=weights.copy(), bias=bias.copy(), n=n)


class RemotePredictorError(RuntimeError):
    """Endpoint unreachable, timed out, or returned an invalid distribution."""


def remote_predict(
    endpoint: str,
    features: np.ndarray,
    n: int,
    timeout: float = DEFAULT_TIMEOUT,
) -> Prediction:
    """Ask an external model over HTTP: POST {features, n}, expect {probs}."""
    payload = json.dumps({"features": [float(v) for v in features], "n": n}).encode("utf-8")
    request = urllib.request.Request(
        endpoint, data=payload, headers={"Content-Type": "application/json"}, method="POST"
    )
    try:
        with urllib.request.urlopen(request, timeout=timeout) as response:
            body = response.read()
    except (urllib.error.URLError, OSError, TimeoutError) as exc:
        raise RemotePredictorError(f"predictor endpoint failed: {exc}") from exc
    try:
        obj = json.loads(body)
        probs = np.asarray(obj["probs"], dtype=np.float64)
    except (ValueError, KeyError, TypeError) as exc:
        raise RemotePredictorError(f"malformed predictor response: {exc}") from exc
    k = 1 << n
    if probs.shape != (k,):
        raise RemotePredictorError(f"expected {k} probabilities, got shape {probs.shape}")
    if not np.all(np.isfinite(probs)) or np.any(probs < 0):
        raise RemotePredictorError("probabilities must be finite and non-negative")
    if abs(float(probs.sum()) - 1.0) > PROB_SUM_TOLERANCE:
        raise RemotePredictorError(f"probabilities sum to {probs.sum():.9f}, not 1")
    return Prediction(probs=probs, argmax=ClassLabel(value=int(np.argmax(probs)), n=n))
