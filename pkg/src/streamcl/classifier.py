"""Linear softmax classifier trained with plain mini-batch SGD.

The model is a weight matrix W (classes x features) plus a bias vector.
The loss is the sum (not mean) of per-example cross-entropies, so
gradient magnitudes scale with batch size. ``train_epochs`` accepts a
per-batch gradient hook, which is how gradient-projection strategies
intercept updates without owning the training loop.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

Gradient = tuple[np.ndarray, np.ndarray]
GradientHook = Callable[["LinearModel", np.ndarray, np.ndarray], Gradient]


@dataclass
class LinearModel:
    weights: np.ndarray  # (num_classes, dimension)
    bias: np.ndarray  # (num_classes,)

    @classmethod
    def zeros(cls, num_classes: int, dimension: int) -> "LinearModel":
        if num_classes < 1 or dimension < 1:
            raise ValueError("num_classes and dimension must be positive")
        return cls(
            weights=np.zeros((num_classes, dimension), dtype=np.float64),
            bias=np.zeros(num_classes, dtype=np.float64),
        )

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def dimension(self) -> int:
        return self.weights.shape[1]

    def copy(self) -> "LinearModel":
        return LinearModel(self.weights.copy(), self.bias.copy())


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    batch_size: int = 4
    max_epochs: int = 10
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0.0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {self.max_epochs}")


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def _logits(model: LinearModel, features: np.ndarray) -> np.ndarray:
    return features @ model.weights.T + model.bias


def predict_proba(model: LinearModel, features: np.ndarray) -> np.ndarray:
    """Class probabilities for one feature vector (max-subtracted softmax)."""
    return _softmax(_logits(model, features))


def predict(model: LinearModel, features: np.ndarray) -> int:
    """Argmax class; ties resolve to the lowest class index."""
    return int(np.argmax(_logits(model, features)))


def predict_many(model: LinearModel, features: np.ndarray) -> np.ndarray:
    """Argmax classes for an (n, d) feature matrix, same tie-break as ``predict``."""
    return np.argmax(_logits(model, features), axis=1)


def _check_batch(features: np.ndarray, labels: np.ndarray) -> None:
    if features.shape[0] == 0:
        raise ValueError("empty batch")
    if features.shape[0] != labels.shape[0]:
        raise ValueError(
            f"batch size mismatch: {features.shape[0]} feature rows, {labels.shape[0]} labels"
        )


def loss(model: LinearModel, features: np.ndarray, labels: np.ndarray) -> float:
    """Summed cross-entropy of the batch: -sum_i log p(y_i | x_i)."""
    _check_batch(features, labels)
    log_probs = _log_softmax(_logits(model, features))
    return float(-log_probs[np.arange(labels.shape[0]), labels].sum())


def gradient(model: LinearModel, features: np.ndarray, labels: np.ndarray) -> Gradient:
    """Exact gradient of ``loss``: dW = sum_i (p_i - onehot(y_i)) x_i^T, db likewise."""
    _check_batch(features, labels)
    probs = _softmax(_logits(model, features))
    probs[np.arange(labels.shape[0]), labels] -= 1.0
    return probs.T @ features, probs.sum(axis=0)


def sgd_step(model: LinearModel, grad: Gradient, learning_rate: float) -> LinearModel:
    """One descent step; rejects non-finite gradients instead of corrupting the model."""
    grad_w, grad_b = grad
    if not (np.isfinite(grad_w).all() and np.isfinite(grad_b).all()):
        raise ValueError("non-finite gradient entries")
    return LinearModel(
        weights=model.weights - learning_rate * grad_w,
        bias=model.bias - learning_rate * grad_b,
    )


def train_epochs(
    model: LinearModel,
    features: np.ndarray,
    labels: np.ndarray,
    config: TrainConfig,
    hook: Optional[GradientHook] = None,
    rng: Optional[np.random.Generator] = None,
) -> LinearModel:
    """Mini-batch SGD for ``config.max_epochs`` epochs over a fresh shuffle each epoch.

    The dataset order is drawn from ``rng`` (seeded from ``config.rng_seed``
    when not supplied), so identical seeds and inputs reproduce the final
    model bitwise. The last batch of an epoch may be smaller than
    ``batch_size``. When ``hook`` is given, every batch gradient passes
    through it before the SGD step.
    """
    _check_batch(features, labels)
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    count = features.shape[0]
    for _ in range(config.max_epochs):
        order = rng.permutation(count)
        for start in range(0, count, config.batch_size):
            batch = order[start : start + config.batch_size]
            grad_w, grad_b = gradient(model, features[batch], labels[batch])
            if hook is not None:
                grad_w, grad_b = hook(model, grad_w, grad_b)
            model = sgd_step(model, (grad_w, grad_b), config.learning_rate)
    return model


def save_model(model: LinearModel, path: str | Path) -> None:
    """Checkpoint to an .npz archive with ``weights`` and ``bias`` arrays."""
    np.savez(path, weights=model.weights, bias=model.bias)


def load_model(path: str | Path) -> LinearModel:
    with np.load(path) as archive:
        return LinearModel(
            weights=np.array(archive["weights"], dtype=np.float64),
            bias=np.array(archive["bias"], dtype=np.float64),
        )
