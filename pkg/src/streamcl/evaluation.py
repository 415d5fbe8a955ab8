"""Accuracy bookkeeping over a domain stream.

``ResultMatrix`` holds the T x T accuracy grid: row i is written after
training on the i-th domain and scores every domain's test set, trained
or not. Summary metrics follow from the grid: final average accuracy
(mean of the last row), backward transfer (how much the final model lost
or gained on each domain relative to right after training it), and the
per-step timeline (mean accuracy over domains seen so far).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from streamcl.classifier import LinearModel, predict_many


@dataclass
class ResultMatrix:
    domain_order: list[str]
    values: np.ndarray = field(init=False)
    rows_written: int = field(init=False, default=0)

    def __post_init__(self) -> None:
        if not self.domain_order:
            raise ValueError("domain_order must not be empty")
        if len(set(self.domain_order)) != len(self.domain_order):
            raise ValueError("domain_order contains duplicate tags")
        size = len(self.domain_order)
        self.values = np.full((size, size), np.nan, dtype=np.float64)

    @property
    def num_domains(self) -> int:
        return len(self.domain_order)

    @property
    def complete(self) -> bool:
        return self.rows_written == self.num_domains

    def write_row(self, accuracies: np.ndarray) -> None:
        """Record the next row; each row is written exactly once, in order."""
        if self.complete:
            raise ValueError("all rows are already written")
        row = np.asarray(accuracies, dtype=np.float64)
        if row.shape != (self.num_domains,):
            raise ValueError(f"row must have shape ({self.num_domains},), got {row.shape}")
        if np.any((row < 0.0) | (row > 1.0)) or not np.isfinite(row).all():
            raise ValueError("accuracies must lie in [0, 1]")
        self.values[self.rows_written] = row
        self.rows_written += 1


def evaluate_row(
    model: LinearModel, test_sets: list[tuple[np.ndarray, np.ndarray]]
) -> np.ndarray:
    """Accuracy of ``model`` on every test set, in stream order. Pure: no mutation."""
    accuracies = np.zeros(len(test_sets), dtype=np.float64)
    for j, (features, labels) in enumerate(test_sets):
        if labels.shape[0] == 0:
            raise ValueError(f"test set {j} is empty")
        predictions = predict_many(model, features)
        accuracies[j] = float(np.mean(predictions == labels))
    return accuracies


def _require_complete(result: ResultMatrix) -> None:
    if not result.complete:
        raise ValueError(
            f"result matrix has {result.rows_written}/{result.num_domains} rows written"
        )


def average_accuracy(result: ResultMatrix) -> float:
    """Mean of the final row: how the finished model scores across all domains."""
    _require_complete(result)
    return float(np.mean(result.values[-1]))


def backward_transfer(result: ResultMatrix) -> float:
    """Mean over earlier domains of (final accuracy - accuracy right after training).

    Negative values measure forgetting. Undefined for a single-domain
    stream.
    """
    _require_complete(result)
    size = result.num_domains
    if size < 2:
        raise ValueError("backward transfer is undefined for a single-domain stream")
    diffs = [result.values[-1, i] - result.values[i, i] for i in range(size - 1)]
    return float(np.mean(diffs))


def timeline_accuracy(result: ResultMatrix) -> np.ndarray:
    """Entry t: mean accuracy over the domains seen through step t (uses written rows)."""
    if result.rows_written == 0:
        raise ValueError("no rows written yet")
    return np.array(
        [float(np.mean(result.values[t, : t + 1])) for t in range(result.rows_written)]
    )


def timeline_accuracy_all(result: ResultMatrix) -> np.ndarray:
    """Entry t: mean accuracy over every domain at step t, unseen ones included."""
    if result.rows_written == 0:
        raise ValueError("no rows written yet")
    return np.array([float(np.mean(result.values[t])) for t in range(result.rows_written)])
