"""Result matrix bookkeeping and the summary metrics, checked against hand-computed values."""

from __future__ import annotations

import numpy as np
import pytest

from streamcl.classifier import LinearModel
from streamcl.evaluation import (
    ResultMatrix,
    average_accuracy,
    backward_transfer,
    evaluate_row,
    timeline_accuracy,
    timeline_accuracy_all,
)

EXACT = 1e-12


def filled_matrix(rows: list[list[float]], tags: list[str] | None = None) -> ResultMatrix:
    if tags is None:
        tags = [f"d{i}" for i in range(len(rows))]
    result = ResultMatrix(domain_order=tags)
    for row in rows:
        result.write_row(np.array(row))
    return result


# Hand-computed 3x3 fixture: last row mean = 1.9/3, per-domain drops
# (0.6-0.9) and (0.5-0.7) average to -0.25.
FIXTURE = [
    [0.9, 0.2, 0.1],
    [0.7, 0.7, 0.3],
    [0.6, 0.5, 0.8],
]


def test_average_accuracy_matches_hand_computation():
    result = filled_matrix(FIXTURE)
    assert average_accuracy(result) == pytest.approx(1.9 / 3.0, abs=EXACT)


def test_backward_transfer_matches_hand_computation():
    result = filled_matrix(FIXTURE)
    assert backward_transfer(result) == pytest.approx(-0.25, abs=EXACT)


def test_timeline_matches_hand_computation():
    result = filled_matrix(FIXTURE)
    expected = [0.9, (0.7 + 0.7) / 2.0, 1.9 / 3.0]
    np.testing.assert_allclose(timeline_accuracy(result), expected, atol=EXACT, rtol=0.0)


def test_timeline_last_entry_equals_average_accuracy():
    result = filled_matrix(FIXTURE)
    assert timeline_accuracy(result)[-1] == pytest.approx(average_accuracy(result), abs=EXACT)


def test_two_domain_timeline():
    result = filled_matrix([[0.8, 0.4], [0.6, 0.9]])
    np.testing.assert_allclose(timeline_accuracy(result), [0.8, 0.75], atol=EXACT, rtol=0.0)


def test_timeline_all_includes_unseen_domains():
    result = filled_matrix([[0.8, 0.4], [0.6, 0.9]])
    np.testing.assert_allclose(timeline_accuracy_all(result), [0.6, 0.75], atol=EXACT, rtol=0.0)


def test_all_ones_matrix():
    result = filled_matrix([[1.0, 1.0], [1.0, 1.0]])
    assert average_accuracy(result) == 1.0
    assert backward_transfer(result) == 0.0
    np.testing.assert_array_equal(timeline_accuracy(result), [1.0, 1.0])


def test_no_forgetting_gives_zero_bwt():
    rows = [
        [0.7, 0.1, 0.2],
        [0.5, 0.9, 0.1],
        [0.7, 0.9, 0.6],
    ]
    assert backward_transfer(filled_matrix(rows)) == pytest.approx(0.0, abs=EXACT)


def test_improving_past_domains_gives_positive_bwt():
    rows = [
        [0.5, 0.1],
        [0.8, 0.9],
    ]
    assert backward_transfer(filled_matrix(rows)) == pytest.approx(0.3, abs=EXACT)


def test_average_accuracy_ignores_earlier_rows():
    other = [
        [0.1, 0.9, 0.9],
        [0.9, 0.1, 0.9],
        [0.6, 0.5, 0.8],
    ]
    assert average_accuracy(filled_matrix(other)) == pytest.approx(
        average_accuracy(filled_matrix(FIXTURE)), abs=EXACT
    )


def test_metrics_permutation_equivariant():
    # Reordering the earlier stream positions (grid cells following along)
    # preserves both metrics; the final position stays put so the last row
    # keeps pairing with the same diagonal entries.
    rng = np.random.default_rng(7)
    for _ in range(25):
        size = int(rng.integers(2, 6))
        grid = rng.random((size, size))
        perm = np.concatenate([rng.permutation(size - 1), [size - 1]])
        base = filled_matrix([list(row) for row in grid])
        permuted = filled_matrix([list(row) for row in grid[np.ix_(perm, perm)]])
        assert average_accuracy(permuted) == pytest.approx(average_accuracy(base), abs=EXACT)
        assert backward_transfer(permuted) == pytest.approx(
            backward_transfer(base), abs=EXACT
        )


def test_metric_bounds():
    rng = np.random.default_rng(11)
    for _ in range(25):
        size = int(rng.integers(2, 6))
        result = filled_matrix([list(row) for row in rng.random((size, size))])
        assert 0.0 <= average_accuracy(result) <= 1.0
        assert -1.0 <= backward_transfer(result) <= 1.0


def test_single_domain_bwt_is_undefined():
    result = filled_matrix([[0.9]])
    with pytest.raises(ValueError, match="single-domain"):
        backward_transfer(result)


def test_incomplete_matrix_rejected_by_metrics():
    result = ResultMatrix(domain_order=["a", "b"])
    result.write_row(np.array([0.5, 0.5]))
    with pytest.raises(ValueError, match="rows written"):
        average_accuracy(result)
    with pytest.raises(ValueError, match="rows written"):
        backward_transfer(result)


def test_timeline_requires_at_least_one_row():
    result = ResultMatrix(domain_order=["a", "b"])
    with pytest.raises(ValueError, match="no rows"):
        timeline_accuracy(result)


def test_timeline_works_on_partial_matrix():
    result = ResultMatrix(domain_order=["a", "b", "c"])
    result.write_row(np.array([0.8, 0.1, 0.1]))
    np.testing.assert_allclose(timeline_accuracy(result), [0.8], atol=EXACT, rtol=0.0)


def test_write_row_validates_shape_and_range():
    result = ResultMatrix(domain_order=["a", "b"])
    with pytest.raises(ValueError, match="shape"):
        result.write_row(np.array([0.5]))
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        result.write_row(np.array([0.5, 1.5]))
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        result.write_row(np.array([np.nan, 0.5]))


def test_write_row_rejects_extra_rows():
    result = filled_matrix([[0.5, 0.5], [0.5, 0.5]])
    with pytest.raises(ValueError, match="already written"):
        result.write_row(np.array([0.5, 0.5]))


def test_matrix_rejects_bad_domain_orders():
    with pytest.raises(ValueError, match="empty"):
        ResultMatrix(domain_order=[])
    with pytest.raises(ValueError, match="duplicate"):
        ResultMatrix(domain_order=["a", "a"])


def test_evaluate_row_hand_scored_counts():
    # d=3 one-hot features route each example to the class its active
    # column points at, so the confusion counts can be scored by hand.
    model = LinearModel(
        weights=np.array(
            [
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ]
        ),
        bias=np.zeros(3),
    )
    features = np.array(
        [
            [1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0],
        ]
    )
    labels = np.array([0, 1, 1, 2, 0])
    # Predictions: 0, 0, 1, 2, 2 -> correct on examples 0, 2, 3.
    row = evaluate_row(model, [(features, labels)])
    assert row[0] == pytest.approx(3.0 / 5.0, abs=EXACT)


def test_evaluate_row_zero_model_tie_breaks_to_class_zero():
    model = LinearModel.zeros(3, 4)
    features = np.ones((10, 4))
    labels = np.array([0, 0, 0, 0, 1, 1, 1, 2, 2, 2])
    row = evaluate_row(model, [(features, labels)])
    assert row[0] == pytest.approx(0.4, abs=EXACT)


def test_evaluate_row_scores_every_test_set_in_order():
    model = LinearModel.zeros(2, 3)
    set_a = (np.ones((4, 3)), np.array([0, 0, 0, 1]))
    set_b = (np.ones((2, 3)), np.array([1, 1]))
    row = evaluate_row(model, [set_a, set_b])
    np.testing.assert_allclose(row, [0.75, 0.0], atol=EXACT, rtol=0.0)


def test_evaluate_row_rejects_empty_test_set():
    model = LinearModel.zeros(2, 3)
    empty = (np.zeros((0, 3)), np.zeros(0, dtype=np.int64))
    with pytest.raises(ValueError, match="empty"):
        evaluate_row(model, [empty])


def test_evaluate_row_does_not_mutate_model():
    rng = np.random.default_rng(3)
    model = LinearModel(weights=rng.normal(size=(3, 5)), bias=rng.normal(size=3))
    weights_before = model.weights.copy()
    bias_before = model.bias.copy()
    evaluate_row(model, [(rng.normal(size=(6, 5)), rng.integers(0, 3, size=6))])
    np.testing.assert_array_equal(model.weights, weights_before)
    np.testing.assert_array_equal(model.bias, bias_before)
