import itertools
import random

import numpy as np
import pytest

from chessrec.board import GridCoord
from chessrec.matching import (
    Assignment,
    MatchWeights,
    match_cost,
    set_loss,
    solve_assignment,
)
from chessrec.targets import (
    EMPTY_CLASS,
    DetectionItem,
    DetectionTargetSet,
    PredictionSet,
    encode_detection,
    perfect_prediction_set,
)

from conftest import random_valid_board


def brute_force_min(cost: np.ndarray) -> float:
    n_rows, n_cols = cost.shape
    best = float("inf")
    for rows in itertools.permutations(range(n_rows), n_cols):
        best = min(best, sum(cost[r, c] for c, r in enumerate(rows)))
    return best


def prediction_with(rows: dict) -> PredictionSet:
    """Background everywhere except explicit rows {index: (class_probs, coord)}."""
    scores = np.zeros((32, 13))
    scores[:, EMPTY_CLASS] = 1.0
    coords = np.zeros((32, 2))
    for row, (probs, coord) in rows.items():
        scores[row] = probs
        coords[row] = coord
    return PredictionSet(scores, coords)


def one_hot(class_id: int) -> np.ndarray:
    probs = np.zeros(13)
    probs[class_id] = 1.0
    return probs


def test_match_cost_perfect_query():
    target = DetectionTargetSet([DetectionItem(4, GridCoord(2, 5))])
    pred = prediction_with({0: (one_hot(4), (2.0, 5.0))})
    cost = match_cost(pred, target)
    assert cost.shape == (32, 1)
    assert cost[0, 0] == pytest.approx(-1.0)  # -class_weight, zero coordinate term


def test_match_cost_max_distance_uniform_scores():
    target = DetectionTargetSet([DetectionItem(0, GridCoord(7, 7))])
    uniform = np.full(13, 1.0 / 13)
    pred = prediction_with({0: (uniform, (0.0, 0.0))})
    weights = MatchWeights(class_weight=1.0, coord_weight=5.0)
    cost = match_cost(pred, target, weights)
    # normalized L1 distance is 1 + 1 = 2
    assert cost[0, 0] == pytest.approx(-1.0 / 13 + 5.0 * 2.0)


def test_match_cost_matches_scalar_recomputation():
    rng = np.random.default_rng(5)
    scores = rng.random((32, 13))
    scores /= scores.sum(axis=1, keepdims=True)
    coords = rng.random((32, 2)) * 7
    pred = PredictionSet(scores, coords)
    items = [DetectionItem(3, GridCoord(1, 2)), DetectionItem(7, GridCoord(5, 5))]
    target = DetectionTargetSet(items)
    weights = MatchWeights(class_weight=1.3, coord_weight=2.7)
    cost = match_cost(pred, target, weights)
    for i in range(32):
        for j, item in enumerate(target.sorted_items()):
            expected = -1.3 * scores[i, item.class_id] + 2.7 * (
                abs(coords[i, 0] - item.coord.x) / 7 + abs(coords[i, 1] - item.coord.y) / 7
            )
            assert cost[i, j] == pytest.approx(expected)


def test_solve_two_by_two():
    assignment = solve_assignment(np.array([[1.0, 2.0], [3.0, 1.0]]))
    assert assignment.col_to_row == (0, 1)
    assert assignment.total_cost == pytest.approx(2.0)


def test_solve_zero_diagonal():
    cost = np.ones((5, 5)) * 9
    np.fill_diagonal(cost, 0.0)
    assignment = solve_assignment(cost)
    assert assignment.col_to_row == (0, 1, 2, 3, 4)
    assert assignment.total_cost == 0.0


def test_solve_rectangular_and_empty():
    assignment = solve_assignment(np.zeros((32, 0)))
    assert assignment.col_to_row == ()
    assert assignment.total_cost == 0.0
    with pytest.raises(ValueError):
        solve_assignment(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        solve_assignment(np.array([[np.inf]]))


def test_solver_agrees_with_brute_force():
    rng = np.random.default_rng(42)
    for _ in range(60):
        n_cols = int(rng.integers(1, 7))
        n_rows = int(rng.integers(n_cols, 8))
        cost = rng.normal(size=(n_rows, n_cols)) * 10
        assignment = solve_assignment(cost)
        assert assignment.total_cost == pytest.approx(brute_force_min(cost), abs=1e-9)


def test_set_loss_perfect_prediction():
    rng = random.Random(3)
    board = random_valid_board(rng)
    target = encode_detection(board)
    loss = set_loss(perfect_prediction_set(target), target)
    assert loss.coord_term == pytest.approx(0.0)
    assert loss.class_term == pytest.approx(0.0, abs=1e-9)
    assert loss.total == pytest.approx(0.0, abs=1e-9)


def test_set_loss_empty_target_certain_background():
    target = DetectionTargetSet([])
    pred = prediction_with({})
    loss = set_loss(pred, target)
    assert loss.total == pytest.approx(0.0, abs=1e-9)


def test_set_loss_breakdown_identity():
    rng = np.random.default_rng(9)
    scores = rng.random((32, 13))
    scores /= scores.sum(axis=1, keepdims=True)
    pred = PredictionSet(scores, rng.random((32, 2)) * 7)
    target = DetectionTargetSet([DetectionItem(2, GridCoord(3, 3)), DetectionItem(9, GridCoord(0, 1))])
    weights = MatchWeights(class_weight=2.0, coord_weight=3.0)
    loss = set_loss(pred, target, weights)
    assert loss.total == pytest.approx(2.0 * loss.class_term + 3.0 * loss.coord_term)
    assert loss.total >= 0.0


def test_set_loss_matches_hand_expansion():
    # 2 targets, 4 meaningful queries; optimal matching found by brute force
    # and the loss expanded by hand from the matched pairs.
    weights = MatchWeights(class_weight=1.0, coord_weight=5.0, background_weight=0.1)
    items = [DetectionItem(1, GridCoord(2, 2)), DetectionItem(6, GridCoord(5, 4))]
    target = DetectionTargetSet(items)
    q0 = (np.full(13, 1.0 / 13), (2.0, 2.0))
    q1 = (one_hot(6) * 0.7 + np.full(13, 0.3 / 13), (5.5, 4.5))
    q2 = (one_hot(1) * 0.9 + np.full(13, 0.1 / 13), (1.5, 2.5))
    q3 = (one_hot(EMPTY_CLASS), (0.0, 0.0))
    pred = prediction_with({0: q0, 1: q1, 2: q2, 3: q3})

    cost = match_cost(pred, target, weights)
    best_rows = min(
        itertools.permutations(range(32), 2),
        key=lambda rows: sum(cost[r, c] for c, r in enumerate(rows)),
    )
    items_sorted = target.sorted_items()
    # by construction: query 2 -> item at (2,2), query 1 -> item at (5,4)
    assert set(best_rows) == {1, 2}

    probs = pred.class_scores
    expected_ce = 0.0
    expected_weights = 0.0
    matched_class = {best_rows[0]: items_sorted[0].class_id, best_rows[1]: items_sorted[1].class_id}
    for q in range(32):
        if q in matched_class:
            w, p = 1.0, probs[q, matched_class[q]]
        else:
            w, p = 0.1, probs[q, EMPTY_CLASS]
        expected_ce += w * -np.log(max(p, 1e-12))
        expected_weights += w
    expected_class = expected_ce / expected_weights
    expected_coord = (
        (abs(pred.coords[best_rows[0], 0] - 2) + abs(pred.coords[best_rows[0], 1] - 2)) / 7
        + (abs(pred.coords[best_rows[1], 0] - 5) + abs(pred.coords[best_rows[1], 1] - 4)) / 7
    ) / 2

    loss = set_loss(pred, target, weights)
    assert loss.class_term == pytest.approx(expected_class)
    assert loss.coord_term == pytest.approx(expected_coord)
    assert loss.total == pytest.approx(expected_class + 5.0 * expected_coord)


def test_set_loss_permutation_invariant():
    rng = np.random.default_rng(21)
    scores = rng.random((32, 13))
    scores /= scores.sum(axis=1, keepdims=True)
    coords = rng.random((32, 2)) * 7
    items = [DetectionItem(0, GridCoord(1, 1)), DetectionItem(5, GridCoord(6, 2)),
             DetectionItem(8, GridCoord(3, 7))]
    base = set_loss(PredictionSet(scores, coords), DetectionTargetSet(items))
    perm = rng.permutation(32)
    shuffled = set_loss(PredictionSet(scores[perm], coords[perm]), DetectionTargetSet(reversed(items)))
    assert shuffled.total == pytest.approx(base.total)
    assert shuffled.class_term == pytest.approx(base.class_term)
    assert shuffled.coord_term == pytest.approx(base.coord_term)


def test_scaling_preserves_argmin():
    rng = np.random.default_rng(33)
    for _ in range(20):
        cost = rng.normal(size=(6, 4))
        base = solve_assignment(cost)
        scaled = solve_assignment(cost * 37.5)
        assert base.col_to_row == scaled.col_to_row


def test_assignment_injective_validation():
    with pytest.raises(ValueError):
        Assignment(col_to_row=(1, 1), total_cost=0.0)
