import random

import numpy as np
import pytest

from chessrec.board import BoardState
from chessrec.evaluation import (
    BoardPair,
    EvalReport,
    GamePhase,
    ablation_report,
    best_orientation_metrics,
    compute_metrics,
    incorrect_squares,
    phase_of,
)
from chessrec.targets import EMPTY_CLASS, ClassificationTarget, encode_classification, rotate_target

from conftest import random_valid_board


def target_of(board: BoardState) -> ClassificationTarget:
    return encode_classification(board)


def random_target(rng: np.random.Generator) -> ClassificationTarget:
    return ClassificationTarget(rng.integers(0, 13, size=64))


def flip_one(target: ClassificationTarget, flat: int) -> ClassificationTarget:
    labels = target.labels.copy()
    labels[flat] = (labels[flat] + 1) % 13
    return ClassificationTarget(labels)


def test_incorrect_squares_basics():
    gt = target_of(BoardState.initial())
    assert incorrect_squares(gt, gt) == 0
    assert incorrect_squares(flip_one(gt, 10), gt) == 1
    empty = ClassificationTarget(np.full(64, EMPTY_CLASS))
    assert incorrect_squares(empty, gt) == 32


def test_perfect_metrics():
    gt = target_of(BoardState.initial())
    report = compute_metrics([BoardPair(gt, gt)] * 5)
    assert report.mean_incorrect_squares == 0.0
    assert report.pct_no_mistakes == 100.0
    assert report.pct_at_most_one_mistake == 100.0
    assert report.per_square_error_rate == 0.0


def test_single_mistake_arithmetic():
    gt = target_of(BoardState.initial())
    report = compute_metrics([BoardPair(flip_one(gt, 0), gt)])
    assert report.mean_incorrect_squares == pytest.approx(1.0)
    assert report.pct_no_mistakes == 0.0
    assert report.pct_at_most_one_mistake == 100.0
    assert report.per_square_error_rate == pytest.approx(1.5625)


def test_fixture_at_published_scale():
    # 2,129 boards of which 325 perfect: the no-mistake share lands at 15.27%.
    gt = target_of(BoardState.initial())
    pairs = [BoardPair(gt, gt) for _ in range(325)]
    pairs += [BoardPair(flip_one(gt, i % 64), gt) for i in range(2129 - 325)]
    report = compute_metrics(pairs)
    assert report.board_count == 2129
    assert report.pct_no_mistakes == pytest.approx(100 * 325 / 2129)
    assert round(report.pct_no_mistakes, 2) == 15.27


def test_metric_identity_exact():
    rng = np.random.default_rng(1)
    for _ in range(100):
        pairs = [
            BoardPair(random_target(rng), random_target(rng))
            for _ in range(int(rng.integers(1, 40)))
        ]
        report = compute_metrics(pairs)
        assert report.mean_incorrect_squares == 64 * report.per_square_error_rate / 100
        assert report.pct_no_mistakes <= report.pct_at_most_one_mistake


def test_empty_pairs_error():
    with pytest.raises(ValueError):
        compute_metrics([])
    with pytest.raises(ValueError):
        best_orientation_metrics([])


def test_orientation_search_recovers_rotation():
    rng = random.Random(5)
    pairs = []
    for _ in range(10):
        gt = target_of(random_valid_board(rng))
        pairs.append(BoardPair(rotate_target(gt, 1), gt))
    report, chosen = best_orientation_metrics(pairs)
    assert report.pct_no_mistakes == 100.0
    assert all(k == 3 for k in chosen)  # one more quarter turn would complete the cycle


def test_orientation_search_on_symmetric_input():
    empty = ClassificationTarget(np.full(64, EMPTY_CLASS))
    pairs = [BoardPair(empty, empty)] * 3
    base = compute_metrics(pairs)
    searched, chosen = best_orientation_metrics(pairs)
    assert searched.total_incorrect == base.total_incorrect
    assert chosen == [0, 0, 0]


def test_orientation_search_dominates():
    rng = np.random.default_rng(17)
    for _ in range(50):
        pairs = [
            BoardPair(random_target(rng), random_target(rng))
            for _ in range(int(rng.integers(1, 20)))
        ]
        base = compute_metrics(pairs)
        searched, _ = best_orientation_metrics(pairs)
        assert searched.mean_incorrect_squares <= base.mean_incorrect_squares
        assert searched.per_square_error_rate <= base.per_square_error_rate
        assert searched.pct_no_mistakes >= base.pct_no_mistakes
        assert searched.pct_at_most_one_mistake >= base.pct_at_most_one_mistake


def test_phase_thresholds():
    assert phase_of(12) is GamePhase.EARLY
    assert phase_of(50) is GamePhase.MID
    assert phase_of(80) is GamePhase.END
    # boundary values land in MID
    assert phase_of(30) is GamePhase.MID
    assert phase_of(75) is GamePhase.MID
    assert phase_of(29) is GamePhase.EARLY
    assert phase_of(76) is GamePhase.END
    with pytest.raises(ValueError):
        phase_of(-1)


def test_ablation_report_phase_pattern():
    # 10 images per phase; 100% / 60% / 40% no-mistake rates -> 66.6% overall.
    gt = target_of(BoardState.initial())
    pairs = []
    for i in range(10):
        pairs.append(BoardPair(gt, gt, move_index=5 + i))
    for i in range(10):
        pred = gt if i < 6 else flip_one(gt, i)
        pairs.append(BoardPair(pred, gt, move_index=40 + i))
    for i in range(10):
        pred = gt if i < 4 else flip_one(gt, i)
        pairs.append(BoardPair(pred, gt, move_index=80 + i))
    report = ablation_report(pairs)
    assert report.board_count == 30
    assert report.pct_no_mistakes == pytest.approx(200 / 3)
    assert report.per_phase[GamePhase.EARLY].pct_no_mistakes == 100.0
    assert report.per_phase[GamePhase.MID].pct_no_mistakes == pytest.approx(60.0)
    assert report.per_phase[GamePhase.END].pct_no_mistakes == pytest.approx(40.0)
    assert report.phase_counts == {GamePhase.EARLY: 10, GamePhase.MID: 10, GamePhase.END: 10}


def test_ablation_single_phase():
    gt = target_of(BoardState.initial())
    pairs = [BoardPair(gt, gt, move_index=3) for _ in range(4)]
    report = ablation_report(pairs)
    early = report.per_phase[GamePhase.EARLY]
    assert early.board_count == report.board_count
    assert early.total_incorrect == report.total_incorrect
    assert report.per_phase[GamePhase.MID] is None
    assert report.per_phase[GamePhase.END] is None


def test_ablation_requires_move_index():
    gt = target_of(BoardState.initial())
    with pytest.raises(ValueError):
        ablation_report([BoardPair(gt, gt)])


def test_reports_merge_like_concatenation():
    rng = np.random.default_rng(23)
    for _ in range(20):
        a = [BoardPair(random_target(rng), random_target(rng)) for _ in range(int(rng.integers(1, 15)))]
        b = [BoardPair(random_target(rng), random_target(rng)) for _ in range(int(rng.integers(1, 15)))]
        merged = compute_metrics(a).merge(compute_metrics(b))
        combined = compute_metrics(a + b)
        assert merged == combined


def test_metrics_invariant_under_reordering():
    rng = np.random.default_rng(29)
    pairs = [BoardPair(random_target(rng), random_target(rng)) for _ in range(30)]
    shuffled = list(pairs)
    random.Random(1).shuffle(shuffled)
    assert compute_metrics(pairs) == compute_metrics(shuffled)


def test_report_dict_shape():
    gt = target_of(BoardState.initial())
    report = ablation_report([BoardPair(gt, gt, move_index=10)])
    payload = report.to_dict()
    assert payload["board_count"] == 1
    assert payload["per_phase"]["mid"] is None
    assert payload["phase_counts"] == {"early": 1, "mid": 0, "end": 0}
