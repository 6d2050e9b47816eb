"""Bipartite set matching between query predictions and piece targets.

Costs combine the predicted probability of the target's class with the L1
distance of the predicted coordinate, both on normalized scales. The solver
is an O(n^3) shortest-augmenting-path method whose exactness is pinned
against brute force in the tests. Box extents never appear: items are
(class, coordinate) only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .targets import EMPTY_CLASS, MAX_PIECES, DetectionTargetSet, PredictionSet

COORD_SCALE = 7.0  # grid coordinates are normalized to [0, 1] by this divisor
_LOG_EPS = 1e-12


@dataclass(frozen=True)
class MatchWeights:
    class_weight: float = 1.0
    coord_weight: float = 5.0
    background_weight: float = 0.1  # class-term weight for unmatched queries


@dataclass(frozen=True)
class Assignment:
    """Injective map from target index (column) to query index (row)."""

    col_to_row: tuple
    total_cost: float

    def __post_init__(self) -> None:
        rows = list(self.col_to_row)
        if len(set(rows)) != len(rows):
            raise ValueError("assignment is not injective")


@dataclass(frozen=True)
class LossBreakdown:
    total: float
    class_term: float
    coord_term: float
    weights: MatchWeights


def match_cost(
    pred: PredictionSet,
    target: DetectionTargetSet,
    weights: Optional[MatchWeights] = None,
) -> np.ndarray:
    """Cost matrix, rows = queries, cols = target items.

    Entry (i, j) = -class_weight * p_i(class_j)
                   + coord_weight * L1(coord_i / 7, coord_j / 7).
    """
    weights = weights or MatchWeights()
    items = target.sorted_items()
    n = len(items)
    probs = pred.class_scores
    coords = pred.coords / COORD_SCALE
    cost = np.zeros((MAX_PIECES, n))
    for j, item in enumerate(items):
        target_xy = np.array([item.coord.x, item.coord.y]) / COORD_SCALE
        l1 = np.abs(coords - target_xy).sum(axis=1)
        cost[:, j] = -weights.class_weight * probs[:, item.class_id] + weights.coord_weight * l1
    return cost


def solve_assignment(cost: np.ndarray) -> Assignment:
    """Minimum-cost injective assignment of every column to a distinct row."""
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise ValueError("cost matrix must be 2-dimensional")
    n_rows, n_cols = cost.shape
    if n_cols > n_rows:
        raise ValueError(f"more columns than rows ({n_cols} > {n_rows}); pad or transpose")
    if not np.isfinite(cost).all():
        raise ValueError("cost matrix entries must be finite")
    if n_cols == 0:
        return Assignment(col_to_row=(), total_cost=0.0)

    INF = float("inf")
    # Shortest augmenting paths with potentials; columns play the "job" role.
    u = [0.0] * (n_cols + 1)  # column potentials
    v = [0.0] * (n_rows + 1)  # row potentials (last entry is the virtual root)
    row_col = [-1] * (n_rows + 1)  # row -> assigned column
    way = [0] * (n_rows + 1)

    for col in range(n_cols):
        row_col[n_rows] = col
        j0 = n_rows
        min_to = [INF] * n_rows
        used = [False] * (n_rows + 1)
        while True:
            used[j0] = True
            c0 = row_col[j0]
            delta = INF
            j1 = -1
            for j in range(n_rows):
                if used[j]:
                    continue
                cur = cost[j, c0] - u[c0] - v[j]
                if cur < min_to[j]:
                    min_to[j] = cur
                    way[j] = j0
                if min_to[j] < delta:
                    delta = min_to[j]
                    j1 = j
            for j in range(n_rows + 1):
                if used[j]:
                    if row_col[j] != -1:
                        u[row_col[j]] += delta
                    v[j] -= delta
                elif j < n_rows:
                    min_to[j] -= delta
            j0 = j1
            if row_col[j0] == -1:
                break
        while j0 != n_rows:
            j1 = way[j0]
            row_col[j0] = row_col[j1]
            j0 = j1

    col_to_row = [-1] * n_cols
    for row in range(n_rows):
        if row_col[row] != -1:
            col_to_row[row_col[row]] = row
    total = float(sum(cost[row, col] for col, row in enumerate(col_to_row)))
    return Assignment(col_to_row=tuple(col_to_row), total_cost=total)


def set_loss(
    pred: PredictionSet,
    target: DetectionTargetSet,
    weights: Optional[MatchWeights] = None,
) -> LossBreakdown:
    """Set-prediction loss under the optimal matching.

    The class term is a weighted mean cross-entropy over all 32 queries:
    matched queries against their target's class, unmatched ones against the
    background class (down-weighted). The coordinate term is the mean
    normalized L1 distance over matched pairs.
    """
    weights = weights or MatchWeights()
    items = target.sorted_items()
    assignment = solve_assignment(match_cost(pred, target, weights))

    query_class = np.full(MAX_PIECES, EMPTY_CLASS, dtype=np.int64)
    for col, row in enumerate(assignment.col_to_row):
        query_class[row] = items[col].class_id
    probs = np.clip(pred.class_scores[np.arange(MAX_PIECES), query_class], _LOG_EPS, None)
    ce = -np.log(probs)
    ce_weights = np.where(query_class == EMPTY_CLASS, weights.background_weight, 1.0)
    class_term = float((ce_weights * ce).sum() / ce_weights.sum())

    if items:
        coord_total = 0.0
        for col, row in enumerate(assignment.col_to_row):
            dx = pred.coords[row, 0] - items[col].coord.x
            dy = pred.coords[row, 1] - items[col].coord.y
            coord_total += (abs(dx) + abs(dy)) / COORD_SCALE
        coord_term = coord_total / len(items)
    else:
        coord_term = 0.0

    total = weights.class_weight * class_term + weights.coord_weight * coord_term
    return LossBreakdown(total=float(total), class_term=class_term, coord_term=float(coord_term), weights=weights)
