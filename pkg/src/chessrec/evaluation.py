"""Board-level recognition metrics, orientation search, and phase ablation."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .targets import ClassificationTarget, rotate_target


class GamePhase(enum.Enum):
    EARLY = "early"
    MID = "mid"
    END = "end"


# Half-move thresholds separating the game phases; moves on a boundary fall
# into the middle bucket.
PHASE_BOUNDARIES = (30, 75)


@dataclass(frozen=True)
class BoardPair:
    predicted: ClassificationTarget
    ground_truth: ClassificationTarget
    image_id: Optional[int] = None
    move_index: Optional[int] = None


@dataclass(frozen=True)
class EvalReport:
    """Aggregated board metrics; derived values come from integer accumulators.

    ``mean_incorrect_squares`` is defined as 64 * per_square_error_rate / 100
    so the identity between the two holds exactly, not just to rounding.
    """

    board_count: int
    total_incorrect: int
    no_mistake_count: int
    at_most_one_count: int
    per_phase: Optional[dict] = None
    phase_counts: Optional[dict] = None

    @property
    def per_square_error_rate(self) -> float:
        """Percentage of wrong square predictions out of 64 per board."""
        return 100.0 * self.total_incorrect / (64 * self.board_count)

    @property
    def mean_incorrect_squares(self) -> float:
        return 64 * self.per_square_error_rate / 100

    @property
    def pct_no_mistakes(self) -> float:
        return 100.0 * self.no_mistake_count / self.board_count

    @property
    def pct_at_most_one_mistake(self) -> float:
        return 100.0 * self.at_most_one_count / self.board_count

    def merge(self, other: "EvalReport") -> "EvalReport":
        """Count-weighted combination; phases are not carried over."""
        return EvalReport(
            board_count=self.board_count + other.board_count,
            total_incorrect=self.total_incorrect + other.total_incorrect,
            no_mistake_count=self.no_mistake_count + other.no_mistake_count,
            at_most_one_count=self.at_most_one_count + other.at_most_one_count,
        )

    def to_dict(self) -> dict:
        out = {
            "board_count": self.board_count,
            "mean_incorrect_squares": self.mean_incorrect_squares,
            "pct_no_mistakes": self.pct_no_mistakes,
            "pct_at_most_one_mistake": self.pct_at_most_one_mistake,
            "per_square_error_rate": self.per_square_error_rate,
        }
        if self.per_phase is not None:
            out["per_phase"] = {
                phase.value: (report.to_dict() if report is not None else None)
                for phase, report in self.per_phase.items()
            }
            out["phase_counts"] = {phase.value: n for phase, n in (self.phase_counts or {}).items()}
        return out


def incorrect_squares(pred: ClassificationTarget, ground_truth: ClassificationTarget) -> int:
    """Number of the 64 squares whose class ids differ."""
    return int((pred.labels != ground_truth.labels).sum())


def _report_from_counts(counts: Sequence[int]) -> EvalReport:
    counts = list(counts)
    return EvalReport(
        board_count=len(counts),
        total_incorrect=int(sum(counts)),
        no_mistake_count=sum(1 for c in counts if c == 0),
        at_most_one_count=sum(1 for c in counts if c <= 1),
    )


def compute_metrics(pairs: Sequence[BoardPair]) -> EvalReport:
    """The four board-level metrics over prediction/ground-truth pairs."""
    if not pairs:
        raise ValueError("cannot compute metrics over an empty pair list")
    return _report_from_counts(
        incorrect_squares(pair.predicted, pair.ground_truth) for pair in pairs
    )


def best_orientation_metrics(pairs: Sequence[BoardPair]) -> tuple:
    """Metrics with each board scored under its best of the four orientations.

    Returns (report, chosen_quarter_turns) where the chosen rotation per board
    is the smallest k achieving the per-board minimum of incorrect squares.
    """
    if not pairs:
        raise ValueError("cannot compute metrics over an empty pair list")
    counts = []
    chosen = []
    for pair in pairs:
        per_k = [
            incorrect_squares(rotate_target(pair.predicted, k), pair.ground_truth)
            for k in range(4)
        ]
        best = min(per_k)
        counts.append(best)
        chosen.append(per_k.index(best))
    return _report_from_counts(counts), chosen


def phase_of(move_index: int) -> GamePhase:
    """Game phase for a half-move count; boundary values land in MID."""
    if move_index < 0:
        raise ValueError(f"move index must be non-negative, got {move_index}")
    early_end, mid_end = PHASE_BOUNDARIES
    if move_index < early_end:
        return GamePhase.EARLY
    if move_index <= mid_end:
        return GamePhase.MID
    return GamePhase.END


def ablation_report(pairs: Sequence[BoardPair], boundaries: tuple = PHASE_BOUNDARIES) -> EvalReport:
    """Overall report plus one sub-report per game phase.

    Every pair must carry a move index. Phases without pairs get a ``None``
    sub-report (marked empty rather than failing).
    """
    if not pairs:
        raise ValueError("cannot compute metrics over an empty pair list")
    early_end, mid_end = boundaries
    buckets: dict = {phase: [] for phase in GamePhase}
    for pair in pairs:
        if pair.move_index is None:
            raise ValueError("ablation report needs a move index on every pair")
        if pair.move_index < early_end:
            phase = GamePhase.EARLY
        elif pair.move_index <= mid_end:
            phase = GamePhase.MID
        else:
            phase = GamePhase.END
        buckets[phase].append(pair)
    overall = compute_metrics(pairs)
    per_phase = {
        phase: (compute_metrics(bucket) if bucket else None) for phase, bucket in buckets.items()
    }
    phase_counts = {phase: len(bucket) for phase, bucket in buckets.items()}
    return EvalReport(
        board_count=overall.board_count,
        total_incorrect=overall.total_incorrect,
        no_mistake_count=overall.no_mistake_count,
        at_most_one_count=overall.at_most_one_count,
        per_phase=per_phase,
        phase_counts=phase_counts,
    )
