"""Board-state encodings used as learning targets, and their decoders.

Two target forms are supported: a per-square class grid (64 labels, 13
classes each) and a set of per-piece (class, grid coordinate) items capped
at 32 entries. Class id 12 is reserved for empty squares / background.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .board import (
    BoardState,
    Color,
    GridCoord,
    Piece,
    PieceType,
    Square,
    grid_to_square,
    rotate_coord,
    square_to_grid,
)

NUM_SQUARES = 64
NUM_CLASSES = 13
EMPTY_CLASS = 12
MAX_PIECES = 32

_PIECE_ROW_ORDER = (
    PieceType.PAWN,
    PieceType.ROOK,
    PieceType.KNIGHT,
    PieceType.BISHOP,
    PieceType.QUEEN,
    PieceType.KING,
)

_WORD_FOR_TYPE = {
    PieceType.PAWN: "pawn",
    PieceType.ROOK: "rook",
    PieceType.KNIGHT: "knight",
    PieceType.BISHOP: "bishop",
    PieceType.QUEEN: "queen",
    PieceType.KING: "king",
}
_TYPE_FOR_WORD = {v: k for k, v in _WORD_FOR_TYPE.items()}


@dataclass(frozen=True)
class ClassTable:
    """Mapping between class ids 0..12 and piece identities.

    Canonical order: white pawn/rook/knight/bishop/queen/king = 0..5, black
    likewise = 6..11, empty = 12. The table is serialized into every dataset
    document so that a differently ordered source can be detected and
    remapped on ingestion.
    """

    names: tuple

    def __post_init__(self) -> None:
        if len(self.names) != NUM_CLASSES:
            raise ValueError(f"class table needs {NUM_CLASSES} names, got {len(self.names)}")

    @classmethod
    def canonical(cls) -> "ClassTable":
        names = []
        for color in (Color.WHITE, Color.BLACK):
            for piece_type in _PIECE_ROW_ORDER:
                names.append(f"{color.name.lower()}-{_WORD_FOR_TYPE[piece_type]}")
        names.append("empty")
        return cls(tuple(names))

    def class_id(self, color: Color, piece_type: PieceType) -> int:
        base = 0 if color is Color.WHITE else 6
        return base + _PIECE_ROW_ORDER.index(piece_type)

    def piece_for(self, class_id: int) -> Optional[Piece]:
        if class_id == EMPTY_CLASS:
            return None
        if not 0 <= class_id < EMPTY_CLASS:
            raise ValueError(f"class id out of range: {class_id}")
        color = Color.WHITE if class_id < 6 else Color.BLACK
        return Piece(color, _PIECE_ROW_ORDER[class_id % 6])

    def to_categories(self) -> list:
        """The 12 piece categories as serializable records (empty is implicit)."""
        return [{"id": i, "name": self.names[i]} for i in range(EMPTY_CLASS)]

    @staticmethod
    def parse_category_name(name: str) -> Optional[Piece]:
        """Best-effort (color, type) extraction from a category name."""
        words = re.split(r"[^a-z]+", name.lower())
        color = None
        piece_type = None
        for word in words:
            if word in ("white", "w"):
                color = Color.WHITE
            elif word in ("black", "b"):
                color = Color.BLACK
            elif word in _TYPE_FOR_WORD:
                piece_type = _TYPE_FOR_WORD[word]
        if color is None or piece_type is None:
            return None
        return Piece(color, piece_type)


@dataclass(frozen=True)
class DetectionItem:
    class_id: int
    coord: GridCoord

    def __post_init__(self) -> None:
        if not 0 <= self.class_id < EMPTY_CLASS:
            raise ValueError(f"detection item class must be 0..11, got {self.class_id}")


class ClassificationTarget:
    """64 class ids, row-major over the grid (index = 8 * y + x)."""

    __slots__ = ("labels",)

    def __init__(self, labels):
        arr = np.asarray(labels, dtype=np.int64).copy()
        if arr.shape != (NUM_SQUARES,):
            raise ValueError(f"expected 64 labels, got shape {arr.shape}")
        if ((arr < 0) | (arr > EMPTY_CLASS)).any():
            raise ValueError("labels must be class ids in 0..12")
        arr.setflags(write=False)
        self.labels = arr

    def __eq__(self, other) -> bool:
        return isinstance(other, ClassificationTarget) and bool(np.array_equal(self.labels, other.labels))

    def __hash__(self):
        return hash(self.labels.tobytes())

    def __repr__(self) -> str:
        return f"ClassificationTarget(occupied={self.occupied_count})"

    @property
    def occupied_count(self) -> int:
        return int((self.labels != EMPTY_CLASS).sum())


class DetectionTargetSet:
    """Set of (class id, grid coordinate) items, one per piece, at most 32."""

    __slots__ = ("items",)

    def __init__(self, items: Iterable[DetectionItem]):
        items = frozenset(items)
        if len(items) > MAX_PIECES:
            raise ValueError(f"at most {MAX_PIECES} items allowed, got {len(items)}")
        coords = [item.coord for item in items]
        if len(set(coords)) != len(coords):
            raise ValueError("two detection items share a grid coordinate")
        self.items = items

    def __eq__(self, other) -> bool:
        return isinstance(other, DetectionTargetSet) and self.items == other.items

    def __hash__(self):
        return hash(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.sorted_items())

    def __repr__(self) -> str:
        return f"DetectionTargetSet(size={len(self.items)})"

    def sorted_items(self) -> list:
        return sorted(self.items, key=lambda it: (it.coord.y, it.coord.x, it.class_id))


class PredictionGrid:
    """Model output for the classification head: 64 x 13 scores."""

    __slots__ = ("scores",)

    def __init__(self, scores):
        arr = np.asarray(scores, dtype=np.float64).copy()
        if arr.shape != (NUM_SQUARES, NUM_CLASSES):
            raise ValueError(f"expected scores of shape (64, 13), got {arr.shape}")
        arr.setflags(write=False)
        self.scores = arr


class PredictionSet:
    """Model output for the detection head: 32 queries of class scores + coords."""

    __slots__ = ("class_scores", "coords")

    def __init__(self, class_scores, coords):
        scores = np.asarray(class_scores, dtype=np.float64).copy()
        xy = np.asarray(coords, dtype=np.float64).copy()
        if scores.shape != (MAX_PIECES, NUM_CLASSES):
            raise ValueError(f"expected class scores of shape (32, 13), got {scores.shape}")
        if xy.shape != (MAX_PIECES, 2):
            raise ValueError(f"expected coords of shape (32, 2), got {xy.shape}")
        scores.setflags(write=False)
        xy.setflags(write=False)
        self.class_scores = scores
        self.coords = xy


def encode_classification(board: BoardState, table: Optional[ClassTable] = None) -> ClassificationTarget:
    """Per-square class grid for a board; empty squares get class 12."""
    table = table or ClassTable.canonical()
    labels = np.full(NUM_SQUARES, EMPTY_CLASS, dtype=np.int64)
    for square, piece in board.pieces():
        coord = square_to_grid(square)
        labels[coord.flat_index] = table.class_id(piece.color, piece.piece_type)
    return ClassificationTarget(labels)


def encode_from_pieces(pairs: Iterable[tuple], table: Optional[ClassTable] = None) -> ClassificationTarget:
    """Class grid from (square name, class id) pairs, e.g. dataset annotations."""
    labels = np.full(NUM_SQUARES, EMPTY_CLASS, dtype=np.int64)
    for square_name, class_id in pairs:
        coord = square_to_grid(Square.from_name(square_name))
        labels[coord.flat_index] = class_id
    return ClassificationTarget(labels)


def decode_classification(grid: PredictionGrid, table: Optional[ClassTable] = None) -> BoardState:
    """Argmax decode of a prediction grid into a board.

    Ties break toward the lowest class id. No legality repair is applied;
    the result may violate position invariants (``board.violations()`` tells).
    Side to move and castling bookkeeping are unknown and set to defaults.
    """
    table = table or ClassTable.canonical()
    class_ids = np.argmax(grid.scores, axis=1)
    cells: list = [None] * NUM_SQUARES
    for flat, class_id in enumerate(class_ids):
        if class_id == EMPTY_CLASS:
            continue
        coord = GridCoord(flat % 8, flat // 8)
        square = grid_to_square(coord)
        cells[square.index] = table.piece_for(int(class_id))
    return BoardState(placement=tuple(cells))


def encode_detection(board: BoardState, table: Optional[ClassTable] = None) -> DetectionTargetSet:
    """One (class, coordinate) item per piece, coordinates at orientation 0."""
    table = table or ClassTable.canonical()
    items = [
        DetectionItem(table.class_id(piece.color, piece.piece_type), square_to_grid(square))
        for square, piece in board.pieces()
    ]
    return DetectionTargetSet(items)


def detection_from_classification(target: ClassificationTarget) -> DetectionTargetSet:
    items = [
        DetectionItem(int(class_id), GridCoord(flat % 8, flat // 8))
        for flat, class_id in enumerate(target.labels)
        if class_id != EMPTY_CLASS
    ]
    return DetectionTargetSet(items)


@dataclass(frozen=True)
class DetectionDecode:
    """Result of decoding a prediction set; degraded output is flagged, not fatal."""

    board: BoardState
    conflicts: int
    kept: int
    dropped_background: int
    dropped_low_confidence: int


def decode_detection(
    pred: PredictionSet,
    table: Optional[ClassTable] = None,
    threshold: float = 0.5,
) -> DetectionDecode:
    """Decode query predictions into a board.

    Class scores are read as probabilities. Queries whose argmax is the
    background class or whose top probability falls below ``threshold`` are
    dropped. Coordinates round half-up to the nearest grid cell and are
    clamped to the board; when two surviving queries land on one cell the
    higher-confidence one wins and the loss is counted as a conflict.
    """
    table = table or ClassTable.canonical()
    class_ids = np.argmax(pred.class_scores, axis=1)
    top_probs = pred.class_scores[np.arange(MAX_PIECES), class_ids]

    dropped_background = int((class_ids == EMPTY_CLASS).sum())
    keep = class_ids != EMPTY_CLASS
    dropped_low = int((keep & (top_probs < threshold)).sum())
    keep &= top_probs >= threshold

    cells = np.clip(np.floor(pred.coords + 0.5).astype(int), 0, 7)
    best_for_cell: dict = {}
    conflicts = 0
    for query in np.nonzero(keep)[0]:
        cell = (int(cells[query, 0]), int(cells[query, 1]))
        incumbent = best_for_cell.get(cell)
        if incumbent is None:
            best_for_cell[cell] = query
        else:
            conflicts += 1
            if top_probs[query] > top_probs[incumbent]:
                best_for_cell[cell] = query
    placement: list = [None] * NUM_SQUARES
    for (x, y), query in best_for_cell.items():
        square = grid_to_square(GridCoord(x, y))
        placement[square.index] = table.piece_for(int(class_ids[query]))
    board = BoardState(placement=tuple(placement))
    return DetectionDecode(
        board=board,
        conflicts=conflicts,
        kept=len(best_for_cell),
        dropped_background=dropped_background,
        dropped_low_confidence=dropped_low,
    )


def one_hot_grid(target: ClassificationTarget) -> PredictionGrid:
    scores = np.zeros((NUM_SQUARES, NUM_CLASSES))
    scores[np.arange(NUM_SQUARES), target.labels] = 1.0
    return PredictionGrid(scores)


def perfect_prediction_set(target: DetectionTargetSet) -> PredictionSet:
    """A prediction set that reproduces a target exactly; padding is background."""
    scores = np.zeros((MAX_PIECES, NUM_CLASSES))
    coords = np.zeros((MAX_PIECES, 2))
    items = target.sorted_items()
    for row, item in enumerate(items):
        scores[row, item.class_id] = 1.0
        coords[row] = (item.coord.x, item.coord.y)
    for row in range(len(items), MAX_PIECES):
        scores[row, EMPTY_CLASS] = 1.0
    return PredictionSet(scores, coords)


_ROTATION_PERMS = {}


def _rotation_perm(quarter_turns: int) -> np.ndarray:
    """Permutation p with rotated[p[flat]] = original[flat]."""
    k = quarter_turns % 4
    if k not in _ROTATION_PERMS:
        perm = np.empty(NUM_SQUARES, dtype=np.int64)
        for flat in range(NUM_SQUARES):
            coord = GridCoord(flat % 8, flat // 8)
            perm[flat] = rotate_coord(coord, k).flat_index
        _ROTATION_PERMS[k] = perm
    return _ROTATION_PERMS[k]


Target = Union[ClassificationTarget, DetectionTargetSet]


def rotate_target(target: Target, quarter_turns: int) -> Target:
    """Relabel a target's grid by clockwise quarter turns; classes unchanged."""
    k = quarter_turns % 4
    if isinstance(target, ClassificationTarget):
        rotated = np.empty(NUM_SQUARES, dtype=np.int64)
        rotated[_rotation_perm(k)] = target.labels
        return ClassificationTarget(rotated)
    if isinstance(target, DetectionTargetSet):
        return DetectionTargetSet(
            DetectionItem(item.class_id, rotate_coord(item.coord, k)) for item in target.items
        )
    raise TypeError(f"cannot rotate {type(target).__name__}")
