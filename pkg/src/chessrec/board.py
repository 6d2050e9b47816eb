"""Chess domain model: colors, pieces, squares, board state, grid coordinates.

Everything here is an immutable value; operations return new objects. The
board-grid convention used throughout the package is x = file index (a=0 ..
h=7) and y = 8 - rank (rank 8 = 0), so that square a8 maps to grid (0, 0)
and reading the grid row-major matches FEN rank order.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional

FILE_NAMES = "abcdefgh"
RANK_NAMES = "12345678"


class Color(enum.Enum):
    WHITE = "w"
    BLACK = "b"

    @property
    def opponent(self) -> "Color":
        return Color.BLACK if self is Color.WHITE else Color.WHITE


class PieceType(enum.Enum):
    PAWN = "P"
    ROOK = "R"
    KNIGHT = "N"
    BISHOP = "B"
    QUEEN = "Q"
    KING = "K"


@dataclass(frozen=True)
class Piece:
    color: Color
    piece_type: PieceType

    @property
    def fen_letter(self) -> str:
        letter = self.piece_type.value
        return letter if self.color is Color.WHITE else letter.lower()

    @classmethod
    def from_fen_letter(cls, letter: str) -> "Piece":
        color = Color.WHITE if letter.isupper() else Color.BLACK
        try:
            piece_type = PieceType(letter.upper())
        except ValueError:
            raise ValueError(f"not a FEN piece letter: {letter!r}") from None
        return cls(color, piece_type)


@dataclass(frozen=True, order=True)
class Square:
    """A board square; file and rank are 0-based (a1 = file 0, rank 0)."""

    file: int
    rank: int

    def __post_init__(self) -> None:
        if not (0 <= self.file <= 7 and 0 <= self.rank <= 7):
            raise ValueError(f"square off the board: file={self.file} rank={self.rank}")

    @property
    def name(self) -> str:
        return FILE_NAMES[self.file] + RANK_NAMES[self.rank]

    @property
    def index(self) -> int:
        return self.rank * 8 + self.file

    @classmethod
    def from_name(cls, name: str) -> "Square":
        if len(name) != 2 or name[0] not in FILE_NAMES or name[1] not in RANK_NAMES:
            raise ValueError(f"not an algebraic square name: {name!r}")
        return cls(FILE_NAMES.index(name[0]), RANK_NAMES.index(name[1]))

    @classmethod
    def from_index(cls, index: int) -> "Square":
        if not 0 <= index <= 63:
            raise ValueError(f"square index out of range: {index}")
        return cls(index % 8, index // 8)


@dataclass(frozen=True)
class GridCoord:
    """Position on the 8x8 recognition grid; (0, 0) is square a8."""

    x: int
    y: int

    def __post_init__(self) -> None:
        if not (0 <= self.x <= 7 and 0 <= self.y <= 7):
            raise ValueError(f"grid coordinate out of range: ({self.x}, {self.y})")

    @property
    def flat_index(self) -> int:
        return self.y * 8 + self.x


@dataclass(frozen=True)
class Orientation:
    """Grid labeling rotated by a number of 90-degree clockwise quarter turns."""

    quarter_turns: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.quarter_turns <= 3:
            raise ValueError(f"quarter_turns must be in 0..3, got {self.quarter_turns}")

    def compose(self, other: "Orientation") -> "Orientation":
        return Orientation((self.quarter_turns + other.quarter_turns) % 4)


ORIENTATIONS = tuple(Orientation(k) for k in range(4))


@dataclass(frozen=True)
class CastlingRights:
    white_kingside: bool = False
    white_queenside: bool = False
    black_kingside: bool = False
    black_queenside: bool = False

    @classmethod
    def all(cls) -> "CastlingRights":
        return cls(True, True, True, True)

    @classmethod
    def none(cls) -> "CastlingRights":
        return cls()

    @property
    def fen_field(self) -> str:
        out = ""
        if self.white_kingside:
            out += "K"
        if self.white_queenside:
            out += "Q"
        if self.black_kingside:
            out += "k"
        if self.black_queenside:
            out += "q"
        return out or "-"

    @classmethod
    def from_fen_field(cls, text: str) -> "CastlingRights":
        if text == "-":
            return cls.none()
        if not text or any(ch not in "KQkq" for ch in text) or len(set(text)) != len(text):
            raise ValueError(f"invalid castling field: {text!r}")
        return cls("K" in text, "Q" in text, "k" in text, "q" in text)


def _initial_placement() -> tuple:
    back = [PieceType.ROOK, PieceType.KNIGHT, PieceType.BISHOP, PieceType.QUEEN,
            PieceType.KING, PieceType.BISHOP, PieceType.KNIGHT, PieceType.ROOK]
    cells: list = [None] * 64
    for f in range(8):
        cells[Square(f, 0).index] = Piece(Color.WHITE, back[f])
        cells[Square(f, 1).index] = Piece(Color.WHITE, PieceType.PAWN)
        cells[Square(f, 6).index] = Piece(Color.BLACK, PieceType.PAWN)
        cells[Square(f, 7).index] = Piece(Color.BLACK, back[f])
    return tuple(cells)


@dataclass(frozen=True)
class BoardState:
    """Full chess position: placement plus side-to-move and rule bookkeeping.

    ``placement`` has 64 entries indexed by ``Square.index`` (rank * 8 + file).
    ``en_passant`` is the capture target square, kept only while a legal en
    passant capture is actually available (matching how the notation tooling
    serializes positions).
    """

    placement: tuple = field(default_factory=lambda: (None,) * 64)
    side_to_move: Color = Color.WHITE
    castling: CastlingRights = field(default_factory=CastlingRights.none)
    en_passant: Optional[Square] = None
    halfmove_clock: int = 0
    fullmove_number: int = 1

    def piece_at(self, square: Square) -> Optional[Piece]:
        return self.placement[square.index]

    def pieces(self) -> Iterator[tuple]:
        for index, piece in enumerate(self.placement):
            if piece is not None:
                yield Square.from_index(index), piece

    def count(self, color: Color, piece_type: Optional[PieceType] = None) -> int:
        return sum(
            1
            for piece in self.placement
            if piece is not None
            and piece.color is color
            and (piece_type is None or piece.piece_type is piece_type)
        )

    def violations(self) -> list:
        """Invariant violations as human-readable strings; empty when valid."""
        problems = []
        for color in Color:
            kings = self.count(color, PieceType.KING)
            if kings != 1:
                problems.append(f"{color.name.lower()} has {kings} kings, expected 1")
            pawns = self.count(color, PieceType.PAWN)
            if pawns > 8:
                problems.append(f"{color.name.lower()} has {pawns} pawns, expected at most 8")
        for index, piece in enumerate(self.placement):
            if piece is not None and piece.piece_type is PieceType.PAWN:
                rank = index // 8
                if rank in (0, 7):
                    problems.append(f"pawn on back rank at {Square.from_index(index).name}")
        total = sum(1 for piece in self.placement if piece is not None)
        if total > 32:
            problems.append(f"{total} pieces on the board, expected at most 32")
        if self.halfmove_clock < 0:
            problems.append("negative halfmove clock")
        if self.fullmove_number < 1:
            problems.append("fullmove number below 1")
        return problems

    @property
    def is_valid(self) -> bool:
        return not self.violations()

    def with_piece(self, square: Square, piece: Optional[Piece]) -> "BoardState":
        cells = list(self.placement)
        cells[square.index] = piece
        return replace(self, placement=tuple(cells))

    @classmethod
    def empty(cls) -> "BoardState":
        return cls()

    @classmethod
    def initial(cls) -> "BoardState":
        return cls(placement=_initial_placement(), castling=CastlingRights.all())


def rotate_coord(coord: GridCoord, quarter_turns: int) -> GridCoord:
    """Image of a grid coordinate under clockwise quarter turns: (x,y) -> (7-y, x)."""
    x, y = coord.x, coord.y
    for _ in range(quarter_turns % 4):
        x, y = 7 - y, x
    return GridCoord(x, y)


def square_to_grid(square: Square, orientation: Orientation = Orientation(0)) -> GridCoord:
    """Map a square to a grid coordinate; orientation 0 sends a8 to (0, 0)."""
    base = GridCoord(square.file, 7 - square.rank)
    return rotate_coord(base, orientation.quarter_turns)


def grid_to_square(coord: GridCoord, orientation: Orientation = Orientation(0)) -> Square:
    """Inverse of :func:`square_to_grid` for the same orientation."""
    base = rotate_coord(coord, (4 - orientation.quarter_turns) % 4)
    return Square(base.x, 7 - base.y)
