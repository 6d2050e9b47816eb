"""Parsing and serialization of the standard six-field FEN position format."""
from __future__ import annotations

from typing import Optional

from .board import BoardState, CastlingRights, Color, Piece, Square


class FenError(ValueError):
    """Malformed FEN text; carries the offending field for diagnostics."""

    def __init__(self, message: str, field: str = "", position: Optional[int] = None):
        detail = message
        if field:
            detail += f" (field: {field}"
            if position is not None:
                detail += f", position {position}"
            detail += ")"
        super().__init__(detail)
        self.field = field
        self.position = position


def parse_fen(text: str, strict: bool = True) -> BoardState:
    """Parse a six-field FEN string into a :class:`BoardState`.

    With ``strict=True`` (the default) the board must satisfy the position
    invariants (one king per color, pawn and piece-count limits). Lenient
    mode returns the board regardless so that validator tooling can load and
    report malformed records; callers can inspect ``board.violations()``.
    """
    fields = text.split()
    if len(fields) != 6:
        raise FenError(f"expected 6 space-separated fields, got {len(fields)}", "fields")
    placement_field, side_field, castling_field, ep_field, half_field, full_field = fields

    ranks = placement_field.split("/")
    if len(ranks) != 8:
        raise FenError(f"expected 8 ranks, got {len(ranks)}", "placement")
    cells: list = [None] * 64
    for row, rank_text in enumerate(ranks):
        rank = 7 - row  # first FEN rank is rank 8
        file = 0
        for pos, ch in enumerate(rank_text):
            if ch.isdigit():
                run = int(ch)
                if not 1 <= run <= 8:
                    raise FenError(f"invalid empty-square digit {ch!r}", "placement", pos)
                file += run
            else:
                try:
                    piece = Piece.from_fen_letter(ch)
                except ValueError:
                    raise FenError(f"invalid piece letter {ch!r} in rank {8 - row}", "placement", pos) from None
                if file > 7:
                    raise FenError(f"rank {8 - row} overflows 8 columns", "placement", pos)
                cells[rank * 8 + file] = piece
                file += 1
        if file != 8:
            raise FenError(f"rank {8 - row} covers {file} columns, expected 8", "placement")

    if side_field not in ("w", "b"):
        raise FenError(f"invalid side to move {side_field!r}", "side")
    side = Color.WHITE if side_field == "w" else Color.BLACK

    try:
        castling = CastlingRights.from_fen_field(castling_field)
    except ValueError as exc:
        raise FenError(str(exc), "castling") from None

    en_passant = None
    if ep_field != "-":
        try:
            en_passant = Square.from_name(ep_field)
        except ValueError:
            raise FenError(f"invalid en passant square {ep_field!r}", "en_passant") from None
        if en_passant.rank not in (2, 5):
            raise FenError(f"en passant square {ep_field!r} not on rank 3 or 6", "en_passant")

    try:
        halfmove = int(half_field)
        if halfmove < 0:
            raise ValueError
    except ValueError:
        raise FenError(f"invalid halfmove clock {half_field!r}", "halfmove") from None
    try:
        fullmove = int(full_field)
        if fullmove < 1:
            raise ValueError
    except ValueError:
        raise FenError(f"invalid fullmove number {full_field!r}", "fullmove") from None

    board = BoardState(
        placement=tuple(cells),
        side_to_move=side,
        castling=castling,
        en_passant=en_passant,
        halfmove_clock=halfmove,
        fullmove_number=fullmove,
    )
    if strict:
        problems = board.violations()
        if problems:
            raise FenError("position violates board invariants: " + "; ".join(problems), "placement")
    return board


def placement_field(board: BoardState) -> str:
    """The first FEN field only: piece placement with empty runs as digits."""
    rows = []
    for rank in range(7, -1, -1):
        row = ""
        empty = 0
        for file in range(8):
            piece = board.placement[rank * 8 + file]
            if piece is None:
                empty += 1
            else:
                if empty:
                    row += str(empty)
                    empty = 0
                row += piece.fen_letter
        if empty:
            row += str(empty)
        rows.append(row)
    return "/".join(rows)


def serialize_fen(board: BoardState) -> str:
    """Serialize a board to canonical FEN; inverse of :func:`parse_fen`."""
    return " ".join(
        [
            placement_field(board),
            board.side_to_move.value,
            board.castling.fen_field,
            board.en_passant.name if board.en_passant is not None else "-",
            str(board.halfmove_clock),
            str(board.fullmove_number),
        ]
    )
