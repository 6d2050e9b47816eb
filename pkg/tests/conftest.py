import json
import random
from pathlib import Path

import pytest

from chessrec.board import BoardState, Color, Piece, PieceType, Square

DATA_DIR = Path(__file__).parent / "data"


def fixture_path(name: str) -> Path:
    return DATA_DIR / name


def load_fixture(name: str):
    with open(fixture_path(name)) as handle:
        return json.load(handle)


_NON_KING_TYPES = (
    PieceType.PAWN,
    PieceType.ROOK,
    PieceType.KNIGHT,
    PieceType.BISHOP,
    PieceType.QUEEN,
)


def random_valid_board(rng: random.Random) -> BoardState:
    """A random placement satisfying the board invariants.

    Not necessarily reachable in play; used to exercise encoders/decoders
    over a wider variety of placements than real games produce.
    """
    squares = list(range(64))
    rng.shuffle(squares)
    cells = [None] * 64
    cells[squares.pop()] = Piece(Color.WHITE, PieceType.KING)
    cells[squares.pop()] = Piece(Color.BLACK, PieceType.KING)
    pawn_budget = {Color.WHITE: 8, Color.BLACK: 8}
    extra = rng.randint(0, 30)
    placed = 0
    while placed < extra and squares:
        index = squares.pop()
        color = rng.choice((Color.WHITE, Color.BLACK))
        piece_type = rng.choice(_NON_KING_TYPES)
        if piece_type is PieceType.PAWN:
            if pawn_budget[color] == 0 or index // 8 in (0, 7):
                continue
            pawn_budget[color] -= 1
        cells[index] = Piece(color, piece_type)
        placed += 1
    return BoardState(placement=tuple(cells))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC0FFEE)
