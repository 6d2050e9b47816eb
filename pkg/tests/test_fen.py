import pytest

from chessrec.board import BoardState, Color, Piece, PieceType, Square
from chessrec.fen import FenError, parse_fen, placement_field, serialize_fen

from conftest import load_fixture

INITIAL = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1"


def test_initial_position_parses():
    board = parse_fen(INITIAL)
    assert board == BoardState.initial()
    assert board.count(Color.WHITE, PieceType.PAWN) == 8
    assert all(
        board.piece_at(Square(f, 1)) == Piece(Color.WHITE, PieceType.PAWN) for f in range(8)
    )
    assert board.side_to_move is Color.WHITE
    assert board.piece_at(Square.from_name("b1")) == Piece(Color.WHITE, PieceType.KNIGHT)


def test_initial_position_serializes():
    assert serialize_fen(BoardState.initial()) == INITIAL


def test_empty_board_strict_vs_lenient():
    fen = "8/8/8/8/8/8/8/8 w - - 0 1"
    with pytest.raises(FenError):
        parse_fen(fen)
    board = parse_fen(fen, strict=False)
    assert sum(1 for p in board.placement if p is not None) == 0
    assert not board.is_valid


def test_lone_kings_placement_field():
    board = (
        BoardState.empty()
        .with_piece(Square.from_name("e1"), Piece(Color.WHITE, PieceType.KING))
        .with_piece(Square.from_name("e8"), Piece(Color.BLACK, PieceType.KING))
    )
    assert placement_field(board) == "4k3/8/8/8/8/8/8/4K3"


@pytest.mark.parametrize(
    "bad,field",
    [
        ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq -", "fields"),
        ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP w KQkq - 0 1", "placement"),
        ("rnbqkbnr/ppppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1", "placement"),
        ("rnbqkbnr/ppppppxp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1", "placement"),
        ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR x KQkq - 0 1", "side"),
        ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KZkq - 0 1", "castling"),
        ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq e5 0 1", "en_passant"),
        ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - -1 1", "halfmove"),
        ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 0", "fullmove"),
    ],
)
def test_malformed_fens_name_the_field(bad, field):
    with pytest.raises(FenError) as excinfo:
        parse_fen(bad)
    assert excinfo.value.field == field


def test_two_kings_rejected_strict():
    fen = "knbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1"
    with pytest.raises(FenError):
        parse_fen(fen)
    board = parse_fen(fen, strict=False)
    assert any("kings" in p for p in board.violations())


def test_round_trip_over_engine_positions():
    triples = load_fixture("san_triples.json")
    fens = {t["fen"] for t in triples} | {t["after"] for t in triples}
    assert len(fens) >= 1000
    for fen in fens:
        board = parse_fen(fen, strict=False)
        assert serialize_fen(board) == fen
        assert parse_fen(serialize_fen(board), strict=False) == board
