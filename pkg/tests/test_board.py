import pytest

from chessrec.board import (
    BoardState,
    Color,
    GridCoord,
    Orientation,
    Piece,
    PieceType,
    Square,
    grid_to_square,
    rotate_coord,
    square_to_grid,
)


def test_square_names():
    assert Square.from_name("a8") == Square(0, 7)
    assert Square.from_name("h1") == Square(7, 0)
    assert Square(4, 0).name == "e1"
    with pytest.raises(ValueError):
        Square.from_name("i1")
    with pytest.raises(ValueError):
        Square(8, 0)


def test_grid_convention_anchors():
    assert square_to_grid(Square.from_name("a8")) == GridCoord(0, 0)
    assert square_to_grid(Square.from_name("h1")) == GridCoord(7, 7)
    assert grid_to_square(GridCoord(0, 0)) == Square.from_name("a8")
    assert grid_to_square(GridCoord(7, 7)) == Square.from_name("h1")


def test_grid_bijection_all_orientations():
    for orientation in (Orientation(k) for k in range(4)):
        images = set()
        for index in range(64):
            square = Square.from_index(index)
            coord = square_to_grid(square, orientation)
            images.add((coord.x, coord.y))
            assert grid_to_square(coord, orientation) == square
        assert len(images) == 64


def test_rotation_is_z4_action():
    coord = GridCoord(0, 0)
    assert rotate_coord(coord, 1) == GridCoord(7, 0)
    assert rotate_coord(coord, 4) == coord
    for x in range(8):
        for y in range(8):
            c = GridCoord(x, y)
            assert rotate_coord(rotate_coord(c, 1), 3) == c
            assert rotate_coord(rotate_coord(c, 2), 2) == c


def test_orientation_composition():
    assert Orientation(3).compose(Orientation(2)) == Orientation(1)
    with pytest.raises(ValueError):
        Orientation(4)


def test_initial_board_counts():
    board = BoardState.initial()
    assert board.count(Color.WHITE) == 16
    assert board.count(Color.BLACK) == 16
    assert board.count(Color.WHITE, PieceType.PAWN) == 8
    assert board.piece_at(Square.from_name("e1")) == Piece(Color.WHITE, PieceType.KING)
    assert board.is_valid


def test_violations_reported():
    empty = BoardState.empty()
    problems = empty.violations()
    assert any("white" in p and "kings" in p for p in problems)
    assert any("black" in p and "kings" in p for p in problems)

    board = BoardState.initial().with_piece(
        Square.from_name("a8"), Piece(Color.WHITE, PieceType.PAWN)
    )
    assert any("back rank" in p for p in board.violations())
