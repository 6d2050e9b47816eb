"""Legal-move machinery and SAN application.

The public API is pure: :func:`apply_san` takes an immutable
:class:`~chessrec.board.BoardState` and returns a new one. Internally a
mutable array position with make/unmake is used so that replaying long games
and counting move-tree nodes stays fast.

En passant bookkeeping follows the convention used when serializing
positions: after a double pawn push the target square is recorded only if an
en passant capture is actually legal in the resulting position.
"""
from __future__ import annotations

import re
from typing import NamedTuple, Optional

from .board import (
    BoardState,
    CastlingRights,
    Color,
    Piece,
    PieceType,
    Square,
)

# Internal piece codes; sign carries the color (positive = white).
_P, _N, _B, _R, _Q, _K = 1, 2, 3, 4, 5, 6

_TYPE_FOR_CODE = {
    _P: PieceType.PAWN,
    _N: PieceType.KNIGHT,
    _B: PieceType.BISHOP,
    _R: PieceType.ROOK,
    _Q: PieceType.QUEEN,
    _K: PieceType.KING,
}
_CODE_FOR_TYPE = {v: k for k, v in _TYPE_FOR_CODE.items()}
_CODE_FOR_SAN_LETTER = {"N": _N, "B": _B, "R": _R, "Q": _Q, "K": _K, "P": _P}
_SAN_LETTER_FOR_CODE = {v: k for k, v in _CODE_FOR_SAN_LETTER.items()}

# Move flags.
_F_CAPTURE = 1
_F_DOUBLE = 2
_F_EN_PASSANT = 4
_F_CASTLE_K = 8
_F_CASTLE_Q = 16

# Castling-rights bits.
_C_WK, _C_WQ, _C_BK, _C_BQ = 1, 2, 4, 8

_A1, _E1, _H1 = 0, 4, 7
_A8, _E8, _H8 = 56, 60, 63


def _jump_table(deltas) -> tuple:
    table = []
    for sq in range(64):
        f, r = sq % 8, sq // 8
        targets = []
        for df, dr in deltas:
            nf, nr = f + df, r + dr
            if 0 <= nf <= 7 and 0 <= nr <= 7:
                targets.append(nr * 8 + nf)
        table.append(tuple(targets))
    return tuple(table)


_KNIGHT_TARGETS = _jump_table([(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)])
_KING_TARGETS = _jump_table([(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)])

_DIAG_DIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))
_ORTHO_DIRS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _ray_table(directions) -> tuple:
    table = []
    for sq in range(64):
        f, r = sq % 8, sq // 8
        rays = []
        for df, dr in directions:
            ray = []
            nf, nr = f + df, r + dr
            while 0 <= nf <= 7 and 0 <= nr <= 7:
                ray.append(nr * 8 + nf)
                nf += df
                nr += dr
            if ray:
                rays.append(tuple(ray))
        table.append(tuple(rays))
    return tuple(table)


_DIAG_RAYS = _ray_table(_DIAG_DIRS)
_ORTHO_RAYS = _ray_table(_ORTHO_DIRS)


class RawMove(NamedTuple):
    frm: int
    to: int
    piece: int  # absolute piece code of the mover
    promo: int  # absolute piece code or 0
    flags: int


class SanError(ValueError):
    """Illegal, ambiguous, or unparseable SAN move text."""

    def __init__(self, message: str, san: str):
        super().__init__(f"{message}: {san!r}")
        self.san = san


class _Pos:
    """Mutable position used internally for move generation and replay."""

    __slots__ = ("board", "white_to_move", "castle", "ep", "half", "full", "kings")

    def __init__(self):
        self.board = [0] * 64
        self.white_to_move = True
        self.castle = 0
        self.ep = -1  # en passant target square index, -1 when absent
        self.half = 0
        self.full = 1
        self.kings = [-1, -1]  # [white king sq, black king sq]

    @classmethod
    def from_board(cls, state: BoardState) -> "_Pos":
        pos = cls()
        for index, piece in enumerate(state.placement):
            if piece is None:
                continue
            code = _CODE_FOR_TYPE[piece.piece_type]
            if piece.color is Color.WHITE:
                pos.board[index] = code
                if code == _K:
                    pos.kings[0] = index
            else:
                pos.board[index] = -code
                if code == _K:
                    pos.kings[1] = index
        pos.white_to_move = state.side_to_move is Color.WHITE
        c = state.castling
        pos.castle = (
            (_C_WK if c.white_kingside else 0)
            | (_C_WQ if c.white_queenside else 0)
            | (_C_BK if c.black_kingside else 0)
            | (_C_BQ if c.black_queenside else 0)
        )
        pos.ep = state.en_passant.index if state.en_passant is not None else -1
        pos.half = state.halfmove_clock
        pos.full = state.fullmove_number
        return pos

    def to_board(self) -> BoardState:
        cells: list = [None] * 64
        for index, code in enumerate(self.board):
            if code:
                color = Color.WHITE if code > 0 else Color.BLACK
                cells[index] = Piece(color, _TYPE_FOR_CODE[abs(code)])
        return BoardState(
            placement=tuple(cells),
            side_to_move=Color.WHITE if self.white_to_move else Color.BLACK,
            castling=CastlingRights(
                bool(self.castle & _C_WK),
                bool(self.castle & _C_WQ),
                bool(self.castle & _C_BK),
                bool(self.castle & _C_BQ),
            ),
            en_passant=Square.from_index(self.ep) if self.ep >= 0 else None,
            halfmove_clock=self.half,
            fullmove_number=self.full,
        )

    # -- attack detection ---------------------------------------------------

    def attacked(self, sq: int, by_white: bool) -> bool:
        board = self.board
        sign = 1 if by_white else -1
        # Pawns: a white pawn attacks from one rank below.
        f, r = sq % 8, sq // 8
        pr = r - 1 if by_white else r + 1
        if 0 <= pr <= 7:
            if f > 0 and board[pr * 8 + f - 1] == sign * _P:
                return True
            if f < 7 and board[pr * 8 + f + 1] == sign * _P:
                return True
        for t in _KNIGHT_TARGETS[sq]:
            if board[t] == sign * _N:
                return True
        for t in _KING_TARGETS[sq]:
            if board[t] == sign * _K:
                return True
        for ray in _DIAG_RAYS[sq]:
            for t in ray:
                code = board[t]
                if code:
                    if code == sign * _B or code == sign * _Q:
                        return True
                    break
        for ray in _ORTHO_RAYS[sq]:
            for t in ray:
                code = board[t]
                if code:
                    if code == sign * _R or code == sign * _Q:
                        return True
                    break
        return False

    def in_check(self) -> bool:
        king_sq = self.kings[0] if self.white_to_move else self.kings[1]
        return king_sq >= 0 and self.attacked(king_sq, not self.white_to_move)

    # -- move generation ----------------------------------------------------

    def pseudo_moves(self) -> list:
        board = self.board
        white = self.white_to_move
        sign = 1 if white else -1
        moves = []
        add = moves.append
        for frm in range(64):
            code = board[frm]
            if code == 0 or (code > 0) != white:
                continue
            kind = abs(code)
            if kind == _P:
                f, r = frm % 8, frm // 8
                step = 8 if white else -8
                start_rank = 1 if white else 6
                promo_rank = 7 if white else 0
                one = frm + step
                if 0 <= one <= 63 and board[one] == 0:
                    if one // 8 == promo_rank:
                        for promo in (_Q, _R, _B, _N):
                            add(RawMove(frm, one, _P, promo, 0))
                    else:
                        add(RawMove(frm, one, _P, 0, 0))
                        if r == start_rank and board[frm + 2 * step] == 0:
                            add(RawMove(frm, frm + 2 * step, _P, 0, _F_DOUBLE))
                cap_rank = r + (1 if white else -1)
                if 0 <= cap_rank <= 7:
                    for df in (-1, 1):
                        nf = f + df
                        if not 0 <= nf <= 7:
                            continue
                        to = cap_rank * 8 + nf
                        target = board[to]
                        if target and (target > 0) != white:
                            if cap_rank == promo_rank:
                                for promo in (_Q, _R, _B, _N):
                                    add(RawMove(frm, to, _P, promo, _F_CAPTURE))
                            else:
                                add(RawMove(frm, to, _P, 0, _F_CAPTURE))
                        elif to == self.ep:
                            add(RawMove(frm, to, _P, 0, _F_CAPTURE | _F_EN_PASSANT))
            elif kind == _N:
                for to in _KNIGHT_TARGETS[frm]:
                    target = board[to]
                    if target == 0:
                        add(RawMove(frm, to, _N, 0, 0))
                    elif (target > 0) != white:
                        add(RawMove(frm, to, _N, 0, _F_CAPTURE))
            elif kind == _K:
                for to in _KING_TARGETS[frm]:
                    target = board[to]
                    if target == 0:
                        add(RawMove(frm, to, _K, 0, 0))
                    elif (target > 0) != white:
                        add(RawMove(frm, to, _K, 0, _F_CAPTURE))
            else:
                rays = []
                if kind in (_B, _Q):
                    rays.extend(_DIAG_RAYS[frm])
                if kind in (_R, _Q):
                    rays.extend(_ORTHO_RAYS[frm])
                for ray in rays:
                    for to in ray:
                        target = board[to]
                        if target == 0:
                            add(RawMove(frm, to, kind, 0, 0))
                        else:
                            if (target > 0) != white:
                                add(RawMove(frm, to, kind, 0, _F_CAPTURE))
                            break
        # Castling: rights present, path empty, king not passing through check.
        if white and board[_E1] == _K:
            if (
                self.castle & _C_WK
                and board[_E1 + 1] == 0
                and board[_E1 + 2] == 0
                and board[_H1] == _R
                and not self.attacked(_E1, False)
                and not self.attacked(_E1 + 1, False)
                and not self.attacked(_E1 + 2, False)
            ):
                add(RawMove(_E1, _E1 + 2, _K, 0, _F_CASTLE_K))
            if (
                self.castle & _C_WQ
                and board[_E1 - 1] == 0
                and board[_E1 - 2] == 0
                and board[_E1 - 3] == 0
                and board[_A1] == _R
                and not self.attacked(_E1, False)
                and not self.attacked(_E1 - 1, False)
                and not self.attacked(_E1 - 2, False)
            ):
                add(RawMove(_E1, _E1 - 2, _K, 0, _F_CASTLE_Q))
        elif not white and board[_E8] == -_K:
            if (
                self.castle & _C_BK
                and board[_E8 + 1] == 0
                and board[_E8 + 2] == 0
                and board[_H8] == -_R
                and not self.attacked(_E8, True)
                and not self.attacked(_E8 + 1, True)
                and not self.attacked(_E8 + 2, True)
            ):
                add(RawMove(_E8, _E8 + 2, _K, 0, _F_CASTLE_K))
            if (
                self.castle & _C_BQ
                and board[_E8 - 1] == 0
                and board[_E8 - 2] == 0
                and board[_E8 - 3] == 0
                and board[_A8] == -_R
                and not self.attacked(_E8, True)
                and not self.attacked(_E8 - 1, True)
                and not self.attacked(_E8 - 2, True)
            ):
                add(RawMove(_E8, _E8 - 2, _K, 0, _F_CASTLE_Q))
        return moves

    def make(self, mv: RawMove) -> tuple:
        board = self.board
        white = self.white_to_move
        sign = 1 if white else -1
        captured = board[mv.to]
        captured_sq = mv.to
        if mv.flags & _F_EN_PASSANT:
            captured_sq = mv.to - 8 * sign
            captured = board[captured_sq]
            board[captured_sq] = 0
        undo = (captured, captured_sq, self.castle, self.ep, self.half)

        board[mv.frm] = 0
        board[mv.to] = sign * (mv.promo if mv.promo else mv.piece)
        if mv.piece == _K:
            self.kings[0 if white else 1] = mv.to
            if mv.flags & _F_CASTLE_K:
                rook_from, rook_to = mv.to + 1, mv.to - 1
                board[rook_to] = board[rook_from]
                board[rook_from] = 0
            elif mv.flags & _F_CASTLE_Q:
                rook_from, rook_to = mv.to - 2, mv.to + 1
                board[rook_to] = board[rook_from]
                board[rook_from] = 0

        # Castling rights decay when king or rook squares are touched.
        touched = {mv.frm, mv.to, captured_sq}
        if _E1 in touched:
            self.castle &= ~(_C_WK | _C_WQ)
        if _H1 in touched:
            self.castle &= ~_C_WK
        if _A1 in touched:
            self.castle &= ~_C_WQ
        if _E8 in touched:
            self.castle &= ~(_C_BK | _C_BQ)
        if _H8 in touched:
            self.castle &= ~_C_BK
        if _A8 in touched:
            self.castle &= ~_C_BQ

        self.ep = (mv.frm + mv.to) // 2 if mv.flags & _F_DOUBLE else -1
        self.half = 0 if (mv.piece == _P or mv.flags & _F_CAPTURE) else self.half + 1
        if not white:
            self.full += 1
        self.white_to_move = not white
        return undo

    def unmake(self, mv: RawMove, undo: tuple) -> None:
        captured, captured_sq, castle, ep, half = undo
        board = self.board
        self.white_to_move = not self.white_to_move
        white = self.white_to_move
        sign = 1 if white else -1
        board[mv.frm] = sign * mv.piece
        board[mv.to] = 0
        if captured:
            board[captured_sq] = captured
        if mv.piece == _K:
            self.kings[0 if white else 1] = mv.frm
            if mv.flags & _F_CASTLE_K:
                board[mv.to + 1] = board[mv.to - 1]
                board[mv.to - 1] = 0
            elif mv.flags & _F_CASTLE_Q:
                board[mv.to - 2] = board[mv.to + 1]
                board[mv.to + 1] = 0
        self.castle = castle
        self.ep = ep
        self.half = half
        if not white:
            self.full -= 1

    def legal_moves(self) -> list:
        own = 0 if self.white_to_move else 1
        opponent_is_white = not self.white_to_move
        out = []
        for mv in self.pseudo_moves():
            undo = self.make(mv)
            if not self.attacked(self.kings[own], opponent_is_white):
                out.append(mv)
            self.unmake(mv, undo)
        return out

    def normalize_ep(self) -> None:
        """Keep the en passant target only if a legal capture onto it exists."""
        if self.ep < 0:
            return
        for mv in self.pseudo_moves():
            if mv.flags & _F_EN_PASSANT and mv.to == self.ep:
                own = 0 if self.white_to_move else 1
                undo = self.make(mv)
                legal = not self.attacked(self.kings[own], self.white_to_move)
                self.unmake(mv, undo)
                if legal:
                    return
        self.ep = -1


_SAN_BODY_RE = re.compile(
    r"^(?P<piece>[KQRBNP])?(?P<ffile>[a-h])?(?P<frank>[1-8])?(?P<capture>x)?"
    r"(?P<to>[a-h][1-8])(?:=(?P<promo>[QRBN]))?$"
)


def _san_to_move(pos: _Pos, san: str) -> RawMove:
    body = san.rstrip("+#!?").removesuffix("e.p.").strip()
    if not body:
        raise SanError("empty move text", san)
    legal = pos.legal_moves()

    castle = body.replace("0", "O")
    if castle in ("O-O", "O-O-O"):
        wanted = _F_CASTLE_K if castle == "O-O" else _F_CASTLE_Q
        for mv in legal:
            if mv.flags & wanted:
                return mv
        raise SanError("illegal castling move", san)

    m = _SAN_BODY_RE.match(body)
    if m is None:
        raise SanError("unparseable SAN", san)
    piece = _CODE_FOR_SAN_LETTER[m.group("piece") or "P"]
    to = Square.from_name(m.group("to")).index
    promo = _CODE_FOR_SAN_LETTER[m.group("promo")] if m.group("promo") else 0
    if piece == _P and promo == 0 and to // 8 in (0, 7):
        raise SanError("pawn move to the last rank requires a promotion piece", san)
    from_file = "abcdefgh".index(m.group("ffile")) if m.group("ffile") else None
    from_rank = int(m.group("frank")) - 1 if m.group("frank") else None
    wants_capture = bool(m.group("capture"))

    candidates = []
    for mv in legal:
        if mv.piece != piece or mv.to != to or mv.promo != promo:
            continue
        if from_file is not None and mv.frm % 8 != from_file:
            continue
        if from_rank is not None and mv.frm // 8 != from_rank:
            continue
        candidates.append(mv)
    if not candidates:
        raise SanError("no legal move matches", san)
    if len(candidates) > 1:
        raise SanError("ambiguous move", san)
    mv = candidates[0]
    if wants_capture != bool(mv.flags & _F_CAPTURE):
        raise SanError("capture marker does not match the position", san)
    return mv


def _san_for_move(pos: _Pos, mv: RawMove, legal: Optional[list] = None) -> str:
    if mv.flags & _F_CASTLE_K:
        body = "O-O"
    elif mv.flags & _F_CASTLE_Q:
        body = "O-O-O"
    elif mv.piece == _P:
        body = ""
        if mv.flags & _F_CAPTURE:
            body += "abcdefgh"[mv.frm % 8] + "x"
        body += Square.from_index(mv.to).name
        if mv.promo:
            body += "=" + _SAN_LETTER_FOR_CODE[mv.promo]
    else:
        if legal is None:
            legal = pos.legal_moves()
        others = [o for o in legal if o.piece == mv.piece and o.to == mv.to and o.frm != mv.frm]
        body = _SAN_LETTER_FOR_CODE[mv.piece]
        if others:
            same_file = any(o.frm % 8 == mv.frm % 8 for o in others)
            same_rank = any(o.frm // 8 == mv.frm // 8 for o in others)
            if not same_file:
                body += "abcdefgh"[mv.frm % 8]
            elif not same_rank:
                body += "12345678"[mv.frm // 8]
            else:
                body += Square.from_index(mv.frm).name
        if mv.flags & _F_CAPTURE:
            body += "x"
        body += Square.from_index(mv.to).name
    undo = pos.make(mv)
    if pos.in_check():
        body += "#" if not pos.legal_moves() else "+"
    pos.unmake(mv, undo)
    return body


def apply_san(board: BoardState, san: str) -> BoardState:
    """Apply one SAN move to a position, returning the resulting position.

    Raises :class:`SanError` when the move text is unparseable, matches no
    legal move, or matches several (missing disambiguation).
    """
    pos = _Pos.from_board(board)
    mv = _san_to_move(pos, san)
    pos.make(mv)
    pos.normalize_ep()
    return pos.to_board()


def legal_sans(board: BoardState) -> list:
    """SAN strings for every legal move, with minimal disambiguation."""
    pos = _Pos.from_board(board)
    legal = pos.legal_moves()
    return [_san_for_move(pos, mv, legal) for mv in legal]


def is_check(board: BoardState) -> bool:
    return _Pos.from_board(board).in_check()


def perft(board: BoardState, depth: int) -> int:
    """Leaf count of the legal move tree; standard move-generator checksum."""
    pos = _Pos.from_board(board)

    def walk(d: int) -> int:
        moves = pos.legal_moves()
        if d == 1:
            return len(moves)
        total = 0
        for mv in moves:
            undo = pos.make(mv)
            total += walk(d - 1)
            pos.unmake(mv, undo)
        return total

    if depth <= 0:
        return 1
    return walk(depth)
