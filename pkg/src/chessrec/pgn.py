"""PGN import: header tags plus movetext, and full-game replay.

Comments (``{...}`` and ``;`` to end of line) and move numbers are stripped
from the movetext; variations and numeric annotation glyphs are rejected so
that corrupt inputs surface instead of silently losing moves.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .board import BoardState
from .moves import SanError, apply_san

_HEADER_RE = re.compile(r'^\[(?P<key>\w+)\s+"(?P<value>.*)"\]\s*$')
_RESULT_TOKENS = ("1-0", "0-1", "1/2-1/2", "*")
_MOVE_NUMBER_RE = re.compile(r"^\d+\.*$")
_SAN_TOKEN_RE = re.compile(
    r"^(?:[KQRBNP]?[a-h]?[1-8]?x?[a-h][1-8](?:=[QRBN])?|O-O(?:-O)?|0-0(?:-0)?)[+#!?]*$"
)


@dataclass
class GameRecord:
    """One recorded game: verbatim header tags and the SAN move list."""

    headers: dict = field(default_factory=dict)
    moves: list = field(default_factory=list)
    device_tag: Optional[str] = None

    @property
    def eco(self) -> Optional[str]:
        return self.headers.get("ECO")

    @property
    def result(self) -> Optional[str]:
        return self.headers.get("Result")


class PgnError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ReplayError(ValueError):
    """A SAN move failed during replay; carries the half-move index."""

    def __init__(self, ply: int, san: str, cause: Exception):
        super().__init__(f"half-move {ply} ({san!r}): {cause}")
        self.ply = ply
        self.san = san


def _strip_comments(line: str, line_no: int, in_comment: bool) -> tuple:
    """Remove brace and semicolon comments; returns (text, still_in_comment)."""
    out = []
    i = 0
    while i < len(line):
        ch = line[i]
        if in_comment:
            if ch == "}":
                in_comment = False
            i += 1
            continue
        if ch == "{":
            in_comment = True
            i += 1
            continue
        if ch == "}":
            raise PgnError("unmatched '}' in movetext", line_no)
        if ch == ";":
            break
        out.append(ch)
        i += 1
    return "".join(out), in_comment


def parse_pgn(text: str) -> list:
    """Parse possibly many games from PGN text into :class:`GameRecord` list."""
    games: list = []
    headers: dict = {}
    moves: list = []
    seen_header = False
    seen_movetext = False
    in_comment = False

    def finish(line_no: int) -> None:
        nonlocal headers, moves, seen_header, seen_movetext
        games.append(GameRecord(headers=headers, moves=moves))
        headers, moves = {}, []
        seen_header = seen_movetext = False

    lines = text.splitlines()
    for line_no, raw in enumerate(lines, start=1):
        if raw.startswith("%"):  # PGN escape line
            continue
        if not in_comment:
            stripped = raw.strip()
            if not stripped:
                continue
            if stripped.startswith("["):
                if seen_movetext:
                    raise PgnError("header tag after movetext without game terminator", line_no)
                m = _HEADER_RE.match(stripped)
                if m is None:
                    raise PgnError(f"unterminated or malformed header tag: {stripped!r}", line_no)
                headers[m.group("key")] = m.group("value")
                seen_header = True
                continue
        line, in_comment = _strip_comments(raw, line_no, in_comment)
        finished = False
        for token in line.split():
            if finished:
                raise PgnError(f"movetext after game terminator: {token!r}", line_no)
            if not seen_header:
                raise PgnError("movetext before any header tag", line_no)
            if token in _RESULT_TOKENS:
                finish(line_no)
                finished = True
                continue
            seen_movetext = True
            if _MOVE_NUMBER_RE.match(token):
                continue
            if token.startswith("(") or token.endswith(")"):
                raise PgnError("variations are not supported", line_no)
            if token.startswith("$"):
                raise PgnError(f"numeric annotation glyph not supported: {token!r}", line_no)
            if not _SAN_TOKEN_RE.match(token):
                raise PgnError(f"not a SAN token: {token!r}", line_no)
            moves.append(token)
    if in_comment:
        raise PgnError("unterminated '{' comment", len(lines))
    if seen_header or moves:
        raise PgnError("game without result terminator", len(lines))
    return games


def format_pgn(games) -> str:
    """Serialize games back to PGN text (headers verbatim, 8 plies per line)."""
    chunks = []
    for game in games:
        lines = [f'[{key} "{value}"]' for key, value in game.headers.items()]
        lines.append("")
        tokens = []
        for ply, san in enumerate(game.moves):
            if ply % 2 == 0:
                tokens.append(f"{ply // 2 + 1}.")
            tokens.append(san)
        tokens.append(game.headers.get("Result", "*"))
        body = []
        for start in range(0, len(tokens), 12):
            body.append(" ".join(tokens[start : start + 12]))
        lines.extend(body)
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"


def replay_game(game: GameRecord) -> list:
    """Positions after each half-move, starting from the initial position.

    Output length equals the move-list length; element ``i`` is the position
    once ``i + 1`` half-moves have been played.
    """
    states = []
    board = BoardState.initial()
    for ply, san in enumerate(game.moves, start=1):
        try:
            board = apply_san(board, san)
        except SanError as exc:
            raise ReplayError(ply, san, exc) from exc
        states.append(board)
    return states
