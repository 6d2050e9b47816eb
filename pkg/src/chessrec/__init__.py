"""End-to-end chess recognition toolkit.

Submodules:

- ``board``, ``fen``, ``moves``, ``pgn`` — chess domain model and notation.
- ``targets`` — board-state encodings used as learning targets.
- ``matching`` — bipartite set-matching cost, solver, and loss.
- ``data`` — dataset building, loading, validation, synthesis, ingestion.
- ``model`` — training and inference for the recognizer.
- ``evaluation`` — board-level metrics, orientation search, phase ablation.
"""

__version__ = "0.1.0"

from .board import (
    BoardState,
    CastlingRights,
    Color,
    GridCoord,
    Orientation,
    Piece,
    PieceType,
    Square,
    grid_to_square,
    square_to_grid,
)
from .fen import FenError, parse_fen, serialize_fen
from .moves import SanError, apply_san, legal_sans
from .pgn import GameRecord, PgnError, ReplayError, parse_pgn, replay_game

__all__ = [
    "BoardState",
    "CastlingRights",
    "Color",
    "GridCoord",
    "Orientation",
    "Piece",
    "PieceType",
    "Square",
    "grid_to_square",
    "square_to_grid",
    "FenError",
    "parse_fen",
    "serialize_fen",
    "SanError",
    "apply_san",
    "legal_sans",
    "GameRecord",
    "PgnError",
    "ReplayError",
    "parse_pgn",
    "replay_game",
    "__version__",
]
