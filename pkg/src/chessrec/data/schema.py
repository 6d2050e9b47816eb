"""Annotation-set schema: in-memory records and the on-disk JSON document.

The document layout is COCO-like with four top-level sections plus the game
records the annotations were derived from:

    {
      "categories": [{"id": 0, "name": "white-pawn"}, ...],
      "images": [{"id", "file_name", "game_id", "move_index", "device",
                  "width", "height", "split"}, ...],
      "annotations": {
        "pieces":  [{"id", "image_id", "category_id", "chessboard_position"}],
        "boxes":   [{"id", "image_id", "category_id", "bbox": [x, y, w, h]}],
        "corners": [{"image_id", "corners": {"bottom_left": [x, y], ...}}]
      },
      "splits": {"train": [game ids], "val": [...], "test": [...]},
      "games": [{"id", "headers", "moves", "device"}]
    }

Piece positions are algebraic square names; corner names are relative to the
white player's perspective (bottom_left is the a1 corner).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional

from ..board import Square
from ..pgn import GameRecord
from ..targets import EMPTY_CLASS, ClassTable, ClassificationTarget, encode_from_pieces

SPLIT_NAMES = ("train", "val", "test")
CORNER_NAMES = ("bottom_left", "bottom_right", "top_left", "top_right")


@dataclass
class ImageRecord:
    image_id: int
    file_name: str
    game_id: int
    move_index: int  # half-moves played before capture
    device: Optional[str] = None
    width: int = 0
    height: int = 0
    split: str = "unassigned"


@dataclass
class PieceAnnotation:
    ann_id: int
    image_id: int
    category_id: int
    chessboard_position: str


@dataclass
class BoxAnnotation:
    ann_id: int
    image_id: int
    category_id: int
    bbox: tuple  # (x, y, w, h) in pixels


@dataclass
class CornerAnnotation:
    image_id: int
    corners: dict  # name -> (x, y) in pixels


@dataclass
class BuildFailure:
    game_id: int
    ply: int
    message: str


@dataclass
class AnnotationSet:
    class_table: ClassTable = field(default_factory=ClassTable.canonical)
    images: list = field(default_factory=list)
    pieces: list = field(default_factory=list)
    boxes: list = field(default_factory=list)
    corners: list = field(default_factory=list)
    games: dict = field(default_factory=dict)  # game_id -> GameRecord
    build_failures: list = field(default_factory=list)

    # -- indexes ------------------------------------------------------------

    def image_by_id(self, image_id: int) -> ImageRecord:
        index = self._image_index()
        return self.images[index[image_id]]

    def _image_index(self) -> dict:
        if not hasattr(self, "_image_index_cache") or len(self._image_index_cache) != len(self.images):
            self._image_index_cache = {rec.image_id: i for i, rec in enumerate(self.images)}
        return self._image_index_cache

    def pieces_for_image(self, image_id: int) -> list:
        if not hasattr(self, "_piece_index_cache") or self._piece_index_len != len(self.pieces):
            cache: dict = {}
            for ann in self.pieces:
                cache.setdefault(ann.image_id, []).append(ann)
            self._piece_index_cache = cache
            self._piece_index_len = len(self.pieces)
        return self._piece_index_cache.get(image_id, [])

    def target_for_image(self, image_id: int) -> ClassificationTarget:
        return encode_from_pieces(
            (ann.chessboard_position, ann.category_id) for ann in self.pieces_for_image(image_id)
        )

    def images_in_split(self, split: str) -> list:
        return [rec for rec in self.images if rec.split == split]

    def split_totals(self) -> dict:
        totals: dict = {}
        for rec in self.images:
            totals[rec.split] = totals.get(rec.split, 0) + 1
        return totals

    def device_of_game(self, game_id: int) -> Optional[str]:
        game = self.games.get(game_id)
        if game is not None and (game.device_tag or game.headers.get("Device")):
            return game.device_tag or game.headers.get("Device")
        for rec in self.images:
            if rec.game_id == game_id and rec.device:
                return rec.device
        return None

    def game_ids(self) -> list:
        ids = set(self.games)
        ids.update(rec.game_id for rec in self.images)
        return sorted(ids)

    # -- document I/O ---------------------------------------------------------

    def to_document(self) -> dict:
        splits: dict = {name: [] for name in SPLIT_NAMES}
        split_seen: dict = {}
        for rec in self.images:
            if rec.split in splits and split_seen.get(rec.game_id) is None:
                splits[rec.split].append(rec.game_id)
                split_seen[rec.game_id] = rec.split
        return {
            "categories": self.class_table.to_categories(),
            "images": [
                {
                    "id": rec.image_id,
                    "file_name": rec.file_name,
                    "game_id": rec.game_id,
                    "move_index": rec.move_index,
                    "device": rec.device,
                    "width": rec.width,
                    "height": rec.height,
                    "split": rec.split,
                }
                for rec in self.images
            ],
            "annotations": {
                "pieces": [
                    {
                        "id": ann.ann_id,
                        "image_id": ann.image_id,
                        "category_id": ann.category_id,
                        "chessboard_position": ann.chessboard_position,
                    }
                    for ann in self.pieces
                ],
                "boxes": [
                    {
                        "id": ann.ann_id,
                        "image_id": ann.image_id,
                        "category_id": ann.category_id,
                        "bbox": list(ann.bbox),
                    }
                    for ann in self.boxes
                ],
                "corners": [
                    {
                        "image_id": ann.image_id,
                        "corners": {name: list(xy) for name, xy in ann.corners.items()},
                    }
                    for ann in self.corners
                ],
            },
            "splits": {name: sorted(ids) for name, ids in splits.items()},
            "games": [
                {
                    "id": game_id,
                    "headers": dict(game.headers),
                    "moves": list(game.moves),
                    "device": game.device_tag,
                }
                for game_id, game in sorted(self.games.items())
            ],
        }

    @classmethod
    def from_document(cls, doc: dict) -> "AnnotationSet":
        table = ClassTable.canonical()
        images = [
            ImageRecord(
                image_id=entry["id"],
                file_name=entry["file_name"],
                game_id=entry.get("game_id", -1),
                move_index=entry.get("move_index", 0),
                device=entry.get("device"),
                width=entry.get("width", 0),
                height=entry.get("height", 0),
                split=entry.get("split", "unassigned"),
            )
            for entry in doc.get("images", [])
        ]
        ann_section = doc.get("annotations", {})
        pieces = [
            PieceAnnotation(
                ann_id=entry.get("id", i),
                image_id=entry["image_id"],
                category_id=entry["category_id"],
                chessboard_position=entry["chessboard_position"],
            )
            for i, entry in enumerate(ann_section.get("pieces", []))
        ]
        boxes = [
            BoxAnnotation(
                ann_id=entry.get("id", i),
                image_id=entry["image_id"],
                category_id=entry["category_id"],
                bbox=tuple(entry["bbox"]),
            )
            for i, entry in enumerate(ann_section.get("boxes", []))
        ]
        corners = [
            CornerAnnotation(
                image_id=entry["image_id"],
                corners={name: tuple(xy) for name, xy in entry["corners"].items()},
            )
            for entry in ann_section.get("corners", [])
        ]
        games = {
            entry["id"]: GameRecord(
                headers=dict(entry.get("headers", {})),
                moves=list(entry.get("moves", [])),
                device_tag=entry.get("device"),
            )
            for entry in doc.get("games", [])
        }
        return cls(
            class_table=table,
            images=images,
            pieces=pieces,
            boxes=boxes,
            corners=corners,
            games=games,
        )

    def save(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_document(), handle, indent=1, sort_keys=True)
            handle.write("\n")

    @classmethod
    def load(cls, path) -> "AnnotationSet":
        with open(path, encoding="utf-8") as handle:
            return cls.from_document(json.load(handle))


@dataclass
class Violation:
    kind: str
    detail: str
    image_id: Optional[int] = None


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    per_split: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def counts_by_kind(self) -> dict:
        counts: dict = {}
        for violation in self.violations:
            counts[violation.kind] = counts.get(violation.kind, 0) + 1
        return counts

    def summary(self) -> str:
        if self.ok:
            return "validation clean: 0 violations"
        parts = ", ".join(f"{kind}={n}" for kind, n in sorted(self.counts_by_kind().items()))
        return f"validation found {len(self.violations)} violations ({parts})"


def validate_annotations(aset: AnnotationSet) -> ValidationReport:
    """Structural and chess-invariant checks; reports instead of aborting.

    Per image: exactly one king per color, at most 8 pawns per color, at most
    32 pieces, at most one piece per square. Per split: king count per color
    must equal the image count. Split labels must be constant within a game.
    """
    report = ValidationReport()
    add = report.violations.append
    table = aset.class_table
    known_images = {rec.image_id for rec in aset.images}

    white_king = table.names.index("white-king")
    black_king = table.names.index("black-king")
    white_pawn = table.names.index("white-pawn")
    black_pawn = table.names.index("black-pawn")

    per_split = {
        name: {"images": 0, "white_kings": 0, "black_kings": 0}
        for name in (*SPLIT_NAMES, "unassigned")
    }

    for ann in aset.pieces:
        if ann.image_id not in known_images:
            add(Violation("dangling_image_id", f"piece annotation {ann.ann_id} references image {ann.image_id}"))
        if not 0 <= ann.category_id < EMPTY_CLASS:
            add(Violation("bad_category", f"annotation {ann.ann_id} has category {ann.category_id}", ann.image_id))
        try:
            Square.from_name(ann.chessboard_position)
        except ValueError:
            add(Violation("bad_square", f"annotation {ann.ann_id} at {ann.chessboard_position!r}", ann.image_id))

    split_of_game: dict = {}
    for rec in aset.images:
        if rec.game_id in split_of_game and split_of_game[rec.game_id] != rec.split:
            add(Violation("split_not_game_constant", f"game {rec.game_id} appears in multiple splits", rec.image_id))
        split_of_game.setdefault(rec.game_id, rec.split)
        if rec.width <= 0 or rec.height <= 0:
            add(Violation("bad_image_size", f"image {rec.image_id} has size {rec.width}x{rec.height}", rec.image_id))

        anns = aset.pieces_for_image(rec.image_id)
        squares = [a.chessboard_position for a in anns]
        if len(set(squares)) != len(squares):
            dupes = sorted({s for s in squares if squares.count(s) > 1})
            add(Violation("duplicate_square", f"image {rec.image_id} squares {dupes}", rec.image_id))
        if len(anns) > 32:
            add(Violation("too_many_pieces", f"image {rec.image_id} has {len(anns)} pieces", rec.image_id))
        counts: dict = {}
        for ann in anns:
            counts[ann.category_id] = counts.get(ann.category_id, 0) + 1
        for category, limit, kind in (
            (white_king, 1, "king_count"),
            (black_king, 1, "king_count"),
        ):
            if counts.get(category, 0) != limit:
                add(Violation(kind, f"image {rec.image_id} has {counts.get(category, 0)} of category {category}", rec.image_id))
        for category, kind in ((white_pawn, "pawn_count"), (black_pawn, "pawn_count")):
            if counts.get(category, 0) > 8:
                add(Violation(kind, f"image {rec.image_id} has {counts.get(category, 0)} pawns of category {category}", rec.image_id))

        bucket = per_split.setdefault(rec.split, {"images": 0, "white_kings": 0, "black_kings": 0})
        bucket["images"] += 1
        bucket["white_kings"] += counts.get(white_king, 0)
        bucket["black_kings"] += counts.get(black_king, 0)

    for name, stats in per_split.items():
        if stats["images"] and (
            stats["white_kings"] != stats["images"] or stats["black_kings"] != stats["images"]
        ):
            add(
                Violation(
                    "split_king_total",
                    f"split {name}: {stats['images']} images but kings "
                    f"{stats['white_kings']}/{stats['black_kings']}",
                )
            )
    report.per_split = {name: stats for name, stats in per_split.items() if stats["images"]}
    return report
