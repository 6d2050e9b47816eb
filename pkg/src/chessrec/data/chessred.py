"""Ingestion of a published chess-recognition archive.

The exact field names of released archives vary, so loading goes through a
small adapter: category ids are reconciled against the canonical class table
by name, the annotation section may be a flat list or keyed sub-lists, and
split membership may live on the images or in a separate section.
"""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Optional

from ..pgn import GameRecord
from ..targets import ClassTable
from .schema import (
    AnnotationSet,
    BoxAnnotation,
    CornerAnnotation,
    ImageRecord,
    PieceAnnotation,
)

logger = logging.getLogger(__name__)

ANNOTATION_FILENAMES = ("annotations.json", "chessred_annotations.json", "annotation.json")


class LoadError(ValueError):
    pass


def _first(entry: dict, *keys, default=None):
    for key in keys:
        if key in entry:
            return entry[key]
    return default


def find_annotation_file(root: Path) -> Path:
    for name in ANNOTATION_FILENAMES:
        candidate = root / name
        if candidate.is_file():
            return candidate
    json_files = sorted(root.glob("*.json"))
    if len(json_files) == 1:
        return json_files[0]
    raise LoadError(
        f"no annotation file found under {root} (looked for {', '.join(ANNOTATION_FILENAMES)})"
    )


def _category_remap(categories: list, table: ClassTable) -> dict:
    """Source category id -> canonical class id, matched by name."""
    remap: dict = {}
    unknown = []
    for entry in categories:
        source_id = _first(entry, "id", "category_id")
        name = str(_first(entry, "name", default=""))
        piece = ClassTable.parse_category_name(name)
        if piece is None or source_id is None:
            unknown.append(entry)
            continue
        remap[source_id] = table.class_id(piece.color, piece.piece_type)
    if unknown:
        raise LoadError(f"{len(unknown)} categories could not be mapped: {unknown[:5]}")
    if len(remap) < 12:
        raise LoadError(f"expected 12 piece categories, mapped {len(remap)}")
    return remap


def _annotation_lists(section) -> tuple:
    """Split the annotation section into (pieces, boxes, corners) raw lists."""
    if isinstance(section, dict):
        return (
            list(section.get("pieces", [])),
            list(section.get("boxes", section.get("bboxes", []))),
            list(section.get("corners", [])),
        )
    pieces, boxes, corners = [], [], []
    for entry in section or []:
        if "chessboard_position" in entry or "position" in entry:
            pieces.append(entry)
        elif "bbox" in entry:
            boxes.append(entry)
        elif "corners" in entry:
            corners.append(entry)
    return pieces, boxes, corners


def load_chessred(root) -> AnnotationSet:
    """Load an archive rooted at ``root`` into an :class:`AnnotationSet`.

    Raises :class:`LoadError` (with counts) for a missing annotation file,
    annotations referencing unknown images, or unmappable category ids.
    Chess-invariant checking is separate; see ``validate_annotations``.
    """
    root = Path(root)
    if not root.is_dir():
        raise LoadError(f"dataset root {root} is not a directory")
    doc_path = find_annotation_file(root)
    with open(doc_path, encoding="utf-8") as handle:
        doc = json.load(handle)

    table = ClassTable.canonical()
    remap = _category_remap(doc.get("categories", []), table)
    identity_remap = all(k == v for k, v in remap.items())
    if not identity_remap:
        logger.info("remapping %d category ids onto the canonical table", len(remap))

    split_of_game: dict = {}
    splits_section = doc.get("splits", {})
    for split_name, members in splits_section.items():
        if isinstance(members, dict):
            members = members.get("game_ids", members.get("games", []))
        for game_id in members:
            split_of_game[game_id] = split_name

    images = []
    for entry in doc.get("images", []):
        image_id = _first(entry, "id", "image_id")
        game_id = _first(entry, "game_id", "game", default=-1)
        split = entry.get("split") or split_of_game.get(game_id, "unassigned")
        images.append(
            ImageRecord(
                image_id=image_id,
                file_name=_first(entry, "file_name", "path", "file", default=""),
                game_id=game_id,
                move_index=_first(entry, "move_index", "move_id", "move", default=0),
                device=_first(entry, "device", "camera"),
                width=_first(entry, "width", default=0),
                height=_first(entry, "height", default=0),
                split=split,
            )
        )
    known_images = {rec.image_id for rec in images}

    raw_pieces, raw_boxes, raw_corners = _annotation_lists(doc.get("annotations"))

    dangling = 0
    unknown_categories = 0
    pieces = []
    for i, entry in enumerate(raw_pieces):
        image_id = entry["image_id"]
        if image_id not in known_images:
            dangling += 1
            continue
        source_category = entry["category_id"]
        if source_category not in remap:
            unknown_categories += 1
            continue
        pieces.append(
            PieceAnnotation(
                ann_id=entry.get("id", i),
                image_id=image_id,
                category_id=remap[source_category],
                chessboard_position=_first(entry, "chessboard_position", "position"),
            )
        )
    boxes = []
    for i, entry in enumerate(raw_boxes):
        if entry["image_id"] not in known_images:
            dangling += 1
            continue
        category = entry.get("category_id")
        boxes.append(
            BoxAnnotation(
                ann_id=entry.get("id", i),
                image_id=entry["image_id"],
                category_id=remap.get(category, category if category is not None else -1),
                bbox=tuple(entry["bbox"]),
            )
        )
    corners = []
    for entry in raw_corners:
        if entry["image_id"] not in known_images:
            dangling += 1
            continue
        corner_map = entry["corners"]
        corners.append(
            CornerAnnotation(
                image_id=entry["image_id"],
                corners={name: tuple(xy) for name, xy in corner_map.items()},
            )
        )
    if dangling:
        raise LoadError(f"{dangling} annotations reference unknown image ids")
    if unknown_categories:
        raise LoadError(f"{unknown_categories} annotations carry unmapped category ids")

    games = {}
    for entry in doc.get("games", []):
        games[entry["id"]] = GameRecord(
            headers=dict(entry.get("headers", {})),
            moves=list(entry.get("moves", [])),
            device_tag=entry.get("device"),
        )

    aset = AnnotationSet(
        class_table=table,
        images=images,
        pieces=pieces,
        boxes=boxes,
        corners=corners,
        games=games,
    )
    totals = aset.split_totals()
    logger.info(
        "loaded %d images (%s), %d piece annotations, %d boxes, %d corner sets",
        len(images),
        ", ".join(f"{k}={v}" for k, v in sorted(totals.items())),
        len(pieces),
        len(boxes),
        len(corners),
    )
    return aset
