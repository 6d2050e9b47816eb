"""Synthetic board renderer: a projected 8x8 board with piece glyphs.

Deliberately 2-D projective (a textured quad plus glyphs), not a ray tracer:
its job is to exercise the learning loop at desk scale with exact ground
truth. Camera elevation spans top-view to oblique, the four board
orientations are supported via the camera azimuth, and every render is
deterministic under its jitter seed.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from ..board import BoardState, Color, PieceType, Square
from ..targets import ClassTable
from .schema import (
    AnnotationSet,
    BoxAnnotation,
    CornerAnnotation,
    PieceAnnotation,
)

_GLYPHS = {
    PieceType.KING: "♚",
    PieceType.QUEEN: "♛",
    PieceType.ROOK: "♜",
    PieceType.BISHOP: "♝",
    PieceType.KNIGHT: "♞",
    PieceType.PAWN: "♟",
}

_FONT_PATH: Optional[str] = None


def _font_path() -> str:
    global _FONT_PATH
    if _FONT_PATH is None:
        from matplotlib import font_manager

        _FONT_PATH = font_manager.findfont("DejaVu Sans")
    return _FONT_PATH


@dataclass(frozen=True)
class CameraConfig:
    """Viewpoint description; angles in degrees.

    ``orientation`` picks which side of the board faces the camera (0 =
    white's side nearest, i.e. a8 appears top-left); ``None`` draws a random
    orientation per render. Elevation 90 is a top view.
    """

    orientation: Optional[int] = 0
    elevation_range: tuple = (50.0, 80.0)
    azimuth_jitter: float = 25.0
    distance: float = 22.0  # board widths from the center; large = mild perspective
    jitter_seed: int = 0


@dataclass(frozen=True)
class BoardStyle:
    resolution: int = 128
    light_color: tuple = (240, 217, 181)
    dark_color: tuple = (181, 136, 99)
    border_color: tuple = (94, 60, 38)
    background_color: tuple = (52, 58, 66)
    white_piece_color: tuple = (252, 252, 252)
    black_piece_color: tuple = (24, 22, 20)
    mark_color: tuple = (235, 225, 210)
    draw_marks: bool = True  # file/rank labels on the border, like club boards
    piece_scale: float = 1.05
    brightness_range: tuple = (0.85, 1.12)
    margin_range: tuple = (0.03, 0.09)


@dataclass
class RenderResult:
    image: Image.Image
    pieces: list  # (square name, category id) ground truth
    boxes: list  # (category id, (x, y, w, h)) glyph extents in pixels
    corners: dict  # corner name -> (x, y) pixel position of the playing area


def _projection(camera: CameraConfig, style: BoardStyle, rng: random.Random):
    """World (board plane) -> pixel mapping as a closure over a homography."""
    orientation = camera.orientation
    if orientation is None:
        orientation = rng.randrange(4)
    azimuth = math.radians(
        90.0 * orientation + rng.uniform(-camera.azimuth_jitter, camera.azimuth_jitter)
    )
    elevation = math.radians(rng.uniform(*camera.elevation_range))
    distance = camera.distance * 8.0

    center = np.array([4.0, 4.0, 0.0])
    direction = np.array(
        [
            math.cos(elevation) * math.sin(azimuth),
            -math.cos(elevation) * math.cos(azimuth),
            math.sin(elevation),
        ]
    )
    eye = center + distance * direction
    forward = (center - eye) / np.linalg.norm(center - eye)
    up_hint = np.array([0.0, 0.0, 1.0])
    right = np.cross(forward, up_hint)
    right /= np.linalg.norm(right)
    up = np.cross(right, forward)

    focal = distance  # ~1 world unit per projected unit at the board center

    def raw(point_xy) -> np.ndarray:
        point = np.array([point_xy[0], point_xy[1], 0.0]) - eye
        x = float(point @ right)
        y = float(point @ up)
        z = float(point @ forward)
        return np.array([focal * x / z, -focal * y / z])

    # Fit the projected border bounding box into the frame with a margin.
    extent = 0.75
    outer = [(-extent, -extent), (8 + extent, -extent), (8 + extent, 8 + extent), (-extent, 8 + extent)]
    projected = np.array([raw(p) for p in outer])
    low = projected.min(axis=0)
    high = projected.max(axis=0)
    margin = rng.uniform(*style.margin_range)
    scale = style.resolution * (1 - 2 * margin) / float(max(high - low))
    offset = (style.resolution - scale * (high + low)) / 2.0

    def project(point_xy) -> tuple:
        u, v = raw(point_xy) * scale + offset
        return (float(u), float(v))

    return project, orientation


def _shade(color: tuple, brightness: float) -> tuple:
    return tuple(min(255, max(0, int(round(c * brightness)))) for c in color)


def render_synthetic(
    board: BoardState,
    camera: CameraConfig = CameraConfig(),
    style: BoardStyle = BoardStyle(),
    class_table: Optional[ClassTable] = None,
) -> RenderResult:
    """Render a board under the camera config; returns image plus ground truth.

    Identical (board, camera, style) inputs give byte-identical images.
    """
    table = class_table or ClassTable.canonical()
    rng = random.Random(camera.jitter_seed)
    project, _ = _projection(camera, style, rng)
    brightness = rng.uniform(*style.brightness_range)

    size = style.resolution
    image = Image.new("RGB", (size, size), _shade(style.background_color, brightness))
    draw = ImageDraw.Draw(image)

    extent = 0.62
    border = [(-extent, -extent), (8 + extent, -extent), (8 + extent, 8 + extent), (-extent, 8 + extent)]
    draw.polygon([project(p) for p in border], fill=_shade(style.border_color, brightness))

    for rank in range(8):
        for file in range(8):
            cell = [
                (file, rank),
                (file + 1, rank),
                (file + 1, rank + 1),
                (file, rank + 1),
            ]
            color = style.light_color if (file + rank) % 2 == 1 else style.dark_color
            draw.polygon([project(p) for p in cell], fill=_shade(color, brightness))

    # Projected cell height at the board center scales the glyph sizes.
    mid_a = project((4.0, 3.5))
    mid_b = project((4.0, 4.5))
    cell_px = math.dist(mid_a, mid_b)

    if style.draw_marks:
        mark_px = max(5, int(cell_px * 0.34))
        mark_font = ImageFont.truetype(_font_path(), mark_px)
        mark_color = _shade(style.mark_color, brightness)
        for file in range(8):
            letter = "abcdefgh"[file]
            for y in (-0.33, 8.33):
                draw.text(project((file + 0.5, y)), letter, font=mark_font, fill=mark_color, anchor="mm")
        for rank in range(8):
            digit = "12345678"[rank]
            for x in (-0.33, 8.33):
                draw.text(project((x, rank + 0.5)), digit, font=mark_font, fill=mark_color, anchor="mm")

    glyph_px = max(6, int(cell_px * style.piece_scale))
    glyph_font = ImageFont.truetype(_font_path(), glyph_px)
    stroke = max(1, glyph_px // 14)

    pieces_truth = []
    boxes = []
    # Painter's order: back of the scene (smaller v) first.
    placed = sorted(board.pieces(), key=lambda sp: project((sp[0].file + 0.5, sp[0].rank + 0.5))[1])
    for square, piece in placed:
        category = table.class_id(piece.color, piece.piece_type)
        pieces_truth.append((square.name, category))
        cx, cy = project((square.file + 0.5, square.rank + 0.5))
        cy -= glyph_px * 0.18  # pieces stand above the cell center
        fill = style.white_piece_color if piece.color is Color.WHITE else style.black_piece_color
        outline = style.black_piece_color if piece.color is Color.WHITE else style.white_piece_color
        glyph = _GLYPHS[piece.piece_type]
        draw.text(
            (cx, cy),
            glyph,
            font=glyph_font,
            fill=_shade(fill, brightness),
            anchor="mm",
            stroke_width=stroke,
            stroke_fill=_shade(outline, brightness),
        )
        left, top, right, bottom = draw.textbbox((cx, cy), glyph, font=glyph_font, anchor="mm", stroke_width=stroke)
        boxes.append((category, (left, top, right - left, bottom - top)))

    corners = {
        "bottom_left": project((0.0, 0.0)),  # a1 corner, white's perspective
        "bottom_right": project((8.0, 0.0)),  # h1
        "top_left": project((0.0, 8.0)),  # a8
        "top_right": project((8.0, 8.0)),  # h8
    }
    pieces_truth.sort()
    return RenderResult(image=image, pieces=pieces_truth, boxes=boxes, corners=corners)


def per_image_camera(camera: CameraConfig, seed: int, image_id: int) -> CameraConfig:
    """Stable per-image jitter seed derived from the dataset seed."""
    return replace(camera, jitter_seed=(seed * 1_000_003 + image_id) & 0x7FFFFFFF)


def render_dataset(
    aset: AnnotationSet,
    root,
    camera: CameraConfig = CameraConfig(),
    style: BoardStyle = BoardStyle(),
    seed: int = 0,
    with_boxes: bool = False,
) -> AnnotationSet:
    """Render every image record of an annotation set to PNG files.

    Positions come from replaying the referenced game up to the record's move
    index (they must match the piece annotations; the builder guarantees it).
    Returns a new set with image sizes updated and, when requested, box and
    corner annotations attached.
    """
    from ..pgn import replay_game

    root = Path(root)
    images = []
    boxes = []
    corners = []
    states_cache: dict = {}
    for rec in aset.images:
        game = aset.games.get(rec.game_id)
        if game is None:
            raise ValueError(f"image {rec.image_id} references unknown game {rec.game_id}")
        if rec.game_id not in states_cache:
            states_cache[rec.game_id] = replay_game(game)
        board = states_cache[rec.game_id][rec.move_index - 1]
        result = render_synthetic(
            board,
            per_image_camera(camera, seed, rec.image_id),
            style,
            aset.class_table,
        )
        out_path = root / rec.file_name
        out_path.parent.mkdir(parents=True, exist_ok=True)
        result.image.save(out_path, format="PNG")
        images.append(replace(rec, width=style.resolution, height=style.resolution))
        if with_boxes:
            for category, bbox in result.boxes:
                boxes.append(
                    BoxAnnotation(ann_id=len(boxes), image_id=rec.image_id, category_id=category, bbox=bbox)
                )
            corners.append(CornerAnnotation(image_id=rec.image_id, corners=result.corners))
    return AnnotationSet(
        class_table=aset.class_table,
        images=images,
        pieces=aset.pieces,
        boxes=boxes if with_boxes else aset.boxes,
        corners=corners if with_boxes else aset.corners,
        games=aset.games,
        build_failures=aset.build_failures,
    )
