"""Dataset construction: game sampling, annotation extraction, splitting."""
from __future__ import annotations

import logging
import random
import re
from dataclasses import replace
from typing import Mapping, Optional, Sequence

from ..pgn import GameRecord, ReplayError, replay_game
from ..targets import ClassTable
from .schema import AnnotationSet, BuildFailure, ImageRecord, PieceAnnotation

logger = logging.getLogger(__name__)

_ECO_RE = re.compile(r"^[A-E]\d{2}$")
VOLUMES = "ABCDE"


class VolumeError(ValueError):
    """An ECO volume cannot supply the requested number of codes."""


def sample_games(
    eco_index: Mapping[str, Sequence[GameRecord]],
    per_volume: int,
    seed: int = 0,
) -> list:
    """Draw ``per_volume`` ECO codes per volume A-E, one game per code.

    Codes are drawn uniformly without replacement within each volume and each
    selected code is matched to one uniformly drawn candidate game. The draw
    is deterministic under ``seed``.
    """
    if per_volume < 0:
        raise ValueError("per_volume must be non-negative")
    for code, candidates in eco_index.items():
        if not _ECO_RE.match(code):
            raise ValueError(f"not an ECO code: {code!r}")
        if len(candidates) == 0:
            raise ValueError(f"ECO code {code} has no candidate games")
    rng = random.Random(seed)
    selected = []
    for volume in VOLUMES:
        codes = sorted(code for code in eco_index if code[0] == volume)
        if len(codes) < per_volume:
            raise VolumeError(
                f"volume {volume} has {len(codes)} codes, need {per_volume}"
            )
        for code in sorted(rng.sample(codes, per_volume)):
            selected.append(rng.choice(list(eco_index[code])))
    return selected


def build_annotations(
    games: Sequence[GameRecord],
    image_size: tuple = (800, 800),
    class_table: Optional[ClassTable] = None,
    file_pattern: str = "images/{game_id:03d}/{game_id:03d}_{move_index:04d}.png",
) -> AnnotationSet:
    """Derive per-move image records and piece annotations from games.

    Every half-move of every replayable game produces one image record whose
    piece annotations mirror the position after that half-move. Games that
    fail to replay are skipped and reported in ``build_failures``; the rest
    are unaffected.
    """
    table = class_table or ClassTable.canonical()
    aset = AnnotationSet(class_table=table)
    width, height = image_size
    image_id = 0
    ann_id = 0
    for game_id, game in enumerate(games):
        try:
            states = replay_game(game)
        except ReplayError as exc:
            failure = BuildFailure(game_id=game_id, ply=exc.ply, message=str(exc))
            aset.build_failures.append(failure)
            logger.warning("game %d failed to replay: %s", game_id, exc)
            continue
        device = game.device_tag or game.headers.get("Device")
        aset.games[game_id] = game
        for ply, state in enumerate(states, start=1):
            aset.images.append(
                ImageRecord(
                    image_id=image_id,
                    file_name=file_pattern.format(game_id=game_id, move_index=ply),
                    game_id=game_id,
                    move_index=ply,
                    device=device,
                    width=width,
                    height=height,
                )
            )
            for square, piece in state.pieces():
                aset.pieces.append(
                    PieceAnnotation(
                        ann_id=ann_id,
                        image_id=image_id,
                        category_id=table.class_id(piece.color, piece.piece_type),
                        chessboard_position=square.name,
                    )
                )
                ann_id += 1
            image_id += 1
    return aset


def _largest_remainder(total: int, ratios: Sequence[float]) -> list:
    exact = [total * r for r in ratios]
    counts = [int(x) for x in exact]
    remainder = total - sum(counts)
    by_fraction = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in by_fraction[:remainder]:
        counts[i] += 1
    return counts


def split_games(
    aset: AnnotationSet,
    ratios: tuple = (0.6, 0.2, 0.2),
    seed: int = 0,
) -> AnnotationSet:
    """Assign whole games to train/val/test, stratified by device tag.

    Per device the game counts match the ratios to within one game. Image
    split labels are induced from their game; no image is ever assigned
    directly. Deterministic under ``seed``.
    """
    if len(ratios) != 3:
        raise ValueError("ratios must be (train, val, test)")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)}")
    rng = random.Random(seed)

    by_device: dict = {}
    for game_id in aset.game_ids():
        device = aset.device_of_game(game_id) or ""
        by_device.setdefault(device, []).append(game_id)

    split_of_game: dict = {}
    wanted_splits = sum(1 for r in ratios if r > 0)
    for device in sorted(by_device):
        game_ids = sorted(by_device[device])
        if len(game_ids) < wanted_splits:
            logger.warning(
                "device %r has only %d games for %d splits; best-effort assignment",
                device,
                len(game_ids),
                wanted_splits,
            )
        rng.shuffle(game_ids)
        counts = _largest_remainder(len(game_ids), ratios)
        cursor = 0
        for split_name, count in zip(("train", "val", "test"), counts):
            for game_id in game_ids[cursor : cursor + count]:
                split_of_game[game_id] = split_name
            cursor += count

    images = [replace(rec, split=split_of_game.get(rec.game_id, "unassigned")) for rec in aset.images]
    return AnnotationSet(
        class_table=aset.class_table,
        images=images,
        pieces=aset.pieces,
        boxes=aset.boxes,
        corners=aset.corners,
        games=aset.games,
        build_failures=aset.build_failures,
    )
