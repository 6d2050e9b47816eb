from .schema import (
    AnnotationSet,
    BoxAnnotation,
    CornerAnnotation,
    ImageRecord,
    PieceAnnotation,
    ValidationReport,
    validate_annotations,
)
from .build import build_annotations, sample_games, split_games, VolumeError
from .chessred import LoadError, load_chessred
from .fetch import ChecksumError, DiskFullError, FetchError, NetworkError, fetch_dataset
from .render import BoardStyle, CameraConfig, RenderResult, render_dataset, render_synthetic

__all__ = [
    "AnnotationSet",
    "BoxAnnotation",
    "CornerAnnotation",
    "ImageRecord",
    "PieceAnnotation",
    "ValidationReport",
    "validate_annotations",
    "build_annotations",
    "sample_games",
    "split_games",
    "VolumeError",
    "LoadError",
    "load_chessred",
    "FetchError",
    "NetworkError",
    "ChecksumError",
    "DiskFullError",
    "fetch_dataset",
    "BoardStyle",
    "CameraConfig",
    "RenderResult",
    "render_synthetic",
    "render_dataset",
]
