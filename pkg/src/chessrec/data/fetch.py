"""Archive ingestion client: HTTPS download with resume, verify, unpack."""
from __future__ import annotations

import errno
import hashlib
import json
import logging
import shutil
import tarfile
import zipfile
from pathlib import Path
from typing import Optional

import requests
from filelock import FileLock

from .chessred import LoadError, find_annotation_file

logger = logging.getLogger(__name__)

_MARKER_NAME = ".fetch_complete.json"
_CHUNK = 1 << 20


class FetchError(Exception):
    pass


class NetworkError(FetchError):
    pass


class ChecksumError(FetchError):
    pass


class DiskFullError(FetchError):
    pass


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(_CHUNK), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _locate_root(destination: Path) -> Path:
    """Directory containing the annotation file, possibly one level down."""
    candidates = [destination] + sorted(p for p in destination.iterdir() if p.is_dir())
    for candidate in candidates:
        try:
            find_annotation_file(candidate)
            return candidate
        except LoadError:
            continue
    raise FetchError(f"no annotation file found after unpacking into {destination}")


def _download(url: str, part: Path, timeout: float) -> None:
    headers = {}
    offset = part.stat().st_size if part.exists() else 0
    if offset:
        headers["Range"] = f"bytes={offset}-"
        logger.info("resuming download at byte %d", offset)
    try:
        with requests.get(url, headers=headers, stream=True, timeout=timeout) as response:
            if offset and response.status_code == 200:
                # server ignored the range request; restart from scratch
                offset = 0
            elif offset and response.status_code == 416:
                return  # already complete
            elif response.status_code not in (200, 206):
                raise NetworkError(f"GET {url} returned {response.status_code}")
            mode = "ab" if offset else "wb"
            with open(part, mode) as handle:
                for chunk in response.iter_content(chunk_size=_CHUNK):
                    handle.write(chunk)
    except requests.RequestException as exc:
        raise NetworkError(f"download failed: {exc}") from exc
    except OSError as exc:
        if exc.errno == errno.ENOSPC:
            raise DiskFullError(f"disk full while writing {part}") from exc
        raise


def _unpack(archive: Path, destination: Path) -> None:
    if zipfile.is_zipfile(archive):
        with zipfile.ZipFile(archive) as zf:
            zf.extractall(destination)
    elif tarfile.is_tarfile(archive):
        with tarfile.open(archive) as tf:
            tf.extractall(destination)
    else:
        raise FetchError(f"{archive} is neither a zip nor a tar archive")


def fetch_dataset(
    url: str,
    destination,
    sha256: Optional[str] = None,
    timeout: float = 60.0,
) -> Path:
    """Download, verify, and unpack a dataset archive; returns the data root.

    Idempotent: when the destination already holds a completed fetch the
    recorded root is returned without touching the network. Interrupted
    downloads resume via HTTP range requests. A checksum mismatch removes the
    partial file and raises :class:`ChecksumError`. Concurrent calls against
    one destination serialize on a file lock.
    """
    destination = Path(destination)
    destination.mkdir(parents=True, exist_ok=True)
    marker = destination / _MARKER_NAME

    with FileLock(str(destination / ".fetch.lock")):
        if marker.exists():
            recorded = json.loads(marker.read_text())
            root = Path(recorded["root"])
            if root.is_dir():
                logger.info("dataset already fetched at %s", root)
                return root
            marker.unlink()

        part = destination / "archive.part"
        _download(url, part, timeout)
        if sha256 is not None:
            actual = _sha256(part)
            if actual != sha256:
                part.unlink()
                raise ChecksumError(f"sha256 mismatch: expected {sha256}, got {actual}")
        try:
            _unpack(part, destination)
        except OSError as exc:
            if exc.errno == errno.ENOSPC:
                raise DiskFullError(f"disk full while unpacking into {destination}") from exc
            raise
        part.unlink()
        root = _locate_root(destination)
        marker.write_text(json.dumps({"url": url, "root": str(root)}))
        logger.info("fetched dataset to %s", root)
        return root
