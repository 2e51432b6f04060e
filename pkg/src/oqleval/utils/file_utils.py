"""Unified file utility functions shared by the cache, corpus and reports."""

import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Optional, Union

logger = logging.getLogger(__name__)


def calculate_text_hash(*parts: str) -> str:
    """
    Calculate SHA-256 hash of one or more text parts.

    Args:
        parts: Strings joined with a newline before hashing

    Returns:
        SHA-256 hash as hex string
    """
    hash_sha256 = hashlib.sha256()
    hash_sha256.update("\n".join(parts).encode("utf-8"))
    return hash_sha256.hexdigest()


def calculate_content_hash(record: Any) -> str:
    """Hash a JSON-compatible record independent of key order."""
    canonical = json.dumps(record, sort_keys=True, ensure_ascii=False, default=str)
    return calculate_text_hash(canonical)


def atomic_write_text(path: Union[str, Path], content: str) -> Path:
    """
    Write text to a file atomically (temp file + rename).

    Args:
        path: Destination path; parent directories are created
        content: Text to write (UTF-8)

    Returns:
        The destination path
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)

    fd, tmp_name = tempfile.mkstemp(
        prefix=f".{target.name}.", suffix=".tmp", dir=str(target.parent)
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(content)
        os.replace(tmp_name, target)
    except OSError:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise

    logger.debug(f"Wrote {target}")
    return target


def atomic_write_lines(path: Union[str, Path], lines: Iterable[str]) -> Path:
    """Write newline-terminated lines atomically."""
    return atomic_write_text(path, "".join(f"{line}\n" for line in lines))


def read_text(path: Union[str, Path]) -> Optional[str]:
    """Read a UTF-8 file, returning None when it cannot be read."""
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        logger.debug(f"Cannot read {path}: {e}")
        return None
