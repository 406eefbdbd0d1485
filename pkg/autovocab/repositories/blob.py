"""Helpers shared by the little-endian binary formats."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from ..exceptions import MagicMismatchError, MissingResourceError, SchemaError, TruncatedPayloadError


def read_bytes(path: Path, what: str) -> bytes:
    path = Path(path)
    if not path.is_file():
        raise MissingResourceError(f'{what} not found: {path}')
    return path.read_bytes()


def read_json(path: Path, what: str) -> Any:
    raw = read_bytes(path, what)
    try:
        return json.loads(raw.decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f'{what} {path} is not valid JSON: {exc}') from exc


def check_magic(data: bytes, magic: bytes, header_size: int, path: Path) -> None:
    """Magic first, then header length; a short file whose prefix matches is truncated."""
    prefix = data[:len(magic)]
    if not magic.startswith(prefix) or (len(data) >= len(magic) and prefix != magic):
        raise MagicMismatchError(f'{path}: expected magic {magic!r}, found {prefix!r}')
    if len(data) < header_size:
        raise TruncatedPayloadError(
            f'{path}: header needs {header_size} bytes, found {len(data)}'
        )


def require_length(data: bytes, expected: int, path: Path) -> None:
    if len(data) < expected:
        raise TruncatedPayloadError(f'{path}: expected {expected} bytes, found {len(data)}')
    if len(data) > expected:
        raise SchemaError(f'{path}: {len(data) - expected} trailing bytes after a {expected}-byte payload')


def read_u32(data: bytes, offset: int) -> int:
    return int(np.frombuffer(data, dtype='<u4', count=1, offset=offset)[0])


def u32(value: int) -> bytes:
    return np.asarray([value], dtype='<u4').tobytes()
