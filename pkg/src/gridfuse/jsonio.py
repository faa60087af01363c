"""Canonical JSON and atomic file output.

All machine-readable output goes through ``dumps``: keys sorted, floats
rendered with 17 significant digits (lossless for 64-bit reals), ASCII-only
escapes.  Identical values therefore serialize to identical bytes on every
platform, which is what makes reruns diffable.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile


def _render(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"non-finite float in canonical JSON: {obj!r}")
        return format(obj, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=True)
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_render(v) for v in obj) + "]"
    if isinstance(obj, dict):
        parts = []
        for key in sorted(obj):
            if not isinstance(key, str):
                raise TypeError(f"canonical JSON keys must be strings, got {key!r}")
            parts.append(json.dumps(key, ensure_ascii=True) + ":" + _render(obj[key]))
        return "{" + ",".join(parts) + "}"
    raise TypeError(f"cannot canonicalize {type(obj).__name__}")


def dumps(obj) -> str:
    return _render(obj)


def digest(obj) -> str:
    """Hex SHA-256 of the canonical rendering."""
    return hashlib.sha256(dumps(obj).encode("ascii")).hexdigest()


def write_bytes_atomic(path: str, data: bytes) -> None:
    """Write via a sibling temp file + rename so readers never see a torn file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_text_atomic(path: str, text: str) -> None:
    write_bytes_atomic(path, text.encode("utf-8"))


def write_json_atomic(path: str, obj) -> None:
    write_text_atomic(path, dumps(obj) + "\n")
