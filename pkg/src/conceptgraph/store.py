"""Versioned binary container for intermediate artifacts.

Every artifact file starts with an 8-byte magic, a 1-byte kind tag and a
little-endian uint16 format version, followed by kind-specific payload
sections. Loaders refuse files whose magic, kind, or version do not match,
so stale intermediates fail loudly instead of being misread.

Payload sections are written as a 4-byte little-endian length followed by
raw bytes; writers emit sections in a fixed order so identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

from conceptgraph.errors import StoreError

MAGIC = b"CONCEPTG"
VERSION = 1

KIND_CORPUS = b"C"
KIND_BIPARTITE = b"B"
KIND_PROJECTION = b"W"

_HEADER = struct.Struct("<8sc H")
_SECTION_LEN = struct.Struct("<I")


def write_artifact(path: str | Path, kind: bytes, sections: list[bytes]) -> None:
    """Write `sections` to `path` under the magic/kind/version header."""
    if len(kind) != 1:
        raise ValueError("kind tag must be a single byte")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, kind, VERSION))
        for blob in sections:
            fh.write(_SECTION_LEN.pack(len(blob)))
            fh.write(blob)


def peek_kind(path: str | Path) -> bytes:
    """Return the kind tag of an artifact without loading its payload."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            head = fh.read(_HEADER.size)
    except OSError as exc:
        raise StoreError(f"cannot read {path}: {exc}") from exc
    if len(head) < _HEADER.size:
        raise StoreError(f"{path}: truncated header")
    magic, kind, version = _HEADER.unpack(head)
    if magic != MAGIC:
        raise StoreError(f"{path}: not a conceptgraph artifact (bad magic)")
    if version != VERSION:
        raise StoreError(
            f"{path}: format version {version} not supported (expected {VERSION})"
        )
    return kind


def read_artifact(path: str | Path, kind: bytes) -> list[bytes]:
    """Read back the payload sections of an artifact, verifying the header."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise StoreError(f"cannot read {path}: {exc}") from exc
    if len(data) < _HEADER.size:
        raise StoreError(f"{path}: truncated header")
    magic, got_kind, version = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise StoreError(f"{path}: not a conceptgraph artifact (bad magic)")
    if got_kind != kind:
        raise StoreError(
            f"{path}: wrong artifact kind {got_kind!r}, expected {kind!r}"
        )
    if version != VERSION:
        raise StoreError(
            f"{path}: format version {version} not supported (expected {VERSION})"
        )
    sections = []
    offset = _HEADER.size
    while offset < len(data):
        if offset + _SECTION_LEN.size > len(data):
            raise StoreError(f"{path}: truncated section length")
        (length,) = _SECTION_LEN.unpack_from(data, offset)
        offset += _SECTION_LEN.size
        if offset + length > len(data):
            raise StoreError(f"{path}: truncated section payload")
        sections.append(data[offset : offset + length])
        offset += length
    return sections


def pack_json(obj: object) -> bytes:
    """Canonical compressed JSON blob (sorted keys, no whitespace)."""
    import json

    text = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return zlib.compress(text.encode("utf-8"), level=6)


def unpack_json(blob: bytes) -> object:
    import json

    try:
        return json.loads(zlib.decompress(blob).decode("utf-8"))
    except (zlib.error, ValueError) as exc:
        raise StoreError(f"corrupt JSON section: {exc}") from exc
