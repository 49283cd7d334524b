"""VCT container format and JSON-lines label files.

VCT is a minimal bit-exact binary layout for dense clips:

    magic   4 bytes  "VCT1"
    version u32 le   1
    T,H,W,C u32 le each
    dtype   u32 le   1 = 32-bit IEEE-754 little-endian, 2 = unsigned 8-bit
    payload T*H*W*C elements, row-major T->H->W->C

dtype 2 stores round(v*255) and reads back v/255, so it is a storage format
for pixel data only; dtype 1 round-trips arbitrary float32 values bit-exactly.

Labels on disk are JSON lines, one record per clip:
``{"id": "<clip id>", "label": [m0, m1, ...]}``.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Iterable

import numpy as np

from .clips import SoftLabel, VideoClip, validate_label
from .errors import (
    BadMagic,
    DimZero,
    TruncatedPayload,
    UnsupportedDtype,
    ValueOutOfRange,
    VersionUnsupported,
)

MAGIC = b"VCT1"
VERSION = 1
DTYPE_F32 = 1
DTYPE_U8 = 2

_HEADER = struct.Struct("<4sIIIIII")
HEADER_SIZE = _HEADER.size  # 28 bytes

_ELEMENT_SIZE = {DTYPE_F32: 4, DTYPE_U8: 1}


def write_vct(clip: VideoClip, dtype: int = DTYPE_F32) -> bytes:
    """Serialize a clip; dtype 2 quantizes [0,1] values to 8 bits."""
    if dtype not in _ELEMENT_SIZE:
        raise UnsupportedDtype(f"dtype code {dtype} not in {{1, 2}}")
    t, h, w, c = clip.shape
    header = _HEADER.pack(MAGIC, VERSION, t, h, w, c, dtype)
    if dtype == DTYPE_F32:
        payload = clip.data.tobytes()
    else:
        data = clip.data
        lo = float(data.min())
        hi = float(data.max())
        if not (np.isfinite(lo) and np.isfinite(hi)) or lo < 0.0 or hi > 1.0:
            raise ValueOutOfRange(
                f"dtype 2 requires values in [0,1], found range [{lo}, {hi}]"
            )
        payload = np.rint(data.astype(np.float64) * 255.0).astype(np.uint8).tobytes()
    return header + payload


def read_vct(data: bytes) -> VideoClip:
    """Parse VCT bytes back into a clip; 8-bit payloads are scaled by 1/255."""
    if len(data) < HEADER_SIZE:
        if data[:4] != MAGIC:
            raise BadMagic(f"magic {data[:4]!r} != {MAGIC!r}")
        raise TruncatedPayload(f"file is {len(data)} bytes, header needs {HEADER_SIZE}")
    magic, version, t, h, w, c, dtype = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagic(f"magic {magic!r} != {MAGIC!r}")
    if version != VERSION:
        raise VersionUnsupported(f"version {version} unsupported, expected {VERSION}")
    for name, dim in zip("THWC", (t, h, w, c)):
        if dim == 0:
            raise DimZero(f"dimension {name} is zero")
    if dtype not in _ELEMENT_SIZE:
        raise UnsupportedDtype(f"dtype code {dtype} not in {{1, 2}}")
    n = t * h * w * c
    expected = HEADER_SIZE + n * _ELEMENT_SIZE[dtype]
    if len(data) != expected:
        raise TruncatedPayload(
            f"payload: file has {len(data) - HEADER_SIZE} bytes, "
            f"header declares {expected - HEADER_SIZE}"
        )
    raw = data[HEADER_SIZE:]
    if dtype == DTYPE_F32:
        values = np.frombuffer(raw, dtype="<f4", count=n).astype(np.float32)
    else:
        values = np.frombuffer(raw, dtype=np.uint8, count=n).astype(np.float32) / np.float32(255)
    return VideoClip(values.reshape(t, h, w, c))


def write_vct_file(path: str | Path, clip: VideoClip, dtype: int = DTYPE_F32) -> None:
    Path(path).write_bytes(write_vct(clip, dtype))


def read_vct_file(path: str | Path) -> VideoClip:
    return read_vct(Path(path).read_bytes())


# --- JSON-lines labels -----------------------------------------------------


def dump_labels(records: Iterable[tuple[str, SoftLabel]]) -> str:
    lines = []
    for clip_id, label in records:
        lines.append(json.dumps({"id": clip_id, "label": label.masses.tolist()}))
    return "\n".join(lines) + "\n" if lines else ""


def write_labels_file(path: str | Path, records: Iterable[tuple[str, SoftLabel]]) -> None:
    Path(path).write_text(dump_labels(records))


def read_labels_file(path: str | Path) -> list[tuple[str, SoftLabel]]:
    records = []
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        rec = json.loads(line)
        if "id" not in rec or "label" not in rec:
            raise ValueError(f"label line {line_no}: needs 'id' and 'label' fields")
        records.append((str(rec["id"]), validate_label(rec["label"])))
    return records
