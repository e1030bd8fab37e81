"""Binary per-utterance logits interchange.

Little-endian layout:

    magic "WSEG" | version u32 = 1 | num_frames u32 | num_classes u32 = 3
    | frame_duration_us u32 | utterance_id_len u16 | utterance_id (UTF-8)
    | payload num_frames x 3 float32, row-major, class order
      Begin, Inside, Outside

Rows are stored and kept in memory as float32, so write/read round trips
are bit-exact.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError
from .util import atomic_write

MAGIC = b"WSEG"
VERSION = 1
NUM_CLASSES = 3
_HEADER = struct.Struct("<4sIIIIH")


@dataclass(frozen=True)
class LogitsMatrix:
    """(m, 3) float32 per-frame class scores in temporal order."""

    rows: np.ndarray
    frame_duration_us: int
    utterance_id: str

    def __post_init__(self):
        rows = np.ascontiguousarray(self.rows, dtype=np.float32)
        object.__setattr__(self, "rows", rows)
        if rows.ndim != 2 or rows.shape[1] != NUM_CLASSES:
            raise ValueError("rows must be an (m, 3) array")
        if not np.all(np.isfinite(rows)):
            raise ValueError("logits must be finite")
        if self.frame_duration_us <= 0:
            raise ValueError("frame_duration_us must be positive")

    @property
    def num_frames(self) -> int:
        return self.rows.shape[0]


def encode_logits(l: LogitsMatrix) -> bytes:
    utt = l.utterance_id.encode("utf-8")
    if len(utt) > 0xFFFF:
        raise ValueError("utterance_id too long")
    header = _HEADER.pack(MAGIC, VERSION, l.num_frames, NUM_CLASSES,
                          l.frame_duration_us, len(utt))
    return header + utt + l.rows.astype("<f4").tobytes()


def decode_logits(blob: bytes, source: str = "<bytes>") -> LogitsMatrix:
    if len(blob) < _HEADER.size:
        raise InputError(f"{source}: truncated header")
    magic, version, num_frames, num_classes, frame_us, id_len = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise InputError(f"{source}: bad magic {magic!r}")
    if version != VERSION:
        raise InputError(f"{source}: unsupported version {version}")
    if num_classes != NUM_CLASSES:
        raise InputError(f"{source}: expected {NUM_CLASSES} classes, got {num_classes}")
    offset = _HEADER.size
    if len(blob) < offset + id_len:
        raise InputError(f"{source}: truncated utterance id")
    utt = blob[offset : offset + id_len].decode("utf-8")
    offset += id_len
    payload = blob[offset:]
    expected = num_frames * NUM_CLASSES * 4
    if len(payload) != expected:
        raise InputError(
            f"{source}: truncated payload ({len(payload)} bytes, expected {expected})"
        )
    rows = np.frombuffer(payload, dtype="<f4").reshape(num_frames, NUM_CLASSES)
    return LogitsMatrix(rows.copy(), frame_us, utt)


def write_logits(l: LogitsMatrix, path: str | Path) -> None:
    with atomic_write(path, "wb") as fh:
        fh.write(encode_logits(l))


def read_logits(path: str | Path) -> LogitsMatrix:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise InputError(f"unreadable logits file: {path} ({exc})")
    return decode_logits(blob, source=str(path))
