"""Frame probabilities to BIO labels to boundary timestamps.

Over-segmented Begin clusters (a by-product of train-time label
augmentation) collapse to one representative frame per cluster; the
timestamp convention is the frame center, which keeps the worst-case
quantization error at half a frame.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Waveform
from .errors import InputError
from .labeling import BEGIN, OUTSIDE, FrameLabelSeq
from .util import atomic_write


class SelectionStrategy(enum.Enum):
    FIRST = "first"
    MID = "mid"
    LAST = "last"

    @classmethod
    def parse(cls, text: str) -> "SelectionStrategy":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise InputError(f"unknown selection strategy {text!r}; "
                             "expected first, mid, or last")


@dataclass(frozen=True)
class BoundaryList:
    """Strictly increasing boundary times in seconds."""

    times: np.ndarray
    utterance_id: str = ""

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        object.__setattr__(self, "times", times)
        if times.ndim != 1:
            raise ValueError("times must be one-dimensional")
        if times.size and (np.any(times < 0) or np.any(np.diff(times) <= 0)):
            raise ValueError("times must be non-negative and strictly increasing")

    def __len__(self) -> int:
        return self.times.size


def decode(p, valid_frames: int, frame_len: int) -> FrameLabelSeq:
    """Per-frame argmax; ties break toward the lowest class code (Begin first).
    Frames at or beyond valid_frames are forced to Outside."""
    probs = np.asarray(p, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[1] != 3:
        raise ValueError("expected an (m, 3) probability matrix")
    labels = np.argmax(probs, axis=1).astype(np.int8)  # argmax takes the first max
    labels[valid_frames:] = OUTSIDE
    return FrameLabelSeq(labels, frame_len, valid_frames=min(valid_frames, labels.size))


def collapse_clusters(y: FrameLabelSeq, s: SelectionStrategy) -> list[int]:
    """One frame index per maximal run of consecutive Begin frames:
    the run's first, floor-mid, or last frame."""
    begins = y.labels == BEGIN
    out = []
    j = 0
    m = len(begins)
    while j < m:
        if begins[j]:
            a = j
            while j + 1 < m and begins[j + 1]:
                j += 1
            b = j
            if s is SelectionStrategy.FIRST:
                out.append(a)
            elif s is SelectionStrategy.LAST:
                out.append(b)
            else:
                out.append((a + b) // 2)
        j += 1
    return out


def frames_to_times(idx: Sequence[int], frame_len: int, sample_rate: int,
                    origin: str = "center", utterance_id: str = "") -> BoundaryList:
    """Map frame indices to seconds: (i + 0.5) * frame_len / rate for the
    default frame-center convention, i * frame_len / rate for "onset"."""
    frame_s = frame_len / sample_rate
    return boundary_times_from_frames(idx, frame_s, origin=origin,
                                      utterance_id=utterance_id)


def boundary_times_from_frames(idx: Sequence[int], frame_duration_s: float,
                               origin: str = "center", utterance_id: str = "") -> BoundaryList:
    if origin not in ("center", "onset"):
        raise ValueError(f"unknown origin {origin!r}")
    shift = 0.5 if origin == "center" else 0.0
    arr = np.asarray(list(idx), dtype=np.float64)
    return BoundaryList((arr + shift) * frame_duration_s, utterance_id=utterance_id)


def segment(w: Waveform, b: BoundaryList) -> list[tuple[float, float]]:
    """Cut list of (start_s, end_s) word segments: boundary k to boundary
    k+1, the last one ending at the utterance's (unpadded) end."""
    duration = w.duration_s
    times = [float(t) for t in b.times]
    if times and times[-1] > duration:
        raise ValueError("boundary beyond utterance duration")
    out = []
    for k, start in enumerate(times):
        end = times[k + 1] if k + 1 < len(times) else duration
        out.append((start, end))
    return out


BOUNDARY_HEADER = ["utterance_id", "time_s"]
SEGMENT_HEADER = ["utterance_id", "start_s", "end_s"]


def write_boundaries(path: str | Path, boundaries: Iterable[BoundaryList]) -> None:
    """CSV rows utterance_id,time_s with 6 decimal places."""
    with atomic_write(path) as fh:
        fh.write(",".join(BOUNDARY_HEADER) + "\n")
        for b in boundaries:
            for t in b.times:
                fh.write(f"{b.utterance_id},{t:.6f}\n")


def read_boundaries(path: str | Path) -> dict[str, BoundaryList]:
    """Read a boundary CSV back into id -> BoundaryList (possibly empty)."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != BOUNDARY_HEADER:
                raise InputError(f"{path}:1: expected header {','.join(BOUNDARY_HEADER)}")
            per_utt: dict[str, list[float]] = {}
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 2:
                    raise InputError(f"{path}:{lineno}: malformed row {row!r}")
                try:
                    per_utt.setdefault(row[0], []).append(float(row[1]))
                except ValueError:
                    raise InputError(f"{path}:{lineno}: bad time {row[1]!r}")
    except OSError as exc:
        raise InputError(f"unreadable boundary file: {path} ({exc})")
    return {utt: BoundaryList(np.array(times), utterance_id=utt)
            for utt, times in per_utt.items()}


def write_segments(path: str | Path, segments: dict[str, list[tuple[float, float]]]) -> None:
    with atomic_write(path) as fh:
        fh.write(",".join(SEGMENT_HEADER) + "\n")
        for utt in segments:
            for start, end in segments[utt]:
                fh.write(f"{utt},{start:.6f},{end:.6f}\n")
