"""Word annotations to per-sample pre-labels to framed BIO labels.

Class codes are fixed: Begin = 0, Inside = 1, Outside = 2, at both the
sample and the frame level. Frames are non-overlapping (hop = length).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import kernels
from .corpus import WordAnnotationSeq
from .errors import InputError
from .util import atomic_write

BEGIN, INSIDE, OUTSIDE = 0, 1, 2


@dataclass(frozen=True)
class PointLabelSeq:
    """Per-sample codes, same length as the (unpadded) waveform."""

    labels: np.ndarray
    sample_rate: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int8)
        object.__setattr__(self, "labels", labels)
        if labels.ndim != 1 or labels.size == 0:
            raise ValueError("labels must be a non-empty 1-d array")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    def __len__(self) -> int:
        return self.labels.size


@dataclass(frozen=True)
class FrameLabelSeq:
    """Per-frame codes; frames at index >= valid_frames cover only padding."""

    labels: np.ndarray
    frame_len: int
    valid_frames: int = -1

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int8)
        object.__setattr__(self, "labels", labels)
        if labels.ndim != 1 or labels.size == 0:
            raise ValueError("labels must be a non-empty 1-d array")
        if self.frame_len < 1:
            raise ValueError("frame_len must be >= 1")
        if not np.all((labels >= 0) & (labels <= 2)):
            raise ValueError("labels must be class codes 0, 1, or 2")
        if self.valid_frames < 0:
            object.__setattr__(self, "valid_frames", labels.size)
        elif self.valid_frames > labels.size:
            raise ValueError("valid_frames exceeds frame count")
        if np.any(labels[self.valid_frames:] != OUTSIDE):
            raise ValueError("frames beyond valid_frames must be Outside")

    def __len__(self) -> int:
        return self.labels.size

    @property
    def num_frames(self) -> int:
        return self.labels.size


@dataclass(frozen=True)
class AugmentConfig:
    """Begin-label spread radius in frames; 0 disables augmentation."""

    radius: int = 1

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be >= 0")


def frame_len_samples(sample_rate: int, frame_ms: float = 25.0) -> int:
    """Samples per frame: round(frame_ms/1000 * sample_rate); 400 at 16 kHz."""
    if sample_rate <= 0:
        raise ValueError("sample_rate must be positive")
    n = int(round(frame_ms / 1000.0 * sample_rate))
    if n < 1:
        raise ValueError(
            f"frame shorter than one sample ({frame_ms} ms at {sample_rate} Hz)"
        )
    return n


def make_point_labels(ann: WordAnnotationSeq, num_samples: int, sample_rate: int
                      ) -> PointLabelSeq:
    """Start sample -> Begin, samples strictly inside a word -> Inside,
    everything else Outside. A start sample shared with a preceding word's
    end stays Begin."""
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    for span in ann.entries:
        if span.end_sample > num_samples:
            raise ValueError(
                f"annotation exceeds waveform length: {span} vs {num_samples} samples"
            )
    labels = np.full(num_samples, OUTSIDE, dtype=np.int8)
    for span in ann.entries:
        labels[span.start_sample + 1 : span.end_sample] = INSIDE
    for span in ann.entries:
        labels[span.start_sample] = BEGIN
    return PointLabelSeq(labels, sample_rate)


def frame_labels(p: PointLabelSeq, frame_len: int, aggregation: str = "majority"
                 ) -> FrameLabelSeq:
    """Reduce point labels to ceil(len/frame_len) frame labels.

    Begin wins whenever the frame contains a start sample. Otherwise the
    frame is Inside under the chosen aggregation over its in-range samples:
    "majority" (at least half Inside) or "any" (one Inside sample suffices).
    """
    if aggregation not in ("majority", "any"):
        raise ValueError(f"unknown aggregation {aggregation!r}")
    codes = kernels.frame_label_codes(p.labels, frame_len, aggregation == "majority")
    return FrameLabelSeq(codes, frame_len)


def pad_frame_labels(y: FrameLabelSeq, total_frames: int) -> FrameLabelSeq:
    """Extend with Outside frames up to total_frames (padded-audio region)."""
    if total_frames < len(y):
        raise ValueError("total_frames smaller than existing frame count")
    if total_frames == len(y):
        return y
    labels = np.full(total_frames, OUTSIDE, dtype=np.int8)
    labels[: len(y)] = y.labels
    return FrameLabelSeq(labels, y.frame_len, valid_frames=y.valid_frames)


def augment_labels(y: FrameLabelSeq, cfg: AugmentConfig) -> FrameLabelSeq:
    """Mark every frame within `radius` of a Begin frame as Begin.

    Train-time only; apply exactly once (a second application widens the
    clusters again). The input is not mutated.
    """
    if cfg.radius == 0:
        return y
    labels = y.labels.copy()
    m = labels.size
    for j in np.flatnonzero(y.labels == BEGIN):
        labels[max(0, j - cfg.radius) : min(m, j + cfg.radius + 1)] = BEGIN
    return replace(y, labels=labels)


def write_labels(path: str | Path, labeled: dict[str, FrameLabelSeq]) -> None:
    """One line per utterance: id, tab, space-separated class codes."""
    with atomic_write(path) as fh:
        for utt in labeled:
            codes = " ".join(str(int(c)) for c in labeled[utt].labels)
            fh.write(f"{utt}\t{codes}\n")


def read_labels(path: str | Path, frame_len: int) -> dict[str, FrameLabelSeq]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"unreadable label file: {path} ({exc})")
    out: dict[str, FrameLabelSeq] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        utt, sep, codes = line.partition("\t")
        if not sep:
            raise InputError(f"{path}:{lineno}: expected utterance_id<TAB>codes")
        try:
            labels = np.array([int(c) for c in codes.split()], dtype=np.int8)
            out[utt] = FrameLabelSeq(labels, frame_len)
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}")
    return out
