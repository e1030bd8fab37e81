"""Audio and annotation ingestion, corpus statistics, padding.

Waveforms are mono float64 arrays in [-1, 1] straight off the WAV decoder;
no resampling happens anywhere in the toolkit, so mixed sample rates within
one corpus are rejected.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np
from scipy.io import wavfile

from .errors import InputError
from .util import atomic_write


class WordSpan(NamedTuple):
    start_sample: int
    end_sample: int
    word: str


@dataclass(frozen=True)
class Waveform:
    """Mono utterance audio. `valid_len` tracks the pre-padding length."""

    samples: np.ndarray
    sample_rate: int
    utterance_id: str = ""
    valid_len: int = -1

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a non-empty 1-d array")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples contain non-finite values")
        if self.valid_len < 0:
            object.__setattr__(self, "valid_len", samples.size)
        elif self.valid_len > samples.size:
            raise ValueError("valid_len exceeds sample count")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        """Duration of the real (unpadded) audio in seconds."""
        return self.valid_len / self.sample_rate


@dataclass(frozen=True)
class WordAnnotationSeq:
    """Word intervals in sample units, sorted, non-overlapping (touching ok)."""

    entries: tuple[WordSpan, ...]

    def __post_init__(self):
        entries = tuple(WordSpan(int(s), int(e), str(w)) for s, e, w in self.entries)
        object.__setattr__(self, "entries", entries)
        prev = None
        for span in entries:
            if span.start_sample < 0 or span.start_sample >= span.end_sample:
                raise ValueError(f"bad interval {span}: need 0 <= start < end")
            if prev is not None:
                if span.start_sample < prev.start_sample:
                    raise ValueError("entries not sorted by start_sample")
                if span.start_sample < prev.end_sample:
                    raise ValueError(f"overlapping intervals {prev} and {span}")
            prev = span

    def __len__(self) -> int:
        return len(self.entries)

    def start_times(self, sample_rate: int) -> np.ndarray:
        """Word-start boundaries in seconds."""
        return np.array([s.start_sample / sample_rate for s in self.entries])


@dataclass(frozen=True)
class StandardizationStats:
    """Pooled mean/std so longer utterances contribute proportionally."""

    mean: float
    std: float
    total_samples: int

    def __post_init__(self):
        if not self.std > 0:
            raise ValueError("std must be positive")
        if self.total_samples <= 0:
            raise ValueError("total_samples must be positive")


def load_wav(path: str | Path) -> Waveform:
    """Read a PCM WAV (16/24/32-bit int or 32-bit float), first channel only.

    Integer samples are scaled by the type's full range (int16 by 1/32768),
    so amplitudes land in [-1, 1]. The header sample rate is kept as is.
    """
    path = Path(path)
    try:
        rate, data = wavfile.read(str(path))
    except FileNotFoundError:
        raise InputError(f"unreadable file: {path} (not found)")
    except Exception as exc:
        raise InputError(f"unreadable file: {path} ({exc})")
    if data.ndim == 2:
        data = data[:, 0]
    if data.size == 0:
        raise InputError(f"zero-length audio: {path}")
    if data.dtype == np.int16:
        samples = data / 32768.0
    elif data.dtype == np.int32:
        # scipy widens 24-bit PCM into int32, so one scale covers both
        samples = data / 2147483648.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise InputError(f"unsupported encoding {data.dtype} in {path}")
    return Waveform(samples, int(rate), utterance_id=path.stem)


def write_wav(path: str | Path, w: Waveform) -> None:
    """Write 16-bit PCM. Amplitudes are clipped to [-1, 1) before scaling."""
    scaled = np.clip(w.samples, -1.0, 32767.0 / 32768.0)
    pcm = np.round(scaled * 32768.0).astype(np.int16)
    buf = io.BytesIO()
    wavfile.write(buf, w.sample_rate, pcm)
    with atomic_write(path, "wb") as fh:
        fh.write(buf.getvalue())


CSV_HEADER = ["utterance_id", "start_sample", "end_sample", "word"]


def _spans_from_rows(rows: Iterable[tuple[int, str, str, str]], source: str) -> WordAnnotationSeq:
    spans = []
    for lineno, start_s, end_s, word in rows:
        try:
            start, end = int(start_s), int(end_s)
        except ValueError:
            raise InputError(f"{source}:{lineno}: malformed line (non-integer bounds)")
        if start >= end:
            raise InputError(f"{source}:{lineno}: start >= end ({start} >= {end})")
        if start < 0:
            raise InputError(f"{source}:{lineno}: negative start sample")
        spans.append((start, end, word))
    spans.sort(key=lambda s: s[0])
    try:
        return WordAnnotationSeq(tuple(WordSpan(*s) for s in spans))
    except ValueError as exc:
        raise InputError(f"{source}: {exc}")


def parse_annotations(path: str | Path, format: str, utterance_id: str | None = None) -> WordAnnotationSeq:
    """Parse one utterance's word annotations.

    `timit_wrd` lines are "start_sample end_sample word". `csv` files carry
    the utterance_id,start_sample,end_sample,word header; pass utterance_id
    to select one utterance, otherwise the file must contain exactly one.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"annotation file not found: {path}")
    if format == "timit_wrd":
        rows = []
        for lineno, line in enumerate(path.read_text().splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise InputError(f"{path}:{lineno}: malformed line {line!r}")
            rows.append((lineno, parts[0], parts[1], parts[2]))
        return _spans_from_rows(rows, str(path))
    if format == "csv":
        corpus = read_annotation_corpus(path)
        if utterance_id is not None:
            if utterance_id not in corpus:
                raise InputError(f"{path}: no annotations for utterance {utterance_id!r}")
            return corpus[utterance_id]
        if len(corpus) != 1:
            raise InputError(
                f"{path}: expected a single utterance, found {len(corpus)}; "
                "pass utterance_id or use read_annotation_corpus"
            )
        return next(iter(corpus.values()))
    raise InputError(f"unknown annotation format {format!r}")


def read_annotation_corpus(path: str | Path) -> dict[str, WordAnnotationSeq]:
    """Read a multi-utterance annotation CSV into id -> WordAnnotationSeq."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"annotation file not found: {path}")
    per_utt: dict[str, list] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise InputError(f"{path}:1: expected header {','.join(CSV_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise InputError(f"{path}:{lineno}: malformed line {row!r}")
            per_utt.setdefault(row[0], []).append((lineno, row[1], row[2], row[3]))
    return {utt: _spans_from_rows(rows, str(path)) for utt, rows in sorted(per_utt.items())}


def write_annotations(path: str | Path, ann: WordAnnotationSeq, format: str = "timit_wrd",
                      utterance_id: str = "") -> None:
    """Serialize annotations; parse_annotations(write_annotations(x)) == x."""
    if format == "timit_wrd":
        with atomic_write(path) as fh:
            for span in ann.entries:
                fh.write(f"{span.start_sample} {span.end_sample} {span.word}\n")
    elif format == "csv":
        write_annotation_corpus(path, {utterance_id: ann})
    else:
        raise InputError(f"unknown annotation format {format!r}")


def write_annotation_corpus(path: str | Path, corpus: dict[str, WordAnnotationSeq]) -> None:
    with atomic_write(path, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for utt in sorted(corpus):
            for span in corpus[utt].entries:
                writer.writerow([utt, span.start_sample, span.end_sample, span.word])


def compute_stats(waveforms: Iterable[Waveform]) -> StandardizationStats:
    """Pooled mean and population std over every sample of every waveform.

    Two passes for accuracy: mean from the pooled sum, then the pooled
    squared deviation. Raises on a constant corpus (zero variance) and on
    mixed sample rates, which the no-resampling rule forbids.
    """
    waveforms = list(waveforms)
    if not waveforms:
        raise ValueError("need at least one waveform")
    rates = {w.sample_rate for w in waveforms}
    if len(rates) > 1:
        raise InputError(f"mixed sample rates in corpus: {sorted(rates)}")
    total = sum(len(w) for w in waveforms)
    if total < 2:
        raise ValueError("need at least two samples to compute stats")
    mean = sum(float(np.sum(w.samples)) for w in waveforms) / total
    sq_dev = sum(float(np.sum((w.samples - mean) ** 2)) for w in waveforms)
    std = float(np.sqrt(sq_dev / total))
    if std == 0.0:
        raise InputError("zero variance: corpus is constant")
    return StandardizationStats(mean=mean, std=std, total_samples=total)


def standardize(w: Waveform, stats: StandardizationStats) -> Waveform:
    """Map every sample x to (x - mean) / std."""
    return replace(w, samples=(w.samples - stats.mean) / stats.std)


def pad_to(w: Waveform, target_len: int) -> Waveform:
    """Append zeros up to target_len; valid_len keeps the original length."""
    if target_len < len(w):
        raise ValueError(f"target_len {target_len} < waveform length {len(w)}")
    if target_len == len(w):
        return w
    samples = np.zeros(target_len)
    samples[: len(w)] = w.samples
    return replace(w, samples=samples, valid_len=w.valid_len)


def write_stats(path: str | Path, stats: StandardizationStats) -> None:
    with atomic_write(path) as fh:
        fh.write(f"mean={stats.mean!r}\nstd={stats.std!r}\ntotal={stats.total_samples}\n")


def read_stats(path: str | Path) -> StandardizationStats:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"unreadable stats file: {path} ({exc})")
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InputError(f"{path}:{lineno}: expected key=value")
        values[key.strip()] = value.strip()
    try:
        return StandardizationStats(
            mean=float(values["mean"]), std=float(values["std"]),
            total_samples=int(values["total"]),
        )
    except (KeyError, ValueError) as exc:
        raise InputError(f"{path}: bad stats file ({exc})")
