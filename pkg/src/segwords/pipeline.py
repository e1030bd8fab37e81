"""Corpus-on-disk handling and dataset assembly for the CLI.

A corpus directory holds manifest.csv (utterance_id,wav_path,split),
annotations.csv, and the WAV files. Assembly standardizes waveforms with
train-split statistics, pads to the longest waveform, and derives features,
frame labels, and reference boundary times per utterance.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifier import UttSample
from .corpus import (StandardizationStats, Waveform, WordAnnotationSeq, compute_stats,
                     load_wav, pad_to, read_annotation_corpus, standardize)
from .errors import InputError
from .features import extract_features
from .labeling import frame_labels, frame_len_samples, make_point_labels, pad_frame_labels
from .util import atomic_write, parallel_map

MANIFEST_HEADER = ["utterance_id", "wav_path", "split"]
SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class ManifestEntry:
    utterance_id: str
    wav_path: str
    split: str


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != MANIFEST_HEADER:
                raise InputError(f"{path}:1: expected header {','.join(MANIFEST_HEADER)}")
            entries = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 3:
                    raise InputError(f"{path}:{lineno}: malformed row {row!r}")
                entries.append(ManifestEntry(*row))
    except OSError as exc:
        raise InputError(f"unreadable manifest: {path} ({exc})")
    if not entries:
        raise InputError(f"{path}: empty manifest")
    return entries


def write_manifest(path: str | Path, entries: list[ManifestEntry]) -> None:
    with atomic_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        for e in entries:
            writer.writerow([e.utterance_id, e.wav_path, e.split])


@dataclass(frozen=True)
class LoadedCorpus:
    entries: list[ManifestEntry]
    waveforms: dict[str, Waveform]
    annotations: dict[str, WordAnnotationSeq]
    sample_rate: int

    def split_ids(self, split: str | None) -> list[str]:
        return [e.utterance_id for e in self.entries if split is None or e.split == split]


def load_corpus(corpus_dir: str | Path, manifest_name: str = "manifest.csv",
                annotations_name: str = "annotations.csv") -> LoadedCorpus:
    corpus_dir = Path(corpus_dir)
    entries = read_manifest(corpus_dir / manifest_name)
    annotations = read_annotation_corpus(corpus_dir / annotations_name)

    def _load(e: ManifestEntry) -> Waveform:
        w = load_wav(corpus_dir / e.wav_path)
        return Waveform(w.samples, w.sample_rate, utterance_id=e.utterance_id)

    waveforms = dict(zip((e.utterance_id for e in entries), parallel_map(_load, entries)))
    rates = {w.sample_rate for w in waveforms.values()}
    if len(rates) != 1:
        raise InputError(f"mixed sample rates in corpus: {sorted(rates)}")
    for e in entries:
        if e.utterance_id not in annotations:
            raise InputError(f"missing annotations for utterance {e.utterance_id}")
    return LoadedCorpus(entries, waveforms, annotations, rates.pop())


def build_samples(corpus: LoadedCorpus, split: str | None, stats: StandardizationStats,
                  frame_ms: float, aggregation: str = "majority",
                  pad_len: int | None = None) -> list[UttSample]:
    """Standardize, optionally pad, then extract features and labels."""
    frame_len = frame_len_samples(corpus.sample_rate, frame_ms)
    ids = corpus.split_ids(split)

    def _build(utt: str) -> UttSample:
        w = standardize(corpus.waveforms[utt], stats)
        if pad_len is not None:
            w = pad_to(w, pad_len)
        ann = corpus.annotations[utt]
        feats = extract_features(w, frame_len)
        points = make_point_labels(ann, w.valid_len, corpus.sample_rate)
        labels = pad_frame_labels(frame_labels(points, frame_len, aggregation),
                                  feats.num_frames)
        return UttSample(utterance_id=utt, features=feats, labels=labels,
                         ref_times=ann.start_times(corpus.sample_rate),
                         sample_rate=corpus.sample_rate)

    return parallel_map(_build, ids)


def prepare_datasets(corpus: LoadedCorpus, frame_ms: float, aggregation: str = "majority"
                     ) -> tuple[dict[str, list[UttSample]], StandardizationStats]:
    """Per-split datasets with train-fitted standardization and global padding."""
    train_ids = corpus.split_ids("train")
    if not train_ids:
        raise InputError("manifest has no train utterances")
    stats = compute_stats([corpus.waveforms[u] for u in train_ids])
    pad_len = max(len(w) for w in corpus.waveforms.values())
    datasets = {}
    for split in SPLITS:
        if corpus.split_ids(split):
            datasets[split] = build_samples(corpus, split, stats, frame_ms,
                                            aggregation, pad_len)
    return datasets, stats


def reference_boundaries(corpus: LoadedCorpus, split: str | None):
    """True word-start times per utterance of a split."""
    from .postprocess import BoundaryList

    out = {}
    for utt in corpus.split_ids(split):
        times = corpus.annotations[utt].start_times(corpus.sample_rate)
        out[utt] = BoundaryList(np.asarray(times), utterance_id=utt)
    return out
