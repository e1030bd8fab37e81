import pytest

from segwords.classifier import UttSample
from segwords.corpus import compute_stats, pad_to, standardize
from segwords.features import extract_features
from segwords.labeling import (frame_labels, frame_len_samples, make_point_labels,
                               pad_frame_labels)
from segwords.synth import SynthSpec, synthesize_corpus

SR = 16000


def build_dataset(waveforms, annotations, stats, pad_len=None, frame_ms=25.0):
    """Waveforms + annotations -> UttSamples (standardize, pad, features, labels)."""
    frame_len = frame_len_samples(waveforms[0].sample_rate, frame_ms)
    out = []
    for w, ann in zip(waveforms, annotations):
        sw = standardize(w, stats)
        if pad_len is not None:
            sw = pad_to(sw, pad_len)
        feats = extract_features(sw, frame_len)
        points = make_point_labels(ann, sw.valid_len, sw.sample_rate)
        labels = pad_frame_labels(frame_labels(points, frame_len), feats.num_frames)
        out.append(UttSample(utterance_id=w.utterance_id, features=feats, labels=labels,
                             ref_times=ann.start_times(sw.sample_rate),
                             sample_rate=sw.sample_rate))
    return out


@pytest.fixture(scope="session")
def small_corpus():
    """40 seeded utterances, enough for fast pipeline-level tests."""
    return synthesize_corpus(SynthSpec(num_utterances=40, seed=7))


@pytest.fixture(scope="session")
def small_datasets(small_corpus):
    """(train, val) UttSample lists from the 40-utterance corpus."""
    waves, anns = small_corpus
    stats = compute_stats(waves[:30])
    pad_len = max(len(w) for w in waves)
    train = build_dataset(waves[:30], anns[:30], stats, pad_len)
    val = build_dataset(waves[30:], anns[30:], stats, pad_len)
    return train, val
