"""Per-frame acoustic features for the built-in classifier.

Eleven dimensions per 25 ms frame: log energy, zero crossing rate, eight
log triangular-band spectral energies (linear band edges from 0 to
Nyquist, power spectrum over the frame zero-padded to the next power of
two), and the delta of log energy against the previous frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .corpus import Waveform

N_BANDS = 8
FEATURE_DIM = 2 + N_BANDS + 1


def next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


@lru_cache(maxsize=8)
def band_weights(sample_rate: int, nfft: int, n_bands: int = N_BANDS) -> np.ndarray:
    """Triangular filterbank, (n_bands, nfft//2 + 1), peaks evenly spaced
    on a linear frequency axis."""
    edges = np.linspace(0.0, sample_rate / 2.0, n_bands + 2)
    freqs = np.arange(nfft // 2 + 1) * (sample_rate / nfft)
    w = np.zeros((n_bands, freqs.size))
    for b in range(n_bands):
        lo, mid, hi = edges[b], edges[b + 1], edges[b + 2]
        rising = (freqs - lo) / (mid - lo)
        falling = (hi - freqs) / (hi - mid)
        w[b] = np.clip(np.minimum(rising, falling), 0.0, 1.0)
    return w


@dataclass(frozen=True)
class FeatureMatrix:
    """(m, d) feature rows for one utterance's m frames."""

    rows: np.ndarray
    frame_len: int

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        object.__setattr__(self, "rows", rows)
        if rows.ndim != 2:
            raise ValueError("rows must be a 2-d array")
        if self.frame_len < 1:
            raise ValueError("frame_len must be >= 1")
        if not np.all(np.isfinite(rows)):
            raise ValueError("feature values must be finite")

    @property
    def num_frames(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


def extract_features(w: Waveform, frame_len: int) -> FeatureMatrix:
    """Features for every frame of the waveform, padded frames included."""
    nfft = next_pow2(frame_len)
    weights = band_weights(w.sample_rate, nfft)
    rows = kernels.frame_features(w.samples, frame_len, weights)
    return FeatureMatrix(rows, frame_len)
