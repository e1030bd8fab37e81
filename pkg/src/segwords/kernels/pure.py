"""Pure numpy implementations of the per-sample kernels.

`segwords._ext` (Cython) mirrors these functions with identical semantics;
`segwords.kernels` picks one implementation at import time.
"""

from __future__ import annotations

import numpy as np

LOG_FLOOR = 1e-10


def _check_geometry(n_samples: int, frame_len: int) -> int:
    if frame_len < 1:
        raise ValueError("frame_len must be >= 1")
    if n_samples < 1:
        raise ValueError("empty sample array")
    return -(-n_samples // frame_len)  # ceil division


def frame_features(samples, frame_len: int, band_weights) -> np.ndarray:
    """Per-frame features over non-overlapping frames of `frame_len` samples.

    Columns: log energy, zero crossing rate, one log triangular-band
    spectral energy per filterbank row, delta log energy (first frame 0).
    The last frame is zero padded; zero crossings treat 0 as positive.

    `band_weights` is an (n_bands, nfft//2 + 1) filterbank; nfft is inferred
    from the bin count and must be a power of two >= frame_len.

    Returns an (m, 2 + n_bands + 1) float64 array with m = ceil(n/frame_len).
    """
    x = np.ascontiguousarray(samples, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("samples must be one-dimensional")
    w = np.ascontiguousarray(band_weights, dtype=np.float64)
    if w.ndim != 2:
        raise ValueError("band_weights must be two-dimensional")
    n_bands, n_bins = w.shape
    nfft = 2 * (n_bins - 1)
    if nfft < frame_len or nfft & (nfft - 1):
        raise ValueError(f"filterbank implies nfft={nfft}, need a power of two >= frame_len")

    m = _check_geometry(x.shape[0], frame_len)
    padded = np.zeros(m * frame_len)
    padded[: x.shape[0]] = x
    frames = padded.reshape(m, frame_len)

    energy = np.mean(frames * frames, axis=1)
    log_energy = np.log(energy + LOG_FLOOR)

    nonneg = frames >= 0.0
    zcr = np.count_nonzero(nonneg[:, 1:] != nonneg[:, :-1], axis=1) / (frame_len - 1) \
        if frame_len > 1 else np.zeros(m)

    spectrum = np.fft.rfft(frames, n=nfft, axis=1)
    power = spectrum.real ** 2 + spectrum.imag ** 2
    bands = np.log(power @ w.T + LOG_FLOOR)

    delta = np.diff(log_energy, prepend=log_energy[:1])

    out = np.empty((m, 3 + n_bands))
    out[:, 0] = log_energy
    out[:, 1] = zcr
    out[:, 2 : 2 + n_bands] = bands
    out[:, 2 + n_bands] = delta
    return out


def frame_label_codes(point_codes, frame_len: int, majority: bool = True) -> np.ndarray:
    """Reduce per-sample codes {0 start, 1 inside, 2 outside} to per-frame codes.

    A frame is Begin (0) when it contains any start sample; otherwise Inside
    (1) when inside samples win the in-range aggregation rule (majority:
    2*count >= in-range length; any: count > 0); otherwise Outside (2).
    Only real samples count for the last, partial frame.
    """
    codes = np.ascontiguousarray(point_codes, dtype=np.int8)
    if codes.ndim != 1:
        raise ValueError("point_codes must be one-dimensional")
    n = codes.shape[0]
    m = _check_geometry(n, frame_len)

    padded = np.full(m * frame_len, 2, dtype=np.int8)
    padded[:n] = codes
    grid = padded.reshape(m, frame_len)

    has_start = np.any(grid == 0, axis=1)
    n_inside = np.count_nonzero(grid == 1, axis=1)
    in_range = np.full(m, frame_len, dtype=np.int64)
    in_range[m - 1] = n - (m - 1) * frame_len
    if majority:
        is_inside = 2 * n_inside >= in_range
    else:
        is_inside = n_inside > 0

    out = np.full(m, 2, dtype=np.int8)
    out[is_inside] = 1
    out[has_start] = 0
    return out
