import numpy as np
import pytest

from segwords.corpus import Waveform
from segwords.features import FEATURE_DIM, N_BANDS, band_weights, extract_features, next_pow2
from segwords.kernels import LOG_FLOOR

SR = 16000
FRAME = 400


def test_shape_matches_frame_count():
    w = Waveform(np.random.default_rng(0).normal(0, 1, 4321), SR)
    f = extract_features(w, FRAME)
    assert f.rows.shape == (-(-4321 // FRAME), FEATURE_DIM)
    assert f.frame_len == FRAME


def test_silence_frame_hits_log_floor():
    w = Waveform(np.full(FRAME, 0.0), SR, valid_len=FRAME)
    # Waveform forbids empty/NaN but all-zero is fine
    f = extract_features(w, FRAME)
    assert f.rows[0, 0] == pytest.approx(np.log(LOG_FLOOR))
    assert f.rows[0, 1] == 0.0  # no sign changes when zeros count as positive


def test_pure_tone_band_argmax():
    # oracle: the expected band is the one whose triangular weight at the
    # tone frequency is largest, computed from the filterbank itself
    freq = 1000.0
    nfft = next_pow2(FRAME)
    w = band_weights(SR, nfft)
    bin_f = np.arange(nfft // 2 + 1) * (SR / nfft)
    expected_band = int(np.argmax(w[:, np.argmin(np.abs(bin_f - freq))]))

    t = np.arange(FRAME) / SR
    tone = 0.8 * np.sin(2 * np.pi * freq * t)
    f = extract_features(Waveform(tone, SR), FRAME)
    band_cols = f.rows[0, 2 : 2 + N_BANDS]
    assert int(np.argmax(band_cols)) == expected_band


def test_delta_log_energy():
    quiet = np.full(FRAME, 1e-4)
    loud = np.full(FRAME, 0.5)
    f = extract_features(Waveform(np.concatenate([quiet, loud]), SR), FRAME)
    assert f.rows[0, -1] == 0.0
    assert f.rows[1, -1] == pytest.approx(f.rows[1, 0] - f.rows[0, 0])
    assert f.rows[1, -1] > 1.0


def test_deterministic():
    x = np.random.default_rng(5).normal(0, 1, 2000)
    a = extract_features(Waveform(x, SR), FRAME)
    b = extract_features(Waveform(x.copy(), SR), FRAME)
    assert np.array_equal(a.rows, b.rows)


def test_filterbank_partition():
    w = band_weights(SR, 512)
    assert w.shape == (N_BANDS, 257)
    assert np.all(w >= 0) and np.all(w <= 1)
    # every interior frequency is covered by at least one band
    interior = slice(2, 255)
    assert np.all(w[:, interior].sum(axis=0) > 0)
