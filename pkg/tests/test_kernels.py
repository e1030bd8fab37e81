import numpy as np
import pytest

from segwords.features import band_weights
from segwords.kernels import pure, select_backend

compiled = None
try:
    compiled, _ = select_backend("compiled")
except ImportError:
    pass

needs_compiled = pytest.mark.skipif(compiled is None, reason="extension not built")


@needs_compiled
@pytest.mark.parametrize("n,frame_len", [(1, 400), (399, 400), (400, 400),
                                         (401, 400), (7000, 400), (16000, 400),
                                         (5000, 128), (777, 200)])
def test_frame_features_backends_agree(n, frame_len):
    rng = np.random.default_rng(n)
    x = rng.normal(0, 1, n)
    nfft = 1
    while nfft < frame_len:
        nfft *= 2
    w = band_weights(16000, nfft)
    a = pure.frame_features(x, frame_len, w)
    b = compiled.frame_features(x, frame_len, w)
    assert a.shape == b.shape
    np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-9)


@needs_compiled
@pytest.mark.parametrize("majority", [True, False])
def test_frame_label_codes_backends_agree(majority):
    rng = np.random.default_rng(0)
    for n, frame_len in [(1, 4), (4000, 400), (4001, 400), (57, 8)]:
        codes = rng.integers(0, 3, n).astype(np.int8)
        a = pure.frame_label_codes(codes, frame_len, majority)
        b = compiled.frame_label_codes(codes, frame_len, majority)
        np.testing.assert_array_equal(a, b)


def test_backend_selection():
    mod, name = select_backend("pure")
    assert name == "pure" and mod is pure
    mod, name = select_backend("auto")
    assert name in ("pure", "compiled")
    with pytest.raises(ValueError):
        select_backend("gpu")


def test_pure_rejects_bad_filterbank():
    w = np.zeros((8, 100))  # implies nfft=198, not a power of two
    with pytest.raises(ValueError, match="power of two"):
        pure.frame_features(np.zeros(500), 400, w)
