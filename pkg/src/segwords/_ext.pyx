# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Mirrors segwords.kernels.pure; see that module for the
full contracts. Single pass over the samples, no per-frame temporaries;
frames are transformed two at a time through one complex FFT."""

import numpy as np

from libc.math cimport log

cdef double LOG_FLOOR = 1e-10


cdef void _fft(double[::1] re, double[::1] im, Py_ssize_t n,
               double[::1] tw_re, double[::1] tw_im) noexcept nogil:
    # iterative radix-2 decimation in time; input already bit-reversed
    cdef Py_ssize_t size = 2, half, step, start, j, k
    cdef double tr, ti
    while size <= n:
        half = size >> 1
        step = n / size
        start = 0
        while start < n:
            k = 0
            for j in range(start, start + half):
                tr = tw_re[k] * re[j + half] - tw_im[k] * im[j + half]
                ti = tw_re[k] * im[j + half] + tw_im[k] * re[j + half]
                re[j + half] = re[j] - tr
                im[j + half] = im[j] - ti
                re[j] = re[j] + tr
                im[j] = im[j] + ti
                k += step
            start += size
        size <<= 1


cdef inline double _energy_zcr(const double[::1] x, Py_ssize_t base, Py_ssize_t valid,
                               Py_ssize_t frame_len, double* zcr) noexcept nogil:
    cdef Py_ssize_t t, crossings = 0
    cdef double v, acc
    cdef bint cur_sign, prev_sign
    v = x[base]
    acc = v * v
    prev_sign = v >= 0.0
    for t in range(1, frame_len):
        v = x[base + t] if t < valid else 0.0
        acc += v * v
        cur_sign = v >= 0.0
        crossings += cur_sign != prev_sign
        prev_sign = cur_sign
    zcr[0] = (<double> crossings) / (frame_len - 1) if frame_len > 1 else 0.0
    return acc


cdef inline void _band_rows(const double[:, ::1] w, const double[::1] pw,
                            double[:, ::1] out, Py_ssize_t f,
                            Py_ssize_t n_bands, Py_ssize_t n_bins) noexcept nogil:
    cdef Py_ssize_t b, k
    cdef double acc
    for b in range(n_bands):
        acc = 0.0
        for k in range(n_bins):
            acc += w[b, k] * pw[k]
        out[f, 2 + b] = log(acc + LOG_FLOOR)


def frame_features(samples, Py_ssize_t frame_len, band_weights):
    x_arr = np.ascontiguousarray(samples, dtype=np.float64)
    if x_arr.ndim != 1:
        raise ValueError("samples must be one-dimensional")
    w_arr = np.ascontiguousarray(band_weights, dtype=np.float64)
    if w_arr.ndim != 2:
        raise ValueError("band_weights must be two-dimensional")

    cdef Py_ssize_t n = x_arr.shape[0]
    cdef Py_ssize_t n_bands = w_arr.shape[0]
    cdef Py_ssize_t n_bins = w_arr.shape[1]
    cdef Py_ssize_t nfft = 2 * (n_bins - 1)
    if frame_len < 1:
        raise ValueError("frame_len must be >= 1")
    if n < 1:
        raise ValueError("empty sample array")
    if nfft < frame_len or (nfft & (nfft - 1)) != 0:
        raise ValueError(
            f"filterbank implies nfft={nfft}, need a power of two >= frame_len"
        )

    cdef Py_ssize_t m = (n + frame_len - 1) // frame_len
    out_arr = np.empty((m, 3 + n_bands))

    # bit-reversal permutation and twiddle tables, shared by every frame
    brv_arr = np.zeros(nfft, dtype=np.intp)
    cdef Py_ssize_t[::1] brv = brv_arr
    cdef Py_ssize_t i, j, bit
    j = 0
    for i in range(1, nfft):
        bit = nfft >> 1
        while j & bit:
            j ^= bit
            bit >>= 1
        j |= bit
        brv[i] = j
    k_idx = np.arange(nfft // 2, dtype=np.float64)
    tw_re_arr = np.cos(2.0 * np.pi * k_idx / nfft)
    tw_im_arr = -np.sin(2.0 * np.pi * k_idx / nfft)

    cdef double[::1] x = x_arr
    cdef double[:, ::1] w = w_arr
    cdef double[:, ::1] out = out_arr
    cdef double[::1] tw_re = tw_re_arr
    cdef double[::1] tw_im = tw_im_arr

    re_arr = np.zeros(nfft)
    im_arr = np.zeros(nfft)
    pwa_arr = np.zeros(n_bins)
    pwb_arr = np.zeros(n_bins)
    cdef double[::1] re = re_arr
    cdef double[::1] im = im_arr
    cdef double[::1] pwa = pwa_arr
    cdef double[::1] pwb = pwb_arr

    cdef Py_ssize_t f, t, k, kr, base_a, base_b, valid_a, valid_b
    cdef double zcr, ar, ai, br, bi

    with nogil:
        f = 0
        while f < m:
            base_a = f * frame_len
            valid_a = frame_len if base_a + frame_len <= n else n - base_a
            out[f, 0] = log(_energy_zcr(x, base_a, valid_a, frame_len, &zcr)
                            / frame_len + LOG_FLOOR)
            out[f, 1] = zcr

            if f + 1 < m:
                # two real frames through one complex FFT: frame f as the
                # real part, frame f+1 as the imaginary part
                base_b = base_a + frame_len
                valid_b = frame_len if base_b + frame_len <= n else n - base_b
                out[f + 1, 0] = log(_energy_zcr(x, base_b, valid_b, frame_len, &zcr)
                                    / frame_len + LOG_FLOOR)
                out[f + 1, 1] = zcr

                for t in range(nfft):
                    j = brv[t]
                    re[t] = x[base_a + j] if j < valid_a else 0.0
                    im[t] = x[base_b + j] if j < valid_b else 0.0
                _fft(re, im, nfft, tw_re, tw_im)
                for k in range(n_bins):
                    kr = (nfft - k) & (nfft - 1)
                    ar = 0.5 * (re[k] + re[kr])
                    ai = 0.5 * (im[k] - im[kr])
                    br = 0.5 * (im[k] + im[kr])
                    bi = 0.5 * (re[kr] - re[k])
                    pwa[k] = ar * ar + ai * ai
                    pwb[k] = br * br + bi * bi
                _band_rows(w, pwa, out, f, n_bands, n_bins)
                _band_rows(w, pwb, out, f + 1, n_bands, n_bins)
                f += 2
            else:
                for t in range(nfft):
                    j = brv[t]
                    re[t] = x[base_a + j] if j < valid_a else 0.0
                    im[t] = 0.0
                _fft(re, im, nfft, tw_re, tw_im)
                for k in range(n_bins):
                    pwa[k] = re[k] * re[k] + im[k] * im[k]
                _band_rows(w, pwa, out, f, n_bands, n_bins)
                f += 1

        out[0, 2 + n_bands] = 0.0
        for f in range(1, m):
            out[f, 2 + n_bands] = out[f, 0] - out[f - 1, 0]

    return out_arr


def frame_label_codes(point_codes, Py_ssize_t frame_len, bint majority=True):
    codes_arr = np.ascontiguousarray(point_codes, dtype=np.int8)
    if codes_arr.ndim != 1:
        raise ValueError("point_codes must be one-dimensional")
    cdef Py_ssize_t n = codes_arr.shape[0]
    if frame_len < 1:
        raise ValueError("frame_len must be >= 1")
    if n < 1:
        raise ValueError("empty sample array")
    cdef Py_ssize_t m = (n + frame_len - 1) // frame_len

    out_arr = np.empty(m, dtype=np.int8)
    cdef const signed char[::1] codes = codes_arr
    cdef signed char[::1] out = out_arr

    cdef Py_ssize_t f, t, base, valid, n_start, n_inside
    cdef signed char c
    with nogil:
        for f in range(m):
            base = f * frame_len
            valid = frame_len if base + frame_len <= n else n - base
            n_start = 0
            n_inside = 0
            for t in range(valid):
                c = codes[base + t]
                n_start += c == 0
                n_inside += c == 1
            if n_start > 0:
                out[f] = 0
            elif (majority and 2 * n_inside >= valid) or (not majority and n_inside > 0):
                out[f] = 1
            else:
                out[f] = 2
    return out_arr
