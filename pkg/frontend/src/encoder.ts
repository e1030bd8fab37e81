/**
 * Deterministic spectral encoder.
 *
 * Stands in for a frozen pretrained acoustic encoder: it maps a waveform to
 * a sequence of hidden vectors at a 20 ms stride (the usual stride of
 * self-supervised speech models), one 25 ms analysis window per step.
 * Hidden dimension 16: twelve log triangular-band energies, log energy,
 * zero crossing rate, spectral centroid, and delta log energy.
 */

export interface HiddenStates {
  /** n x dim, row-major */
  data: Float64Array;
  n: number;
  dim: number;
  strideSamples: number;
  windowSamples: number;
}

export const ENCODER_NAME = "spectral-v1";
export const HIDDEN_DIM = 16;
const N_BANDS = 12;
const LOG_FLOOR = 1e-10;

function nextPow2(n: number): number {
  let p = 1;
  while (p < n) p *= 2;
  return p;
}

/** Real-input DFT power spectrum via an iterative radix-2 FFT. */
function powerSpectrum(frame: Float64Array, nfft: number): Float64Array {
  const re = new Float64Array(nfft);
  const im = new Float64Array(nfft);
  re.set(frame);
  // bit-reversal permutation
  for (let i = 1, j = 0; i < nfft; i++) {
    let bit = nfft >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j |= bit;
    if (i < j) {
      const t = re[i];
      re[i] = re[j];
      re[j] = t;
    }
  }
  for (let size = 2; size <= nfft; size <<= 1) {
    const half = size >> 1;
    const angle = (-2 * Math.PI) / size;
    const wRe = Math.cos(angle);
    const wIm = Math.sin(angle);
    for (let start = 0; start < nfft; start += size) {
      let curRe = 1;
      let curIm = 0;
      for (let j = start; j < start + half; j++) {
        const tr = curRe * re[j + half] - curIm * im[j + half];
        const ti = curRe * im[j + half] + curIm * re[j + half];
        re[j + half] = re[j] - tr;
        im[j + half] = im[j] - ti;
        re[j] += tr;
        im[j] += ti;
        const nextRe = curRe * wRe - curIm * wIm;
        curIm = curRe * wIm + curIm * wRe;
        curRe = nextRe;
      }
    }
  }
  const bins = nfft / 2 + 1;
  const power = new Float64Array(bins);
  for (let k = 0; k < bins; k++) power[k] = re[k] * re[k] + im[k] * im[k];
  return power;
}

function triangularBands(sampleRate: number, nfft: number): Float64Array[] {
  const bins = nfft / 2 + 1;
  const edges: number[] = [];
  for (let e = 0; e <= N_BANDS + 1; e++) edges.push((e * sampleRate) / 2 / (N_BANDS + 1));
  const weights: Float64Array[] = [];
  for (let b = 0; b < N_BANDS; b++) {
    const w = new Float64Array(bins);
    const [lo, mid, hi] = [edges[b], edges[b + 1], edges[b + 2]];
    for (let k = 0; k < bins; k++) {
      const f = (k * sampleRate) / nfft;
      const rising = (f - lo) / (mid - lo);
      const falling = (hi - f) / (hi - mid);
      w[k] = Math.max(0, Math.min(1, Math.min(rising, falling)));
    }
    weights.push(w);
  }
  return weights;
}

export function encode(samples: Float64Array, sampleRate: number): HiddenStates {
  const stride = Math.round(0.020 * sampleRate);
  const window = Math.round(0.025 * sampleRate);
  const nfft = nextPow2(window);
  const bands = triangularBands(sampleRate, nfft);
  const n = Math.max(1, Math.ceil(samples.length / stride));
  const data = new Float64Array(n * HIDDEN_DIM);
  const frame = new Float64Array(nfft);

  let prevLogEnergy = 0;
  for (let i = 0; i < n; i++) {
    const base = i * stride;
    frame.fill(0);
    const valid = Math.min(window, samples.length - base);
    for (let t = 0; t < valid; t++) frame[t] = samples[base + t];

    let energy = 0;
    let crossings = 0;
    for (let t = 0; t < window; t++) {
      energy += frame[t] * frame[t];
      if (t > 0 && frame[t] >= 0 !== frame[t - 1] >= 0) crossings++;
    }
    const logEnergy = Math.log(energy / window + LOG_FLOOR);
    const zcr = window > 1 ? crossings / (window - 1) : 0;

    const power = powerSpectrum(frame, nfft);
    let centroidNum = 0;
    let centroidDen = 0;
    for (let k = 0; k < power.length; k++) {
      centroidNum += k * power[k];
      centroidDen += power[k];
    }
    const centroid = centroidDen > 0 ? centroidNum / centroidDen / power.length : 0;

    const row = i * HIDDEN_DIM;
    for (let b = 0; b < N_BANDS; b++) {
      let acc = 0;
      const w = bands[b];
      for (let k = 0; k < power.length; k++) acc += w[k] * power[k];
      data[row + b] = Math.log(acc + LOG_FLOOR);
    }
    data[row + N_BANDS] = logEnergy;
    data[row + N_BANDS + 1] = zcr;
    data[row + N_BANDS + 2] = centroid;
    data[row + N_BANDS + 3] = i === 0 ? 0 : logEnergy - prevLogEnergy;
    prevLogEnergy = logEnergy;
  }
  return { data, n, dim: HIDDEN_DIM, strideSamples: stride, windowSamples: window };
}

/**
 * Linearly interpolate hidden states onto m target frames of frameLen
 * samples each. Target coordinates are frame centers; encoder rows sit at
 * their window centers.
 */
export function interpolateToFrames(h: HiddenStates, m: number, frameLen: number): Float64Array {
  const out = new Float64Array(m * h.dim);
  for (let j = 0; j < m; j++) {
    const center = (j + 0.5) * frameLen;
    let u = (center - h.windowSamples / 2) / h.strideSamples;
    u = Math.max(0, Math.min(h.n - 1, u));
    const i0 = Math.floor(u);
    const i1 = Math.min(h.n - 1, i0 + 1);
    const frac = u - i0;
    for (let d = 0; d < h.dim; d++) {
      out[j * h.dim + d] =
        (1 - frac) * h.data[i0 * h.dim + d] + frac * h.data[i1 * h.dim + d];
    }
  }
  return out;
}
