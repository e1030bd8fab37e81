/**
 * Helper trainer for the linear head.
 *
 * Consumes the primary toolkit's artifacts: a manifest (utterance_id,
 * wav_path), a frame-label TSV (id<TAB>codes, augmented train labels work
 * as-is), and optionally the standardization stats file. Features are
 * z-scored during optimization and the normalization is folded back into
 * the projection weights, so the exported head needs no extra state.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { HIDDEN_DIM, encode, interpolateToFrames } from "./encoder.js";
import { LinearHead, initHead } from "./head.js";
import { ExportError, readManifest, readStats } from "./export.js";
import { readWavMono } from "./wav.js";

export interface TrainHeadOptions {
  manifestPath: string;
  labelsPath: string;
  outPath: string;
  statsPath?: string;
  frameMs: number;
  hiddenDim: number;
  seed: number;
  learningRate: number;
  epochs: number;
  onEpoch?: (epoch: number, loss: number) => void;
}

interface Example {
  features: Float64Array; // m x dim
  labels: Int8Array;      // m
  m: number;
}

export function readLabelsTsv(labelsPath: string): Map<string, Int8Array> {
  const out = new Map<string, Int8Array>();
  const text = fs.readFileSync(labelsPath, "utf-8");
  for (const line of text.split("\n")) {
    if (!line.trim()) continue;
    const tab = line.indexOf("\t");
    if (tab < 0) throw new ExportError(`${labelsPath}: expected id<TAB>codes`);
    const codes = line.slice(tab + 1).trim().split(/\s+/).map(Number);
    if (codes.some((c) => !(c === 0 || c === 1 || c === 2))) {
      throw new ExportError(`${labelsPath}: class codes must be 0/1/2`);
    }
    out.set(line.slice(0, tab), Int8Array.from(codes));
  }
  return out;
}

function collectExamples(opts: TrainHeadOptions): Example[] {
  const entries = readManifest(opts.manifestPath);
  const labels = readLabelsTsv(opts.labelsPath);
  const stats = opts.statsPath ? readStats(opts.statsPath) : null;
  const manifestDir = path.dirname(opts.manifestPath);
  const examples: Example[] = [];
  for (const e of entries) {
    const lab = labels.get(e.utteranceId);
    if (!lab) continue; // labels file may cover a single split
    const wavPath = path.isAbsolute(e.wavPath) ? e.wavPath
      : path.join(manifestDir, e.wavPath);
    const { samples, sampleRate } = readWavMono(wavPath);
    if (stats) {
      for (let i = 0; i < samples.length; i++) {
        samples[i] = (samples[i] - stats.mean) / stats.std;
      }
    }
    const frameLen = Math.round((opts.frameMs / 1000) * sampleRate);
    const m = Math.ceil(samples.length / frameLen);
    if (lab.length < m) {
      throw new ExportError(
        `${e.utteranceId}: ${lab.length} label frames for ${m} audio frames`);
    }
    const hidden = encode(samples, sampleRate);
    examples.push({
      features: interpolateToFrames(hidden, m, frameLen),
      labels: lab.subarray(0, m), // labels beyond m only cover corpus padding
      m,
    });
  }
  if (examples.length === 0) {
    throw new ExportError("no manifest utterance has labels; nothing to train on");
  }
  return examples;
}

export function trainHead(opts: TrainHeadOptions): LinearHead {
  const d = HIDDEN_DIM;
  const h = opts.hiddenDim;
  const examples = collectExamples(opts);

  // per-dimension z-score over all frames
  const mean = new Float64Array(d);
  const std = new Float64Array(d);
  let total = 0;
  for (const ex of examples) {
    for (let j = 0; j < ex.m; j++) {
      for (let p = 0; p < d; p++) mean[p] += ex.features[j * d + p];
    }
    total += ex.m;
  }
  for (let p = 0; p < d; p++) mean[p] /= total;
  for (const ex of examples) {
    for (let j = 0; j < ex.m; j++) {
      for (let p = 0; p < d; p++) {
        const v = ex.features[j * d + p] - mean[p];
        std[p] += v * v;
      }
    }
  }
  for (let p = 0; p < d; p++) {
    std[p] = Math.sqrt(std[p] / total);
    if (std[p] < 1e-8) std[p] = 1;
  }
  for (const ex of examples) {
    for (let j = 0; j < ex.m; j++) {
      for (let p = 0; p < d; p++) {
        ex.features[j * d + p] = (ex.features[j * d + p] - mean[p]) / std[p];
      }
    }
  }

  const head = initHead(d, h, "spectral-v1", opts.seed);
  const proj = head.proj.map((row) => row.slice());
  const projBias = head.projBias.slice();
  const cls = head.cls.map((row) => row.slice());
  const clsBias = head.clsBias.slice();

  const hiddenVec = new Float64Array(h);
  const probs = new Float64Array(3);
  for (let epoch = 1; epoch <= opts.epochs; epoch++) {
    const gProj = head.proj.map((row) => row.map(() => 0));
    const gProjBias = new Float64Array(h);
    const gCls = head.cls.map((row) => row.map(() => 0));
    const gClsBias = new Float64Array(3);
    let loss = 0;

    for (const ex of examples) {
      for (let j = 0; j < ex.m; j++) {
        for (let q = 0; q < h; q++) {
          let acc = projBias[q];
          for (let p = 0; p < d; p++) acc += ex.features[j * d + p] * proj[p][q];
          hiddenVec[q] = acc;
        }
        let maxLogit = -Infinity;
        for (let c = 0; c < 3; c++) {
          let acc = clsBias[c];
          for (let q = 0; q < h; q++) acc += hiddenVec[q] * cls[q][c];
          probs[c] = acc;
          if (acc > maxLogit) maxLogit = acc;
        }
        let denom = 0;
        for (let c = 0; c < 3; c++) {
          probs[c] = Math.exp(probs[c] - maxLogit);
          denom += probs[c];
        }
        for (let c = 0; c < 3; c++) probs[c] /= denom;
        const y = ex.labels[j];
        loss -= Math.log(Math.max(probs[y], 1e-12));

        // delta = probs - onehot(y); backprop through both linear layers
        probs[y] -= 1;
        for (let c = 0; c < 3; c++) {
          gClsBias[c] += probs[c];
          for (let q = 0; q < h; q++) gCls[q][c] += hiddenVec[q] * probs[c];
        }
        for (let q = 0; q < h; q++) {
          let back = 0;
          for (let c = 0; c < 3; c++) back += probs[c] * cls[q][c];
          gProjBias[q] += back;
          for (let p = 0; p < d; p++) gProj[p][q] += ex.features[j * d + p] * back;
        }
      }
    }

    const scale = opts.learningRate / total;
    for (let q = 0; q < h; q++) {
      projBias[q] -= scale * gProjBias[q];
      for (let p = 0; p < d; p++) proj[p][q] -= scale * gProj[p][q];
    }
    for (let c = 0; c < 3; c++) {
      clsBias[c] -= scale * gClsBias[c];
      for (let q = 0; q < h; q++) cls[q][c] -= scale * gCls[q][c];
    }
    opts.onEpoch?.(epoch, loss / total);
  }

  // fold the z-score into the projection: x@P with x=(raw-mean)/std becomes
  // raw @ (P/std) + (bias - mean/std @ P)
  const foldedProj = head.proj.map((row, p) => row.map((_, q) => proj[p][q] / std[p]));
  const foldedBias = projBias.slice();
  for (let q = 0; q < h; q++) {
    for (let p = 0; p < d; p++) foldedBias[q] -= (mean[p] / std[p]) * proj[p][q];
  }
  return {
    version: 1,
    encoder: "spectral-v1",
    inputDim: d,
    hiddenDim: h,
    proj: foldedProj,
    projBias: foldedBias,
    cls,
    clsBias: Array.from(clsBias),
  };
}
