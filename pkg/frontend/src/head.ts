/**
 * Linear head: a projection layer followed by a 3-class classification
 * layer, both affine, applied per frame to interpolated hidden states.
 */

import * as fs from "node:fs";

export class HeadError extends Error {}

export interface LinearHead {
  version: number;
  encoder: string;
  inputDim: number;
  hiddenDim: number;
  /** inputDim x hiddenDim, row-major */
  proj: number[][];
  projBias: number[];
  /** hiddenDim x 3, row-major */
  cls: number[][];
  clsBias: number[];
}

export function loadHead(path: string): LinearHead {
  let raw: string;
  try {
    raw = fs.readFileSync(path, "utf-8");
  } catch (err) {
    throw new HeadError(`missing weights: ${path} (${(err as Error).message})`);
  }
  let head: LinearHead;
  try {
    head = JSON.parse(raw);
  } catch (err) {
    throw new HeadError(`${path}: not a head file (${(err as Error).message})`);
  }
  if (head.version !== 1) throw new HeadError(`${path}: unsupported head version`);
  if (head.proj.length !== head.inputDim || head.proj[0].length !== head.hiddenDim ||
      head.cls.length !== head.hiddenDim || head.cls[0].length !== 3 ||
      head.projBias.length !== head.hiddenDim || head.clsBias.length !== 3) {
    throw new HeadError(`${path}: inconsistent head dimensions`);
  }
  return head;
}

export function saveHead(path: string, head: LinearHead): void {
  fs.writeFileSync(path, JSON.stringify(head));
}

/** Apply projection then classification: (m x inputDim) -> (m x 3) float32. */
export function applyHead(head: LinearHead, features: Float64Array, m: number): Float32Array {
  const d = head.inputDim;
  const h = head.hiddenDim;
  if (features.length !== m * d) {
    throw new HeadError(`feature shape ${features.length} != ${m}x${d}`);
  }
  const logits = new Float32Array(m * 3);
  const hidden = new Float64Array(h);
  for (let j = 0; j < m; j++) {
    for (let q = 0; q < h; q++) {
      let acc = head.projBias[q];
      for (let p = 0; p < d; p++) acc += features[j * d + p] * head.proj[p][q];
      hidden[q] = acc;
    }
    for (let c = 0; c < 3; c++) {
      let acc = head.clsBias[c];
      for (let q = 0; q < h; q++) acc += hidden[q] * head.cls[q][c];
      logits[j * 3 + c] = Math.fround(acc);
    }
  }
  return logits;
}

/** mulberry32: tiny deterministic PRNG for seeded head initialization. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function initHead(inputDim: number, hiddenDim: number, encoder: string,
                         seed: number): LinearHead {
  const rand = mulberry32(seed);
  const gauss = () => {
    // Box-Muller, deterministic given the PRNG stream
    const u = Math.max(rand(), 1e-12);
    const v = rand();
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  };
  const scaleP = 1 / Math.sqrt(inputDim);
  const scaleC = 1 / Math.sqrt(hiddenDim);
  const proj = Array.from({ length: inputDim }, () =>
    Array.from({ length: hiddenDim }, () => gauss() * scaleP));
  const cls = Array.from({ length: hiddenDim }, () =>
    Array.from({ length: 3 }, () => gauss() * scaleC));
  return {
    version: 1,
    encoder,
    inputDim,
    hiddenDim,
    proj,
    projBias: new Array(hiddenDim).fill(0),
    cls,
    clsBias: new Array(3).fill(0),
  };
}
