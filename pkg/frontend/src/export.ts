/**
 * Batch export: WAV manifest -> per-utterance WSEG logits files.
 *
 * For each utterance the waveform is optionally standardized (train-set
 * mean/std from the primary toolkit's stats file), encoded to hidden
 * states, linearly interpolated to exactly m = ceil(T / frameLen) label
 * frames, pushed through the linear head, and written in the interchange
 * format the primary toolkit consumes.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { ENCODER_NAME, HIDDEN_DIM, encode, interpolateToFrames } from "./encoder.js";
import { LinearHead, applyHead, loadHead } from "./head.js";
import { encodeWseg } from "./wseg.js";
import { readWavMono } from "./wav.js";

export class ExportError extends Error {}

export interface ManifestEntry {
  utteranceId: string;
  wavPath: string;
}

export interface ExportJob {
  manifestPath: string;
  encoderName: string;
  headPath: string;
  frameMs: number;
  outputDir: string;
  /** optional stats file (mean=/std=/total= lines) for standardization */
  statsPath?: string;
}

export interface Stats {
  mean: number;
  std: number;
}

export function readStats(statsPath: string): Stats {
  const values = new Map<string, string>();
  for (const line of fs.readFileSync(statsPath, "utf-8").split("\n")) {
    if (!line.trim()) continue;
    const eq = line.indexOf("=");
    if (eq < 0) throw new ExportError(`${statsPath}: expected key=value lines`);
    values.set(line.slice(0, eq).trim(), line.slice(eq + 1).trim());
  }
  const mean = Number(values.get("mean"));
  const std = Number(values.get("std"));
  if (!Number.isFinite(mean) || !Number.isFinite(std) || std <= 0) {
    throw new ExportError(`${statsPath}: bad stats file`);
  }
  return { mean, std };
}

export function readManifest(manifestPath: string): ManifestEntry[] {
  let text: string;
  try {
    text = fs.readFileSync(manifestPath, "utf-8");
  } catch (err) {
    throw new ExportError(`unreadable manifest: ${manifestPath} (${(err as Error).message})`);
  }
  const lines = text.split("\n").filter((l) => l.trim());
  if (lines[0] !== "utterance_id,wav_path") {
    throw new ExportError(`${manifestPath}:1: expected header utterance_id,wav_path`);
  }
  const entries: ManifestEntry[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cols = lines[i].split(",");
    if (cols.length !== 2) {
      throw new ExportError(`${manifestPath}:${i + 1}: malformed row ${lines[i]}`);
    }
    entries.push({ utteranceId: cols[0], wavPath: cols[1] });
  }
  if (entries.length === 0) throw new ExportError(`${manifestPath}: empty manifest`);
  return entries;
}

export interface ExportResult {
  utteranceId: string;
  file: string;
  numFrames: number;
}

export function exportLogits(job: ExportJob): ExportResult[] {
  if (job.encoderName !== ENCODER_NAME) {
    throw new ExportError(
      `unknown encoder ${job.encoderName}; available: ${ENCODER_NAME}`);
  }
  const head = loadHead(job.headPath);
  if (head.encoder !== job.encoderName || head.inputDim !== HIDDEN_DIM) {
    throw new ExportError(
      `head/encoder mismatch: head is for ${head.encoder} (dim ${head.inputDim})`);
  }
  const stats = job.statsPath ? readStats(job.statsPath) : null;
  const entries = readManifest(job.manifestPath);
  const manifestDir = path.dirname(job.manifestPath);
  fs.mkdirSync(job.outputDir, { recursive: true });

  const frameDurationUs = Math.round(job.frameMs * 1000);
  const results: ExportResult[] = [];
  for (const entry of entries) {
    const wavPath = path.isAbsolute(entry.wavPath)
      ? entry.wavPath
      : path.join(manifestDir, entry.wavPath);
    const { samples, sampleRate } = readWavMono(wavPath);
    if (stats) {
      for (let i = 0; i < samples.length; i++) {
        samples[i] = (samples[i] - stats.mean) / stats.std;
      }
    }
    const frameLen = Math.round((job.frameMs / 1000) * sampleRate);
    if (frameLen < 1) throw new ExportError(`frame shorter than one sample: ${wavPath}`);
    const expectedFrames = Math.ceil(samples.length / frameLen);

    const hidden = encode(samples, sampleRate);
    const features = interpolateToFrames(hidden, expectedFrames, frameLen);
    const logits = applyHead(head, features, expectedFrames);
    const emitted = logits.length / 3;
    if (emitted !== expectedFrames) {
      throw new ExportError(
        `${entry.utteranceId}: emitted ${emitted} frames, expected ${expectedFrames}`);
    }

    const file = path.join(job.outputDir, `${entry.utteranceId}.wseg`);
    const blob = encodeWseg({
      utteranceId: entry.utteranceId,
      frameDurationUs,
      rows: logits,
    });
    const tmp = `${file}.tmp`;
    fs.writeFileSync(tmp, blob);
    fs.renameSync(tmp, file);
    results.push({ utteranceId: entry.utteranceId, file, numFrames: expectedFrames });
  }
  return results;
}

export { ENCODER_NAME, HIDDEN_DIM };
export type { LinearHead };
