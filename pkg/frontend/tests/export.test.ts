import { execFileSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ExportError, exportLogits, readManifest } from "../src/export.js";
import { initHead, saveHead } from "../src/head.js";
import { decodeWseg, encodeWseg } from "../src/wseg.js";
import { writeWav16 } from "../src/wav.js";
import { main } from "../src/cli.js";

const SR = 16000;
const FRAME_LEN = 400;

let root: string;
let manifest: string;
let headPath: string;
const wavLengths: Map<string, number> = new Map();

function makeUtterance(seed: number, seconds: number): Float64Array {
  // seeded tone bursts over a quiet floor, same flavor as the primary corpus
  const n = Math.round(seconds * SR);
  const out = new Float64Array(n);
  let state = seed >>> 0;
  const rand = () => {
    state = (state * 1664525 + 1013904223) >>> 0;
    return state / 4294967296;
  };
  for (let t = 0; t < n; t++) out[t] = (rand() - 0.5) * 0.004;
  let cursor = Math.round((0.1 + rand() * 0.1) * SR);
  while (cursor + SR * 0.25 < n) {
    const dur = Math.round((0.15 + rand() * 0.2) * SR);
    const freq = 300 + rand() * 2200;
    const amp = 0.3 + rand() * 0.5;
    for (let t = 0; t < dur && cursor + t < n; t++) {
      out[cursor + t] += amp * Math.sin((2 * Math.PI * freq * t) / SR);
    }
    cursor += dur + Math.round((0.1 + rand() * 0.2) * SR);
  }
  return out;
}

beforeAll(() => {
  root = fs.mkdtempSync(path.join(os.tmpdir(), "wseg-export-"));
  fs.mkdirSync(path.join(root, "wavs"));
  const rows = ["utterance_id,wav_path"];
  for (let i = 0; i < 10; i++) {
    const id = `utt${String(i).padStart(4, "0")}`;
    const seconds = 0.8 + 0.13 * i; // varied lengths, some off the frame grid
    const x = makeUtterance(1234 + i, seconds);
    writeWav16(path.join(root, "wavs", `${id}.wav`), x, SR);
    wavLengths.set(id, x.length);
    rows.push(`${id},wavs/${id}.wav`);
  }
  manifest = path.join(root, "manifest.csv");
  fs.writeFileSync(manifest, rows.join("\n") + "\n");
  headPath = path.join(root, "head.json");
  saveHead(headPath, initHead(16, 8, "spectral-v1", 7));
});

afterAll(() => {
  fs.rmSync(root, { recursive: true, force: true });
});

describe("batch export", () => {
  it("emits one conformant file per manifest row", () => {
    const outDir = path.join(root, "out");
    const results = exportLogits({
      manifestPath: manifest,
      encoderName: "spectral-v1",
      headPath,
      frameMs: 25,
      outputDir: outDir,
    });
    expect(results).toHaveLength(10);
    for (const r of results) {
      const expected = Math.ceil(wavLengths.get(r.utteranceId)! / FRAME_LEN);
      expect(r.numFrames).toBe(expected);
      const decoded = decodeWseg(fs.readFileSync(r.file), r.file);
      expect(decoded.utteranceId).toBe(r.utteranceId);
      expect(decoded.frameDurationUs).toBe(25000);
      expect(decoded.rows.length).toBe(expected * 3);
      expect(Array.from(decoded.rows).every(Number.isFinite)).toBe(true);
    }
  });

  it("is deterministic and bit-exact through a re-encode", () => {
    const a = path.join(root, "out_a");
    const b = path.join(root, "out_b");
    for (const outputDir of [a, b]) {
      exportLogits({ manifestPath: manifest, encoderName: "spectral-v1",
                     headPath, frameMs: 25, outputDir });
    }
    for (const entry of readManifest(manifest)) {
      const blobA = fs.readFileSync(path.join(a, `${entry.utteranceId}.wseg`));
      const blobB = fs.readFileSync(path.join(b, `${entry.utteranceId}.wseg`));
      expect(blobA.equals(blobB)).toBe(true);
      expect(encodeWseg(decodeWseg(blobA)).equals(blobA)).toBe(true);
    }
  });

  it("standardizes with a stats file when given", () => {
    const statsPath = path.join(root, "stats.txt");
    fs.writeFileSync(statsPath, "mean=0.001\nstd=0.05\ntotal=123456\n");
    const outDir = path.join(root, "out_stats");
    const results = exportLogits({
      manifestPath: manifest, encoderName: "spectral-v1", headPath,
      frameMs: 25, outputDir: outDir, statsPath,
    });
    const plain = fs.readFileSync(path.join(root, "out_a", `${results[0].utteranceId}.wseg`));
    const scaled = fs.readFileSync(results[0].file);
    expect(plain.equals(scaled)).toBe(false); // scaling must reach the logits
  });

  it("rejects a missing head and an unknown encoder", () => {
    expect(() => exportLogits({
      manifestPath: manifest, encoderName: "spectral-v1",
      headPath: path.join(root, "nope.json"), frameMs: 25,
      outputDir: path.join(root, "x"),
    })).toThrow(/missing weights/);
    expect(() => exportLogits({
      manifestPath: manifest, encoderName: "other-encoder", headPath,
      frameMs: 25, outputDir: path.join(root, "x"),
    })).toThrow(ExportError);
  });

  it("cli export works end to end", () => {
    const outDir = path.join(root, "out_cli");
    const rc = main(["export", "--manifest", manifest, "--head", headPath,
                     "--out", outDir]);
    expect(rc).toBe(0);
    expect(fs.readdirSync(outDir).filter((f) => f.endsWith(".wseg"))).toHaveLength(10);
  });

  it("cli maps input errors to exit code 2", () => {
    expect(main(["export", "--manifest", manifest])).toBe(2); // missing --head
    expect(main(["nonsense"])).toBe(2);
  });
});

describe("primary toolkit interop", () => {
  function primaryAvailable(): boolean {
    try {
      execFileSync("python3", ["-c", "import segwords"], { stdio: "pipe" });
      return true;
    } catch {
      return false;
    }
  }

  it.skipIf(!primaryAvailable())("exported files load through segwords.read_logits", () => {
    const outDir = path.join(root, "out_interop");
    const results = exportLogits({
      manifestPath: manifest, encoderName: "spectral-v1", headPath,
      frameMs: 25, outputDir: outDir,
    });
    const script = [
      "import json, sys",
      "import numpy as np",
      "import segwords",
      "out = []",
      "for p in sys.argv[1:]:",
      "    l = segwords.read_logits(p)",
      "    out.append({'id': l.utterance_id, 'frames': int(l.num_frames),",
      "                'us': int(l.frame_duration_us),",
      "                'finite': bool(np.all(np.isfinite(l.rows)))})",
      "print(json.dumps(out))",
    ].join("\n");
    const stdout = execFileSync(
      "python3", ["-c", script, ...results.map((r) => r.file)],
      { encoding: "utf-8" });
    const parsed = JSON.parse(stdout) as
      { id: string; frames: number; us: number; finite: boolean }[];
    expect(parsed).toHaveLength(10);
    for (let i = 0; i < parsed.length; i++) {
      expect(parsed[i].id).toBe(results[i].utteranceId);
      expect(parsed[i].frames).toBe(results[i].numFrames);
      expect(parsed[i].us).toBe(25000);
      expect(parsed[i].finite).toBe(true);
    }
  });
});
