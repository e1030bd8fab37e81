#!/usr/bin/env node
/**
 * wseg-export: run the encoder + linear head over a WAV manifest and emit
 * per-utterance logits in the WSEG interchange format.
 *
 * Commands:
 *   export      --manifest m.csv --head head.json --out dir
 *               [--frame-ms 25] [--stats stats.txt] [--encoder spectral-v1]
 *   init-head   --out head.json [--hidden 8] [--seed 1]
 *   train-head  --manifest m.csv --labels labels.tsv --out head.json
 *               [--stats stats.txt] [--frame-ms 25] [--hidden 8] [--seed 1]
 *               [--lr 0.5] [--epochs 200]
 *
 * Exit codes: 0 success, 2 input/config error.
 */

import { pathToFileURL } from "node:url";

import { ENCODER_NAME, HIDDEN_DIM, ExportError, exportLogits } from "./export.js";
import { HeadError, initHead, saveHead } from "./head.js";
import { trainHead } from "./train.js";
import { WavError } from "./wav.js";
import { WsegError } from "./wseg.js";

function parseArgs(argv: string[]): Map<string, string> {
  const out = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new ExportError(`expected --flag value pairs, got ${key}`);
    }
    out.set(key.slice(2), argv[i + 1]);
  }
  return out;
}

function required(args: Map<string, string>, name: string): string {
  const v = args.get(name);
  if (v === undefined) throw new ExportError(`missing --${name}`);
  return v;
}

function numeric(args: Map<string, string>, name: string, fallback: number): number {
  const v = args.get(name);
  if (v === undefined) return fallback;
  const n = Number(v);
  if (!Number.isFinite(n)) throw new ExportError(`--${name} must be a number, got ${v}`);
  return n;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    const args = parseArgs(rest);
    if (command === "export") {
      const results = exportLogits({
        manifestPath: required(args, "manifest"),
        headPath: required(args, "head"),
        outputDir: required(args, "out"),
        frameMs: numeric(args, "frame-ms", 25),
        encoderName: args.get("encoder") ?? ENCODER_NAME,
        statsPath: args.get("stats"),
      });
      for (const r of results) {
        console.log(`${r.utteranceId}: ${r.numFrames} frames -> ${r.file}`);
      }
      return 0;
    }
    if (command === "init-head") {
      const head = initHead(HIDDEN_DIM, Math.round(numeric(args, "hidden", 8)),
                            ENCODER_NAME, Math.round(numeric(args, "seed", 1)));
      saveHead(required(args, "out"), head);
      console.log(`wrote ${args.get("out")}`);
      return 0;
    }
    if (command === "train-head") {
      const head = trainHead({
        manifestPath: required(args, "manifest"),
        labelsPath: required(args, "labels"),
        outPath: required(args, "out"),
        statsPath: args.get("stats"),
        frameMs: numeric(args, "frame-ms", 25),
        hiddenDim: Math.round(numeric(args, "hidden", 8)),
        seed: Math.round(numeric(args, "seed", 1)),
        learningRate: numeric(args, "lr", 0.5),
        epochs: Math.round(numeric(args, "epochs", 200)),
        onEpoch: (epoch, loss) => {
          if (epoch % 25 === 0 || epoch === 1) {
            console.error(`epoch ${epoch}: loss ${loss.toFixed(6)}`);
          }
        },
      });
      saveHead(required(args, "out"), head);
      console.log(`wrote ${args.get("out")}`);
      return 0;
    }
    console.error(`unknown command: ${command ?? "(none)"}; `
      + "expected export, init-head, or train-head");
    return 2;
  } catch (err) {
    if (err instanceof ExportError || err instanceof WavError ||
        err instanceof WsegError || err instanceof HeadError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    throw err;
  }
}

const invokedDirectly = process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
