/**
 * Minimal RIFF/WAVE reader and writer.
 *
 * Reads mono (or first channel of) PCM 16/24/32-bit integer and 32-bit
 * float files; samples come back as Float64Array scaled to [-1, 1].
 * The writer emits 16-bit PCM and exists mainly for tests and fixtures.
 */

import * as fs from "node:fs";

export interface WavData {
  samples: Float64Array;
  sampleRate: number;
}

export class WavError extends Error {}

const FORMAT_PCM = 1;
const FORMAT_FLOAT = 3;
const FORMAT_EXTENSIBLE = 0xfffe;

export function decodeWav(buf: Buffer, source = "<buffer>"): WavData {
  if (buf.length < 12 || buf.toString("ascii", 0, 4) !== "RIFF" ||
      buf.toString("ascii", 8, 12) !== "WAVE") {
    throw new WavError(`${source}: not a RIFF/WAVE file`);
  }
  let offset = 12;
  let format = -1;
  let channels = 0;
  let sampleRate = 0;
  let bitsPerSample = 0;
  let data: Buffer | null = null;

  while (offset + 8 <= buf.length) {
    const id = buf.toString("ascii", offset, offset + 4);
    const size = buf.readUInt32LE(offset + 4);
    const body = offset + 8;
    if (body + size > buf.length && id !== "data") {
      throw new WavError(`${source}: truncated ${id} chunk`);
    }
    if (id === "fmt ") {
      if (size < 16) throw new WavError(`${source}: short fmt chunk`);
      format = buf.readUInt16LE(body);
      channels = buf.readUInt16LE(body + 2);
      sampleRate = buf.readUInt32LE(body + 4);
      bitsPerSample = buf.readUInt16LE(body + 14);
      if (format === FORMAT_EXTENSIBLE && size >= 40) {
        format = buf.readUInt16LE(body + 24); // first two bytes of SubFormat GUID
      }
    } else if (id === "data") {
      data = buf.subarray(body, Math.min(body + size, buf.length));
    }
    offset = body + size + (size % 2); // chunks are word-aligned
  }

  if (format < 0 || data === null) {
    throw new WavError(`${source}: missing fmt or data chunk`);
  }
  if (channels < 1) throw new WavError(`${source}: bad channel count`);
  const bytesPer = bitsPerSample / 8;
  const frameBytes = bytesPer * channels;
  const numFrames = Math.floor(data.length / frameBytes);
  if (numFrames === 0) throw new WavError(`${source}: zero-length audio`);

  const samples = new Float64Array(numFrames);
  if (format === FORMAT_PCM && bitsPerSample === 16) {
    for (let i = 0; i < numFrames; i++) {
      samples[i] = data.readInt16LE(i * frameBytes) / 32768;
    }
  } else if (format === FORMAT_PCM && bitsPerSample === 24) {
    for (let i = 0; i < numFrames; i++) {
      const o = i * frameBytes;
      const raw = data[o] | (data[o + 1] << 8) | (data[o + 2] << 16);
      const signed = raw >= 0x800000 ? raw - 0x1000000 : raw;
      samples[i] = signed / 8388608;
    }
  } else if (format === FORMAT_PCM && bitsPerSample === 32) {
    for (let i = 0; i < numFrames; i++) {
      samples[i] = data.readInt32LE(i * frameBytes) / 2147483648;
    }
  } else if (format === FORMAT_FLOAT && bitsPerSample === 32) {
    for (let i = 0; i < numFrames; i++) {
      samples[i] = data.readFloatLE(i * frameBytes);
    }
  } else {
    throw new WavError(
      `${source}: unsupported encoding (format ${format}, ${bitsPerSample} bit)`);
  }
  return { samples, sampleRate };
}

export function readWavMono(path: string): WavData {
  let buf: Buffer;
  try {
    buf = fs.readFileSync(path);
  } catch (err) {
    throw new WavError(`unreadable file: ${path} (${(err as Error).message})`);
  }
  return decodeWav(buf, path);
}

export function encodeWav16(samples: ArrayLike<number>, sampleRate: number): Buffer {
  const data = Buffer.alloc(samples.length * 2);
  for (let i = 0; i < samples.length; i++) {
    const clipped = Math.max(-1, Math.min(32767 / 32768, samples[i]));
    data.writeInt16LE(Math.round(clipped * 32768), i * 2);
  }
  const header = Buffer.alloc(44);
  header.write("RIFF", 0, "ascii");
  header.writeUInt32LE(36 + data.length, 4);
  header.write("WAVE", 8, "ascii");
  header.write("fmt ", 12, "ascii");
  header.writeUInt32LE(16, 16);
  header.writeUInt16LE(FORMAT_PCM, 20);
  header.writeUInt16LE(1, 22);
  header.writeUInt32LE(sampleRate, 24);
  header.writeUInt32LE(sampleRate * 2, 28);
  header.writeUInt16LE(2, 32);
  header.writeUInt16LE(16, 34);
  header.write("data", 36, "ascii");
  header.writeUInt32LE(data.length, 40);
  return Buffer.concat([header, data]);
}

export function writeWav16(path: string, samples: ArrayLike<number>, sampleRate: number): void {
  fs.writeFileSync(path, encodeWav16(samples, sampleRate));
}
