/**
 * WSEG logits interchange codec.
 *
 * Little-endian layout: magic "WSEG" | u32 version=1 | u32 numFrames
 * | u32 numClasses=3 | u32 frameDurationUs | u16 idLen | UTF-8 utterance id
 * | numFrames x 3 float32 row-major (class order Begin, Inside, Outside).
 */

export const VERSION = 1;
export const NUM_CLASSES = 3;
const MAGIC = "WSEG";
const HEADER_BYTES = 4 + 4 * 4 + 2;

export class WsegError extends Error {}

export interface LogitsFile {
  utteranceId: string;
  frameDurationUs: number;
  /** numFrames x 3, row-major */
  rows: Float32Array;
}

export function numFrames(l: LogitsFile): number {
  return l.rows.length / NUM_CLASSES;
}

export function encodeWseg(l: LogitsFile): Buffer {
  if (l.rows.length % NUM_CLASSES !== 0) {
    throw new WsegError("rows length must be a multiple of 3");
  }
  const id = Buffer.from(l.utteranceId, "utf-8");
  if (id.length > 0xffff) throw new WsegError("utterance id too long");
  const frames = numFrames(l);
  const buf = Buffer.alloc(HEADER_BYTES + id.length + l.rows.length * 4);
  buf.write(MAGIC, 0, "ascii");
  buf.writeUInt32LE(VERSION, 4);
  buf.writeUInt32LE(frames, 8);
  buf.writeUInt32LE(NUM_CLASSES, 12);
  buf.writeUInt32LE(l.frameDurationUs, 16);
  buf.writeUInt16LE(id.length, 20);
  id.copy(buf, HEADER_BYTES);
  let offset = HEADER_BYTES + id.length;
  for (let i = 0; i < l.rows.length; i++, offset += 4) {
    buf.writeFloatLE(l.rows[i], offset);
  }
  return buf;
}

export function decodeWseg(buf: Buffer, source = "<buffer>"): LogitsFile {
  if (buf.length < HEADER_BYTES) throw new WsegError(`${source}: truncated header`);
  if (buf.toString("ascii", 0, 4) !== MAGIC) {
    throw new WsegError(`${source}: bad magic`);
  }
  const version = buf.readUInt32LE(4);
  if (version !== VERSION) {
    throw new WsegError(`${source}: unsupported version ${version}`);
  }
  const frames = buf.readUInt32LE(8);
  const classes = buf.readUInt32LE(12);
  if (classes !== NUM_CLASSES) {
    throw new WsegError(`${source}: expected ${NUM_CLASSES} classes, got ${classes}`);
  }
  const frameDurationUs = buf.readUInt32LE(16);
  const idLen = buf.readUInt16LE(20);
  if (buf.length < HEADER_BYTES + idLen) {
    throw new WsegError(`${source}: truncated utterance id`);
  }
  const utteranceId = buf.toString("utf-8", HEADER_BYTES, HEADER_BYTES + idLen);
  const payloadStart = HEADER_BYTES + idLen;
  const expected = frames * NUM_CLASSES * 4;
  if (buf.length - payloadStart !== expected) {
    throw new WsegError(
      `${source}: truncated payload (${buf.length - payloadStart} bytes, expected ${expected})`);
  }
  const rows = new Float32Array(frames * NUM_CLASSES);
  for (let i = 0; i < rows.length; i++) {
    rows[i] = buf.readFloatLE(payloadStart + i * 4);
  }
  return { utteranceId, frameDurationUs, rows };
}
