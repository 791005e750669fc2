/** Reader for the probe WAVs: little-endian mono RIFF, pcm16 or float32. */

import * as fs from "node:fs";

export interface Audio {
  samples: Float64Array;
  sampleRate: number;
}

export function readWav(path: string): Audio {
  const raw = fs.readFileSync(path);
  if (raw.length < 12 || raw.toString("ascii", 0, 4) !== "RIFF" ||
      raw.toString("ascii", 8, 12) !== "WAVE") {
    throw new Error(`${path}: not a RIFF/WAVE file`);
  }
  let pos = 12;
  let fmt: { tag: number; channels: number; rate: number; bits: number } | null = null;
  while (pos + 8 <= raw.length) {
    const id = raw.toString("ascii", pos, pos + 4);
    const size = raw.readUInt32LE(pos + 4);
    const body = pos + 8;
    if (id === "fmt ") {
      if (size < 16) throw new Error(`${path}: fmt chunk too small`);
      fmt = {
        tag: raw.readUInt16LE(body),
        channels: raw.readUInt16LE(body + 2),
        rate: raw.readUInt32LE(body + 4),
        bits: raw.readUInt16LE(body + 14),
      };
    } else if (id === "data") {
      if (fmt === null) throw new Error(`${path}: data chunk precedes fmt chunk`);
      if (body + size > raw.length) {
        throw new Error(`${path}: data chunk declares ${size} bytes but the file ends early`);
      }
      return decode(path, fmt, raw.subarray(body, body + size));
    }
    pos = body + size + (size & 1);
  }
  throw new Error(`${path}: missing data chunk`);
}

function decode(path: string, fmt: { tag: number; channels: number; rate: number; bits: number },
                payload: Buffer): Audio {
  if (fmt.channels !== 1) {
    throw new Error(`${path}: expected mono, got ${fmt.channels} channels`);
  }
  let samples: Float64Array;
  if (fmt.tag === 1 && fmt.bits === 16) {
    const n = Math.floor(payload.length / 2);
    samples = new Float64Array(n);
    for (let i = 0; i < n; i++) samples[i] = payload.readInt16LE(i * 2) / 32768;
  } else if (fmt.tag === 3 && fmt.bits === 32) {
    const n = Math.floor(payload.length / 4);
    samples = new Float64Array(n);
    for (let i = 0; i < n; i++) samples[i] = payload.readFloatLE(i * 4);
  } else {
    throw new Error(`${path}: unsupported encoding (tag ${fmt.tag}, ${fmt.bits}-bit)`);
  }
  return { samples, sampleRate: fmt.rate };
}
