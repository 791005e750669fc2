/**
 * Minimal safetensors reader/writer (F32 tensors only).
 *
 * File layout: u64 little-endian header length, JSON header mapping tensor
 * names to {dtype, shape, data_offsets}, then the raw byte buffer. The
 * "__metadata__" entry carries string key/value pairs.
 */

import * as fs from "node:fs";

export interface Tensor {
  shape: number[];
  data: Float32Array;
}

export interface Checkpoint {
  metadata: Record<string, string>;
  tensors: Map<string, Tensor>;
}

interface HeaderEntry {
  dtype: string;
  shape: number[];
  data_offsets: [number, number];
}

export function readSafetensors(path: string): Checkpoint {
  const raw = fs.readFileSync(path);
  if (raw.length < 8) {
    throw new Error(`${path}: too short for a safetensors header`);
  }
  const headerLen = Number(raw.readBigUInt64LE(0));
  if (8 + headerLen > raw.length) {
    throw new Error(`${path}: header length ${headerLen} exceeds the file`);
  }
  const header = JSON.parse(raw.subarray(8, 8 + headerLen).toString("utf-8"));
  const body = raw.subarray(8 + headerLen);

  const metadata: Record<string, string> = header.__metadata__ ?? {};
  const tensors = new Map<string, Tensor>();
  for (const [name, value] of Object.entries(header)) {
    if (name === "__metadata__") continue;
    const entry = value as HeaderEntry;
    if (entry.dtype !== "F32") {
      throw new Error(`${path}: tensor ${name} has dtype ${entry.dtype}, only F32 is supported`);
    }
    const [begin, end] = entry.data_offsets;
    const count = entry.shape.reduce((a, b) => a * b, 1);
    if (end - begin !== 4 * count) {
      throw new Error(`${path}: tensor ${name} byte span does not match its shape`);
    }
    if (end > body.length) {
      throw new Error(`${path}: tensor ${name} extends past the end of the file`);
    }
    // copy to a fresh buffer: the payload offset is not guaranteed 4-aligned
    const bytes = new Uint8Array(body.subarray(begin, end));
    tensors.set(name, { shape: entry.shape, data: new Float32Array(bytes.buffer) });
  }
  return { metadata, tensors };
}

export function writeSafetensors(
  path: string,
  tensors: Map<string, Tensor>,
  metadata: Record<string, string>,
): void {
  const header: Record<string, unknown> = { __metadata__: metadata };
  const chunks: Buffer[] = [];
  let offset = 0;
  for (const name of [...tensors.keys()].sort()) {
    const tensor = tensors.get(name)!;
    const bytes = Buffer.from(tensor.data.buffer, tensor.data.byteOffset, tensor.data.byteLength);
    header[name] = {
      dtype: "F32",
      shape: tensor.shape,
      data_offsets: [offset, offset + bytes.length],
    };
    chunks.push(bytes);
    offset += bytes.length;
  }
  const blob = Buffer.from(stableStringify(header), "utf-8");
  const lenBuf = Buffer.alloc(8);
  lenBuf.writeBigUInt64LE(BigInt(blob.length));
  fs.writeFileSync(path, Buffer.concat([lenBuf, blob, ...chunks]));
}

/** JSON with recursively sorted object keys, no whitespace. */
export function stableStringify(value: unknown): string {
  if (value === null || typeof value !== "object" || Array.isArray(value)) {
    if (Array.isArray(value)) {
      return `[${value.map(stableStringify).join(",")}]`;
    }
    return JSON.stringify(value);
  }
  const entries = Object.entries(value as Record<string, unknown>)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([k, v]) => `${JSON.stringify(k)}:${stableStringify(v)}`);
  return `{${entries.join(",")}}`;
}
