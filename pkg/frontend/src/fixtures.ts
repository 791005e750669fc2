/** Feature-matrix fixture files: "FEAT1 <T> <F>\n" + row-major float32. */

import * as fs from "node:fs";

import { FeatureMatrix } from "./forward";

const MAGIC = "FEAT1";

export function writeFeat(path: string, matrix: FeatureMatrix): void {
  const header = Buffer.from(`${MAGIC} ${matrix.frames} ${matrix.dim}\n`, "ascii");
  const payload = Buffer.alloc(matrix.values.length * 4);
  const view = new DataView(payload.buffer, payload.byteOffset, payload.byteLength);
  for (let i = 0; i < matrix.values.length; i++) {
    view.setFloat32(i * 4, matrix.values[i], true);
  }
  fs.writeFileSync(path, Buffer.concat([header, payload]));
}

export function readFeat(path: string): FeatureMatrix {
  const raw = fs.readFileSync(path);
  const nl = raw.indexOf(0x0a);
  const line = raw.subarray(0, nl).toString("ascii");
  const parts = line.split(" ");
  if (nl < 0 || parts.length !== 3 || parts[0] !== MAGIC) {
    throw new Error(`${path}: not a feature file`);
  }
  const frames = Number(parts[1]);
  const dim = Number(parts[2]);
  const payload = raw.subarray(nl + 1);
  if (payload.length !== frames * dim * 4) {
    throw new Error(`${path}: payload size does not match the ${frames}x${dim} header`);
  }
  const values = new Float64Array(frames * dim);
  for (let i = 0; i < values.length; i++) values[i] = payload.readFloatLE(i * 4);
  return { frames, dim, values };
}
