/**
 * The flat weight-container format consumed by the enhancement toolkit:
 * ASCII magic line "FENC1 <header_bytes>", a JSON header describing the
 * conv stack, then raw little-endian float32 tensors in declaration order
 * (weight, optional bias, optional norm gain+shift per layer).
 */

import * as fs from "node:fs";

import { stableStringify } from "./safetensors";

export type Normalization = "none" | "group_norm" | "layer_norm";

export interface LayerSpec {
  in_channels: number;
  out_channels: number;
  kernel: number;
  stride: number;
  bias: boolean;
  normalization: Normalization;
  groups: number | null;
}

export interface EncoderDef {
  layers: LayerSpec[];
  inputSampleRate: number;
  epsilon: number;
  model: string | null;
  revision: string | null;
}

export interface LayerTensors {
  weight: Float32Array; // (out, in, kernel) row-major
  bias?: Float32Array;
  normWeight?: Float32Array;
  normBias?: Float32Array;
}

const MAGIC = "FENC1";

export function validateLayers(def: EncoderDef, tensors: LayerTensors[]): void {
  if (def.layers.length === 0) throw new Error("encoder needs at least one layer");
  if (def.layers[0].in_channels !== 1) {
    throw new Error("first layer must take a single waveform channel");
  }
  if (tensors.length !== def.layers.length) {
    throw new Error(`${tensors.length} tensor sets for ${def.layers.length} layers`);
  }
  def.layers.forEach((layer, i) => {
    if (layer.kernel < layer.stride || layer.stride < 1) {
      throw new Error(`layer ${i}: need kernel >= stride >= 1`);
    }
    if (i > 0 && def.layers[i - 1].out_channels !== layer.in_channels) {
      throw new Error(`layer ${i}: channel chain broken`);
    }
    const t = tensors[i];
    const expect = layer.out_channels * layer.in_channels * layer.kernel;
    if (t.weight.length !== expect) {
      throw new Error(`layer ${i}: weight holds ${t.weight.length} values, expected ${expect}`);
    }
    if (layer.bias !== (t.bias !== undefined)) {
      throw new Error(`layer ${i}: bias presence does not match the declared layer`);
    }
    const hasNorm = layer.normalization !== "none";
    if (hasNorm !== (t.normWeight !== undefined) || hasNorm !== (t.normBias !== undefined)) {
      throw new Error(`layer ${i}: normalization tensors do not match the declared layer`);
    }
    if (layer.normalization === "group_norm") {
      if (!layer.groups || layer.out_channels % layer.groups !== 0) {
        throw new Error(`layer ${i}: group_norm needs groups dividing out_channels`);
      }
    }
    for (const key of ["bias", "normWeight", "normBias"] as const) {
      const arr = t[key];
      if (arr !== undefined && arr.length !== layer.out_channels) {
        throw new Error(`layer ${i}: ${key} has ${arr.length} values, expected ${layer.out_channels}`);
      }
    }
  });
}

export function writeFenc(path: string, def: EncoderDef, tensors: LayerTensors[]): void {
  validateLayers(def, tensors);
  const header = {
    epsilon: def.epsilon,
    input_sample_rate: def.inputSampleRate,
    layers: def.layers.map((layer) => ({
      bias: layer.bias,
      groups: layer.groups,
      in_channels: layer.in_channels,
      kernel: layer.kernel,
      normalization: layer.normalization,
      out_channels: layer.out_channels,
      stride: layer.stride,
    })),
    model: def.model,
    revision: def.revision,
    version: 1,
  };
  const blob = Buffer.from(stableStringify(header), "utf-8");
  const parts: Buffer[] = [Buffer.from(`${MAGIC} ${blob.length}\n`, "ascii"), blob];
  def.layers.forEach((layer, i) => {
    const t = tensors[i];
    parts.push(toLEBytes(t.weight));
    if (layer.bias) parts.push(toLEBytes(t.bias!));
    if (layer.normalization !== "none") {
      parts.push(toLEBytes(t.normWeight!));
      parts.push(toLEBytes(t.normBias!));
    }
  });
  fs.writeFileSync(path, Buffer.concat(parts));
}

export function readFenc(path: string): { def: EncoderDef; tensors: LayerTensors[] } {
  const raw = fs.readFileSync(path);
  const nl = raw.indexOf(0x0a);
  const magicLine = raw.subarray(0, nl).toString("ascii");
  if (nl < 0 || !magicLine.startsWith(`${MAGIC} `)) {
    throw new Error(`${path}: not a feature-encoder container`);
  }
  const headerLen = Number(magicLine.slice(MAGIC.length + 1));
  const start = nl + 1;
  const header = JSON.parse(raw.subarray(start, start + headerLen).toString("utf-8"));
  if (header.version !== 1) {
    throw new Error(`${path}: unsupported container version ${header.version}`);
  }
  const layers: LayerSpec[] = header.layers.map((h: Record<string, unknown>) => ({
    in_channels: h.in_channels as number,
    out_channels: h.out_channels as number,
    kernel: h.kernel as number,
    stride: h.stride as number,
    bias: h.bias as boolean,
    normalization: h.normalization as Normalization,
    groups: (h.groups ?? null) as number | null,
  }));
  const def: EncoderDef = {
    layers,
    inputSampleRate: header.input_sample_rate,
    epsilon: header.epsilon ?? 1e-5,
    model: header.model ?? null,
    revision: header.revision ?? null,
  };

  let pos = start + headerLen;
  const take = (count: number): Float32Array => {
    const end = pos + 4 * count;
    if (end > raw.length) throw new Error(`${path}: container truncated`);
    const bytes = new Uint8Array(raw.subarray(pos, end));
    pos = end;
    return new Float32Array(bytes.buffer);
  };
  const tensors: LayerTensors[] = layers.map((layer) => {
    const t: LayerTensors = {
      weight: take(layer.out_channels * layer.in_channels * layer.kernel),
    };
    if (layer.bias) t.bias = take(layer.out_channels);
    if (layer.normalization !== "none") {
      t.normWeight = take(layer.out_channels);
      t.normBias = take(layer.out_channels);
    }
    return t;
  });
  if (pos !== raw.length) {
    throw new Error(`${path}: ${raw.length - pos} trailing bytes after tensors`);
  }
  validateLayers(def, tensors);
  return { def, tensors };
}

function toLEBytes(arr: Float32Array): Buffer {
  // node Buffers are little-endian on every supported platform for TypedArray
  // views, but go through a DataView to make the byte order explicit
  const out = Buffer.alloc(arr.length * 4);
  const view = new DataView(out.buffer, out.byteOffset, out.byteLength);
  for (let i = 0; i < arr.length; i++) view.setFloat32(i * 4, arr[i], true);
  return out;
}
