/**
 * Export jobs: pull the feature-encoder conv stack out of a checkpoint into
 * a .fenc container, and run probe signals through the reference forward
 * pass to produce verification fixtures.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { EncoderDef, LayerSpec, LayerTensors, readFenc, writeFenc } from "./fenc";
import { encoderForward } from "./forward";
import { writeFeat } from "./fixtures";
import { MODELS, layersForArch, layersFromMetadata, outputFrames } from "./models";
import { Checkpoint, readSafetensors } from "./safetensors";
import { readWav } from "./wav";

function findTensor(checkpoint: Checkpoint, candidates: string[]): Float32Array {
  for (const name of candidates) {
    const tensor = checkpoint.tensors.get(name);
    if (tensor) return tensor.data;
  }
  throw new Error(`checkpoint is missing a layer tensor (tried: ${candidates.join(", ")})`);
}

/**
 * Tensor names per layer, in the two conventions seen in the wild: the
 * transformers-style "conv_layers.{i}.conv.weight" and the fairseq-style
 * sequential indices ("conv_layers.{i}.0.weight" for the conv,
 * ".2.weight" for the first-layer group norm, ".2.1.weight" for the
 * per-layer layer norm).
 */
function tensorCandidates(i: number, kind: "weight" | "bias",
                          what: "conv" | "norm", norm: string): string[] {
  const base = `feature_extractor.conv_layers.${i}`;
  if (what === "conv") {
    return [`${base}.conv.${kind}`, `${base}.0.${kind}`];
  }
  if (norm === "group_norm") {
    return [`${base}.layer_norm.${kind}`, `${base}.2.${kind}`];
  }
  return [`${base}.layer_norm.${kind}`, `${base}.2.1.${kind}`];
}

export function resolveLayers(checkpoint: Checkpoint, model?: string): {
  layers: LayerSpec[];
  modelName: string | null;
} {
  if (model && model !== "custom") {
    const arch = MODELS[model];
    if (!arch) {
      throw new Error(`unknown model ${model}; known: ${Object.keys(MODELS).join(", ")}, custom`);
    }
    return { layers: layersForArch(arch), modelName: model };
  }
  const fromMeta = layersFromMetadata(checkpoint.metadata);
  if (fromMeta) {
    return { layers: fromMeta, modelName: checkpoint.metadata["model"] ?? null };
  }
  throw new Error(
    "checkpoint carries no architecture metadata; pass --model " +
    `(one of ${Object.keys(MODELS).join(", ")})`);
}

export function exportEncoder(checkpointPath: string, outPath: string,
                              model?: string): EncoderDef {
  const checkpoint = readSafetensors(checkpointPath);
  const { layers, modelName } = resolveLayers(checkpoint, model);

  const tensors: LayerTensors[] = layers.map((layer, i) => {
    const t: LayerTensors = {
      weight: findTensor(checkpoint, tensorCandidates(i, "weight", "conv", layer.normalization)),
    };
    const expect = layer.out_channels * layer.in_channels * layer.kernel;
    if (t.weight.length !== expect) {
      throw new Error(
        `layer ${i}: checkpoint weight holds ${t.weight.length} values, ` +
        `architecture expects ${expect}`);
    }
    if (layer.bias) {
      t.bias = findTensor(checkpoint, tensorCandidates(i, "bias", "conv", layer.normalization));
    }
    if (layer.normalization !== "none") {
      t.normWeight = findTensor(
        checkpoint, tensorCandidates(i, "weight", "norm", layer.normalization));
      t.normBias = findTensor(
        checkpoint, tensorCandidates(i, "bias", "norm", layer.normalization));
    }
    return t;
  });

  const def: EncoderDef = {
    layers,
    inputSampleRate: Number(checkpoint.metadata["input_sample_rate"] ?? 16000),
    epsilon: Number(checkpoint.metadata["normalization_epsilon"] ?? 1e-5),
    model: modelName,
    revision: checkpoint.metadata["revision"] ?? null,
  };
  writeFenc(outPath, def, tensors);
  return def;
}

export interface FixtureResult {
  probe: string;
  outPath: string;
  frames: number;
  dim: number;
}

export function generateFixtures(containerPath: string, probesDir: string,
                                 outDir: string): FixtureResult[] {
  const { def, tensors } = readFenc(containerPath);
  const stem = path.basename(containerPath).replace(/\.fenc$/, "");
  const probes = fs.readdirSync(probesDir).filter((f) => f.endsWith(".wav")).sort();
  if (probes.length === 0) throw new Error(`no probe WAVs in ${probesDir}`);
  fs.mkdirSync(outDir, { recursive: true });

  const results: FixtureResult[] = [];
  for (const probe of probes) {
    const audio = readWav(path.join(probesDir, probe));
    if (audio.sampleRate !== def.inputSampleRate) {
      throw new Error(
        `${probe}: ${audio.sampleRate} Hz, encoder expects ${def.inputSampleRate} Hz`);
    }
    const matrix = encoderForward(def, tensors, audio.samples);
    const expected = outputFrames(def.layers, audio.samples.length);
    if (matrix.frames !== expected) {
      throw new Error(`${probe}: forward produced ${matrix.frames} frames, recurrence says ${expected}`);
    }
    const probeStem = probe.replace(/\.wav$/, "");
    const outPath = path.join(outDir, `${stem}__${probeStem}.feat`);
    writeFeat(outPath, matrix);
    results.push({ probe, outPath, frames: matrix.frames, dim: matrix.dim });
  }
  return results;
}
