/**
 * Conv-stack layouts of the supported pretrained models, plus a
 * metadata-driven escape hatch for custom checkpoints.
 *
 * All four published models share the same seven-layer geometry
 * (kernels 10,3,3,3,3,2,2 / strides 5,2,2,2,2,2,2, 512 channels); they
 * differ in normalization placement and conv bias:
 *  - hubert-base, mhubert, wavlm-base-plus: group norm (one group per
 *    channel) after the first conv only, no conv bias.
 *  - xlsr: per-channel layer norm after every conv, conv bias present.
 */

import { LayerSpec, Normalization } from "./fenc";

export interface ModelArch {
  kernels: number[];
  strides: number[];
  dim: number;
  convBias: boolean;
  norm: "first_group" | "all_layer";
}

const BASE: ModelArch = {
  kernels: [10, 3, 3, 3, 3, 2, 2],
  strides: [5, 2, 2, 2, 2, 2, 2],
  dim: 512,
  convBias: false,
  norm: "first_group",
};

export const MODELS: Record<string, ModelArch> = {
  "hubert-base": BASE,
  "mhubert": BASE,
  "wavlm-base-plus": BASE,
  "xlsr": { ...BASE, convBias: true, norm: "all_layer" },
};

export function layersForArch(arch: ModelArch): LayerSpec[] {
  return arch.kernels.map((kernel, i) => {
    let normalization: Normalization = "none";
    let groups: number | null = null;
    if (arch.norm === "all_layer") {
      normalization = "layer_norm";
    } else if (i === 0) {
      normalization = "group_norm";
      groups = arch.dim;
    }
    return {
      in_channels: i === 0 ? 1 : arch.dim,
      out_channels: arch.dim,
      kernel,
      stride: arch.strides[i],
      bias: arch.convBias,
      normalization,
      groups,
    };
  });
}

interface MetadataLayer {
  in_channels: number;
  out_channels: number;
  kernel: number;
  stride: number;
  bias: boolean;
  normalization: Normalization;
  groups: number | null;
}

/** Layer list embedded in a checkpoint's __metadata__.architecture, if any. */
export function layersFromMetadata(metadata: Record<string, string>): LayerSpec[] | null {
  const encoded = metadata["architecture"];
  if (!encoded) return null;
  const parsed = JSON.parse(encoded) as MetadataLayer[];
  return parsed.map((layer) => ({
    in_channels: layer.in_channels,
    out_channels: layer.out_channels,
    kernel: layer.kernel,
    stride: layer.stride,
    bias: layer.bias,
    normalization: layer.normalization,
    groups: layer.groups ?? null,
  }));
}

/** Frame count after the whole stack: t -> floor((t - kernel)/stride) + 1. */
export function outputFrames(layers: LayerSpec[], nSamples: number): number {
  let t = nSamples;
  for (const layer of layers) {
    if (t < layer.kernel) {
      throw new Error(`input of ${nSamples} samples does not cover the receptive field`);
    }
    t = Math.floor((t - layer.kernel) / layer.stride) + 1;
  }
  return t;
}
