/**
 * Reference forward pass for fixture generation: valid strided 1-D
 * convolutions with optional group/layer normalization and exact
 * (erf-based) GELU, computed in float64 throughout.
 */

import { EncoderDef, LayerTensors } from "./fenc";
import { outputFrames } from "./models";

/** Double-precision error function: Maclaurin series below 2.5, a
 * bottom-up continued fraction for the complement above. */
export function erf(x: number): number {
  if (x === 0) return 0;
  const ax = Math.abs(x);
  let value: number;
  if (ax < 2.5) {
    let term = ax;
    let sum = ax;
    for (let k = 1; k <= 200; k++) {
      term *= (-ax * ax) / k;
      const add = term / (2 * k + 1);
      sum += add;
      if (Math.abs(add) < 1e-18 * Math.abs(sum)) break;
    }
    value = (2 / Math.sqrt(Math.PI)) * sum;
  } else {
    let cf = 0;
    for (let k = 80; k >= 1; k--) {
      cf = (k / (2 * ax * ax)) / (1 + cf);
    }
    const erfc = (Math.exp(-ax * ax) / (ax * Math.sqrt(Math.PI))) / (1 + cf);
    value = 1 - erfc;
  }
  return x < 0 ? -value : value;
}

export function gelu(x: number): number {
  return 0.5 * x * (1 + erf(x / Math.SQRT2));
}

export interface FeatureMatrix {
  frames: number;
  dim: number;
  /** row-major (frames, dim) */
  values: Float64Array;
}

interface Planes {
  channels: number;
  steps: number;
  /** layout [c * steps + t] */
  data: Float64Array;
}

function conv1d(x: Planes, weight: Float32Array, bias: Float32Array | undefined,
                cOut: number, kernel: number, stride: number): Planes {
  const cIn = x.channels;
  const tOut = Math.floor((x.steps - kernel) / stride) + 1;
  const out = new Float64Array(cOut * tOut);
  for (let o = 0; o < cOut; o++) {
    const wBase = o * cIn * kernel;
    for (let c = 0; c < cIn; c++) {
      const xBase = c * x.steps;
      const wRow = wBase + c * kernel;
      for (let t = 0; t < tOut; t++) {
        let acc = out[o * tOut + t];
        const start = xBase + t * stride;
        for (let k = 0; k < kernel; k++) {
          acc += weight[wRow + k] * x.data[start + k];
        }
        out[o * tOut + t] = acc;
      }
    }
    if (bias !== undefined) {
      for (let t = 0; t < tOut; t++) out[o * tOut + t] += bias[o];
    }
  }
  return { channels: cOut, steps: tOut, data: out };
}

function groupNorm(x: Planes, groups: number, gain: Float32Array,
                   shift: Float32Array, eps: number): void {
  const perGroup = x.channels / groups;
  const count = perGroup * x.steps;
  for (let g = 0; g < groups; g++) {
    const base = g * perGroup * x.steps;
    let mean = 0;
    for (let i = 0; i < count; i++) mean += x.data[base + i];
    mean /= count;
    let variance = 0;
    for (let i = 0; i < count; i++) {
      const d = x.data[base + i] - mean;
      variance += d * d;
    }
    variance /= count;
    const inv = 1 / Math.sqrt(variance + eps);
    for (let c = 0; c < perGroup; c++) {
      const channel = g * perGroup + c;
      const row = channel * x.steps;
      for (let t = 0; t < x.steps; t++) {
        x.data[row + t] = (x.data[row + t] - mean) * inv * gain[channel] + shift[channel];
      }
    }
  }
}

function layerNorm(x: Planes, gain: Float32Array, shift: Float32Array, eps: number): void {
  for (let t = 0; t < x.steps; t++) {
    let mean = 0;
    for (let c = 0; c < x.channels; c++) mean += x.data[c * x.steps + t];
    mean /= x.channels;
    let variance = 0;
    for (let c = 0; c < x.channels; c++) {
      const d = x.data[c * x.steps + t] - mean;
      variance += d * d;
    }
    variance /= x.channels;
    const inv = 1 / Math.sqrt(variance + eps);
    for (let c = 0; c < x.channels; c++) {
      const i = c * x.steps + t;
      x.data[i] = (x.data[i] - mean) * inv * gain[c] + shift[c];
    }
  }
}

export function encoderForward(def: EncoderDef, tensors: LayerTensors[],
                               samples: Float64Array): FeatureMatrix {
  outputFrames(def.layers, samples.length); // throws below the receptive field
  let x: Planes = { channels: 1, steps: samples.length, data: Float64Array.from(samples) };
  def.layers.forEach((layer, i) => {
    const t = tensors[i];
    x = conv1d(x, t.weight, layer.bias ? t.bias : undefined,
               layer.out_channels, layer.kernel, layer.stride);
    if (layer.normalization === "group_norm") {
      groupNorm(x, layer.groups!, t.normWeight!, t.normBias!, def.epsilon);
    } else if (layer.normalization === "layer_norm") {
      layerNorm(x, t.normWeight!, t.normBias!, def.epsilon);
    }
    for (let j = 0; j < x.data.length; j++) x.data[j] = gelu(x.data[j]);
  });
  // transpose (channels, steps) -> (frames, dim)
  const values = new Float64Array(x.steps * x.channels);
  for (let c = 0; c < x.channels; c++) {
    for (let t = 0; t < x.steps; t++) {
      values[t * x.channels + c] = x.data[c * x.steps + t];
    }
  }
  return { frames: x.steps, dim: x.channels, values };
}
