import assert from "node:assert/strict";
import { test } from "node:test";

import { EncoderDef, LayerTensors } from "../src/fenc";
import { encoderForward, erf, gelu } from "../src/forward";
import { MODELS, layersForArch, outputFrames } from "../src/models";

// reference points computed with an independent scientific library
const ERF_TABLE: Array<[number, number]> = [
  [0.0, 0.0],
  [0.1, 0.1124629160182849],
  [0.5, 0.5204998778130465],
  [1.0, 0.8427007929497148],
  [1.5, 0.9661051464753108],
  [2.0, 0.9953222650189527],
  [2.5, 0.999593047982555],
  [3.0, 0.9999779095030014],
  [4.0, 0.9999999845827421],
  [6.0, 1.0],
  [-0.7, -0.6778011938374183],
  [-2.2, -0.9981371537020182],
];

test("erf matches reference values to 1e-14", () => {
  for (const [x, expected] of ERF_TABLE) {
    assert.ok(Math.abs(erf(x) - expected) < 1e-14, `erf(${x}) = ${erf(x)}`);
  }
});

test("gelu endpoints and symmetry", () => {
  assert.equal(gelu(0), 0);
  assert.ok(Math.abs(gelu(10) - 10) < 1e-12);
  assert.ok(Math.abs(gelu(-10)) < 1e-12);
  for (const x of [0.3, 1.7, 2.4]) {
    // x*Phi(x) + (-x)*Phi(-x) relation: gelu(x) - gelu(-x) = x
    assert.ok(Math.abs(gelu(x) - gelu(-x) - x) < 1e-14);
  }
});

// frozen output of the same two-layer stack computed by two independent
// implementations of the pipeline (all constants dyadic, so float32 and
// float64 weight paths coincide exactly)
const EXPECTED = [
  [0.2166256649146144, -0.08323492644237208, 0.5312003014550387],
  [0.437270121799393, -0.0758735442751719, 0.3835413560958028],
  [1.0373115704234002, -0.0976018016280453, 0.0019258964821451251],
  [0.15787658173348984, 1.290446312390793, -0.1529413332841275],
];

function toyDef(): { def: EncoderDef; tensors: LayerTensors[] } {
  const def: EncoderDef = {
    layers: [
      { in_channels: 1, out_channels: 2, kernel: 3, stride: 2, bias: true,
        normalization: "group_norm", groups: 2 },
      { in_channels: 2, out_channels: 3, kernel: 2, stride: 1, bias: false,
        normalization: "layer_norm", groups: null },
    ],
    inputSampleRate: 16000,
    epsilon: 1e-5,
    model: null,
    revision: null,
  };
  const tensors: LayerTensors[] = [
    {
      weight: Float32Array.from([0.5, -0.25, 0.125, -0.375, 0.625, 0.25]),
      bias: Float32Array.from([0.0625, -0.125]),
      normWeight: Float32Array.from([1.125, 0.875]),
      normBias: Float32Array.from([0.015625, -0.03125]),
    },
    {
      weight: Float32Array.from([
        0.375, -0.1875, 0.3125, 0.125,
        -0.5, 0.25, 0.15625, -0.375,
        0.1875, 0.21875, -0.125, 0.4375,
      ]),
      normWeight: Float32Array.from([1.0, 1.25, 0.75]),
      normBias: Float32Array.from([0.0, 0.0625, -0.0625]),
    },
  ];
  return { def, tensors };
}

test("forward matches the cross-implementation frozen case", () => {
  const { def, tensors } = toyDef();
  const x = Float64Array.from([0.125, -0.25, 0.375, 0.0625, -0.1875, 0.3125,
                               -0.125, 0.25, 0.0, -0.0625, 0.1875, -0.3125]);
  const out = encoderForward(def, tensors, x);
  assert.equal(out.frames, 4);
  assert.equal(out.dim, 3);
  for (let t = 0; t < 4; t++) {
    for (let f = 0; f < 3; f++) {
      const got = out.values[t * 3 + f];
      assert.ok(Math.abs(got - EXPECTED[t][f]) < 1e-12,
                `(${t},${f}): ${got} vs ${EXPECTED[t][f]}`);
    }
  }
});

test("published conv stacks map 1 s of 16 kHz audio to 49 frames of 512", () => {
  for (const name of Object.keys(MODELS)) {
    const layers = layersForArch(MODELS[name]);
    assert.equal(layers.length, 7, name);
    assert.equal(layers[layers.length - 1].out_channels, 512, name);
    assert.equal(outputFrames(layers, 16000), 49, name);
  }
});

test("input below the receptive field is rejected", () => {
  const layers = layersForArch(MODELS["hubert-base"]);
  assert.throws(() => outputFrames(layers, 9), /receptive field/);
});
