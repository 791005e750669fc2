"""Convolutional feature-encoder forward pass and its weight container.

The encoder is a stack of valid (no padding) strided 1-D convolutions, each
followed by optional group/layer normalization and an exact (erf-based)
GELU. Weights travel in a flat ".fenc" container: one ASCII magic line, a
canonical JSON header describing the layer stack, then raw little-endian
float32 tensors in declaration order (weight, then bias, then the
normalization gain/shift when present), C-contiguous with the weight laid
out (out_channels, in_channels, kernel).

Nothing here depends on an ML framework; the container is the interchange
point with whatever exported the pretrained model.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.special import erf

from . import kernels
from .audio import AudioBuffer
from .stft import KIND_ENCODER, FeatureMap

MAGIC = b"FENC1"
NORM_NONE = "none"
NORM_GROUP = "group_norm"
NORM_LAYER = "layer_norm"
DEFAULT_EPSILON = 1e-5


@dataclass(frozen=True)
class ConvLayerSpec:
    in_channels: int
    out_channels: int
    kernel: int
    stride: int
    bias: bool = False
    normalization: str = NORM_NONE
    groups: Optional[int] = None

    def __post_init__(self):
        if self.kernel < self.stride or self.stride < 1:
            raise ValueError(
                f"need kernel >= stride >= 1, got kernel {self.kernel}, stride {self.stride}")
        if min(self.in_channels, self.out_channels) < 1:
            raise ValueError("channel counts must be positive")
        if self.normalization not in (NORM_NONE, NORM_GROUP, NORM_LAYER):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if self.normalization == NORM_GROUP:
            if not self.groups or self.out_channels % self.groups:
                raise ValueError(
                    f"group_norm needs groups dividing out_channels, got "
                    f"{self.groups} over {self.out_channels}")
        elif self.groups is not None:
            raise ValueError("groups only applies to group_norm")


@dataclass(frozen=True)
class FeatureEncoderSpec:
    layers: tuple[ConvLayerSpec, ...]
    expected_input_rate: int
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not self.layers:
            raise ValueError("encoder needs at least one layer")
        if self.layers[0].in_channels != 1:
            raise ValueError("first layer must take a single waveform channel")
        for a, b in zip(self.layers, self.layers[1:]):
            if a.out_channels != b.in_channels:
                raise ValueError(
                    f"channel chain broken: {a.out_channels} -> {b.in_channels}")
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def feature_dim(self) -> int:
        return self.layers[-1].out_channels

    @property
    def total_stride(self) -> int:
        return math.prod(layer.stride for layer in self.layers)


def output_frames(spec: FeatureEncoderSpec, n_samples: int) -> int:
    """Apply the per-layer length recurrence t -> (t - kernel)//stride + 1."""
    t = n_samples
    for layer in spec.layers:
        if t < layer.kernel:
            raise ValueError(
                f"input too short: {n_samples} samples do not cover the "
                f"encoder's receptive field")
        t = (t - layer.kernel) // layer.stride + 1
    return t


def gelu_exact(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + erf(x / math.sqrt(2.0)))


def group_norm(x: np.ndarray, groups: int, gain: np.ndarray, shift: np.ndarray,
               eps: float) -> np.ndarray:
    """Normalize (channels, time) jointly within each channel group."""
    c, t = x.shape
    g = x.reshape(groups, c // groups, t)
    mean = g.mean(axis=(1, 2), keepdims=True)
    var = g.var(axis=(1, 2), keepdims=True)
    normed = ((g - mean) / np.sqrt(var + eps)).reshape(c, t)
    return normed * gain[:, None] + shift[:, None]


def layer_norm_channels(x: np.ndarray, gain: np.ndarray, shift: np.ndarray,
                        eps: float) -> np.ndarray:
    """Normalize across channels independently at every time step."""
    mean = x.mean(axis=0, keepdims=True)
    var = x.var(axis=0, keepdims=True)
    normed = (x - mean) / np.sqrt(var + eps)
    return normed * gain[:, None] + shift[:, None]


class EncoderWeights:
    """Per-layer tensors aligned with a FeatureEncoderSpec."""

    def __init__(self, layers: list[dict]):
        self.layers = layers

    def validate(self, spec: FeatureEncoderSpec) -> None:
        if len(self.layers) != len(spec.layers):
            raise ValueError(
                f"{len(self.layers)} weight sets for {len(spec.layers)} layers")
        for i, (tensors, layer) in enumerate(zip(self.layers, spec.layers)):
            w = tensors["weight"]
            expect = (layer.out_channels, layer.in_channels, layer.kernel)
            if w.shape != expect:
                raise ValueError(f"layer {i}: weight shape {w.shape}, expected {expect}")
            if layer.bias != ("bias" in tensors):
                raise ValueError(f"layer {i}: bias presence does not match the declared layer")
            if (layer.normalization != NORM_NONE) != ("norm_weight" in tensors):
                raise ValueError(f"layer {i}: normalization tensors do not match the declared layer")
            for key in ("bias", "norm_weight", "norm_bias"):
                if key in tensors and tensors[key].shape != (layer.out_channels,):
                    raise ValueError(
                        f"layer {i}: {key} shape {tensors[key].shape}, expected "
                        f"({layer.out_channels},)")


def feature_encoder_forward(buffer: AudioBuffer, spec: FeatureEncoderSpec,
                            weights: EncoderWeights) -> FeatureMap:
    """Run the conv stack; returns T x F encoder features."""
    if buffer.sample_rate != spec.expected_input_rate:
        raise ValueError(
            f"buffer at {buffer.sample_rate} Hz, encoder expects "
            f"{spec.expected_input_rate} Hz")
    weights.validate(spec)
    output_frames(spec, len(buffer))  # raises when below the receptive field
    x = buffer.samples[None, :]
    for layer, tensors in zip(spec.layers, weights.layers):
        x = kernels.conv1d(np.ascontiguousarray(x), tensors["weight"],
                           tensors.get("bias"), layer.stride)
        if layer.normalization == NORM_GROUP:
            x = group_norm(x, layer.groups, tensors["norm_weight"],
                           tensors["norm_bias"], spec.epsilon)
        elif layer.normalization == NORM_LAYER:
            x = layer_norm_channels(x, tensors["norm_weight"],
                                    tensors["norm_bias"], spec.epsilon)
        x = gelu_exact(x)
    frame_rate = buffer.sample_rate / spec.total_stride
    return FeatureMap(x.T, frame_rate, KIND_ENCODER)


def _layer_header(layer: ConvLayerSpec) -> dict:
    return {
        "bias": layer.bias,
        "groups": layer.groups,
        "in_channels": layer.in_channels,
        "kernel": layer.kernel,
        "normalization": layer.normalization,
        "out_channels": layer.out_channels,
        "stride": layer.stride,
    }


def write_fenc(path, spec: FeatureEncoderSpec, weights: EncoderWeights,
               model: Optional[str] = None, revision: Optional[str] = None) -> None:
    weights.validate(spec)
    header = {
        "epsilon": spec.epsilon,
        "input_sample_rate": spec.expected_input_rate,
        "layers": [_layer_header(layer) for layer in spec.layers],
        "model": model,
        "revision": revision,
        "version": 1,
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC + b" " + str(len(blob)).encode("ascii") + b"\n")
        fh.write(blob)
        for layer, tensors in zip(spec.layers, weights.layers):
            fh.write(np.ascontiguousarray(tensors["weight"], dtype="<f4").tobytes())
            if layer.bias:
                fh.write(np.ascontiguousarray(tensors["bias"], dtype="<f4").tobytes())
            if layer.normalization != NORM_NONE:
                fh.write(np.ascontiguousarray(tensors["norm_weight"], dtype="<f4").tobytes())
                fh.write(np.ascontiguousarray(tensors["norm_bias"], dtype="<f4").tobytes())


def read_fenc(path):
    """Load a container; returns (spec, weights, header dict)."""
    data = Path(path).read_bytes()
    nl = data.find(b"\n")
    if nl < 0 or not data.startswith(MAGIC + b" "):
        raise ValueError(f"{path}: not a feature-encoder container")
    try:
        header_len = int(data[len(MAGIC) + 1:nl])
    except ValueError:
        raise ValueError(f"{path}: bad header length") from None
    start = nl + 1
    header = json.loads(data[start:start + header_len].decode("utf-8"))
    if header.get("version") != 1:
        raise ValueError(f"{path}: unsupported container version {header.get('version')}")

    layers = []
    for h in header["layers"]:
        layers.append(ConvLayerSpec(
            in_channels=h["in_channels"], out_channels=h["out_channels"],
            kernel=h["kernel"], stride=h["stride"], bias=h["bias"],
            normalization=h["normalization"], groups=h.get("groups")))
    spec = FeatureEncoderSpec(
        layers=tuple(layers),
        expected_input_rate=header["input_sample_rate"],
        epsilon=float(header.get("epsilon", DEFAULT_EPSILON)))

    pos = start + header_len
    tensors_per_layer = []

    def take(shape):
        nonlocal pos
        count = math.prod(shape)
        end = pos + 4 * count
        if end > len(data):
            raise ValueError(f"{path}: container truncated")
        arr = np.frombuffer(data[pos:end], dtype="<f4").reshape(shape).astype(np.float64)
        pos = end
        return arr

    for layer in spec.layers:
        tensors = {"weight": take((layer.out_channels, layer.in_channels, layer.kernel))}
        if layer.bias:
            tensors["bias"] = take((layer.out_channels,))
        if layer.normalization != NORM_NONE:
            tensors["norm_weight"] = take((layer.out_channels,))
            tensors["norm_bias"] = take((layer.out_channels,))
        tensors_per_layer.append(tensors)
    if pos != len(data):
        raise ValueError(f"{path}: {len(data) - pos} trailing bytes after tensors")
    return spec, EncoderWeights(tensors_per_layer), header
