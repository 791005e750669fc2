"""Minimal RIFF/WAVE reader and writer.

Supports exactly what the pipeline needs: little-endian mono files carrying
16-bit integer PCM (format tag 1) or 32-bit IEEE float (format tag 3).
Unknown chunks are skipped on read. Malformed structure, unsupported
encodings and truncated data are reported as distinct error types.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .audio import AudioBuffer
from .errors import MalformedWavError, TruncatedWavError, UnsupportedWavError

PCM16_SCALE = 32768.0

_FMT_PCM = 1
_FMT_FLOAT = 3


def read_wav(path) -> AudioBuffer:
    """Read a mono pcm16/float32 WAV file into an AudioBuffer.

    16-bit samples are scaled by 1/32768; float samples are taken as-is.
    Either way every returned value is exactly representable in float32.
    """
    data = Path(path).read_bytes()
    if len(data) < 12:
        raise MalformedWavError(f"{path}: too short for a RIFF header ({len(data)} bytes)")
    if data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedWavError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = pos + 8
        if cid == b"fmt ":
            if size < 16 or body + 16 > len(data):
                raise MalformedWavError(f"{path}: fmt chunk too small")
            fmt = struct.unpack_from("<HHIIHH", data, body)
        elif cid == b"data":
            if fmt is None:
                raise MalformedWavError(f"{path}: data chunk precedes fmt chunk")
            return _decode(path, fmt, data, body, size)
        pos = body + size + (size & 1)
    if fmt is None:
        raise MalformedWavError(f"{path}: missing fmt chunk")
    raise MalformedWavError(f"{path}: missing data chunk")


def _decode(path, fmt, data, body, size) -> AudioBuffer:
    tag, channels, rate, _byte_rate, _block_align, bits = fmt
    if tag not in (_FMT_PCM, _FMT_FLOAT):
        raise UnsupportedWavError(f"{path}: unsupported format tag {tag}")
    if channels != 1:
        raise UnsupportedWavError(f"{path}: expected mono, got {channels} channels")
    if tag == _FMT_PCM and bits != 16:
        raise UnsupportedWavError(f"{path}: only 16-bit integer PCM is supported, got {bits}-bit")
    if tag == _FMT_FLOAT and bits != 32:
        raise UnsupportedWavError(f"{path}: only 32-bit float is supported, got {bits}-bit")
    if body + size > len(data):
        raise TruncatedWavError(
            f"{path}: data chunk declares {size} bytes but only "
            f"{len(data) - body} remain"
        )
    raw = data[body:body + size]
    if tag == _FMT_PCM:
        samples = np.frombuffer(raw[:size - (size % 2)], dtype="<i2").astype(np.float64)
        samples /= PCM16_SCALE
    else:
        samples = np.frombuffer(raw[:size - (size % 4)], dtype="<f4").astype(np.float64)
    return AudioBuffer(samples, rate)


def write_wav(buffer: AudioBuffer, path, encoding: str = "float32") -> int:
    """Write buffer to a WAV file; returns the number of clipped samples.

    encoding "float32" stores samples exactly (for float32-representable
    values, read_wav inverts it bit for bit). encoding "pcm16" clips to
    [-1, 1], scales by 32768 and rounds half away from zero; the return
    value counts samples that fell outside [-1, 1]. +1.0 itself saturates
    to 32767 without counting as clipped.
    """
    x = buffer.samples
    clipped = 0
    if encoding == "pcm16":
        clipped = int(np.count_nonzero((x < -1.0) | (x > 1.0)))
        y = np.clip(x, -1.0, 1.0) * PCM16_SCALE
        y = np.copysign(np.floor(np.abs(y) + 0.5), y)
        np.clip(y, -32768, 32767, out=y)
        payload = y.astype("<i2").tobytes()
        bits, tag = 16, _FMT_PCM
    elif encoding == "float32":
        payload = x.astype("<f4").tobytes()
        bits, tag = 32, _FMT_FLOAT
    else:
        raise ValueError(f"unknown encoding {encoding!r} (use 'pcm16' or 'float32')")

    block_align = bits // 8
    header = b"".join([
        b"RIFF",
        struct.pack("<I", 36 + len(payload)),
        b"WAVE",
        b"fmt ",
        struct.pack("<IHHIIHH", 16, tag, 1, buffer.sample_rate,
                    buffer.sample_rate * block_align, block_align, bits),
        b"data",
        struct.pack("<I", len(payload)),
    ])
    Path(path).write_bytes(header + payload)
    return clipped
