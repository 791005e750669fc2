"""Flat feature-matrix files: one ASCII shape line, then raw float32.

Format: b"FEAT1 <T> <F>\\n" followed by T*F little-endian float32 values in
row-major order. Used for committed encoder fixtures and the `feats` CLI
output.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

MAGIC = b"FEAT1"


def write_feature_file(path, values: np.ndarray) -> None:
    values = np.asarray(values)
    if values.ndim != 2:
        raise ValueError(f"expected a T x F matrix, got shape {values.shape}")
    t, f = values.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC + f" {t} {f}\n".encode("ascii"))
        fh.write(np.ascontiguousarray(values, dtype="<f4").tobytes())


def read_feature_file(path) -> np.ndarray:
    data = Path(path).read_bytes()
    nl = data.find(b"\n")
    if nl < 0 or not data.startswith(MAGIC + b" "):
        raise ValueError(f"{path}: not a feature file")
    parts = data[len(MAGIC) + 1:nl].split()
    if len(parts) != 2:
        raise ValueError(f"{path}: bad shape header")
    t, f = int(parts[0]), int(parts[1])
    payload = data[nl + 1:]
    if len(payload) != 4 * t * f:
        raise ValueError(
            f"{path}: payload holds {len(payload)} bytes, shape {t}x{f} needs {4 * t * f}")
    return np.frombuffer(payload, dtype="<f4").reshape(t, f).astype(np.float64)
