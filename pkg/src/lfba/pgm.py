"""Binary PGM (P5, 8-bit) encoding for frame inspection and the panel thumbnail."""

from __future__ import annotations

import numpy as np


def encode(image: np.ndarray) -> bytes:
    """Encode a float image with intensities in [0,1] as 8-bit binary PGM."""
    if image.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {image.shape}")
    pixels = np.clip(np.rint(np.asarray(image, dtype=np.float64) * 255.0), 0, 255)
    header = f"P5\n{image.shape[1]} {image.shape[0]}\n255\n".encode("ascii")
    return header + pixels.astype(np.uint8).tobytes()


def decode(data: bytes) -> np.ndarray:
    """Decode binary PGM bytes back to a float image in [0,1]."""
    if not data.startswith(b"P5"):
        raise ValueError("not a binary PGM (P5) payload")
    # Header: magic, width, height, maxval, each optionally separated by
    # whitespace or comment lines starting with '#'.
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError("truncated PGM header")
        fields.append(int(data[start:pos]))
    pos += 1  # single whitespace after maxval
    width, height, maxval = fields
    if maxval != 255:
        raise ValueError(f"only maxval 255 supported, got {maxval}")
    raster = data[pos : pos + width * height]
    if len(raster) != width * height:
        raise ValueError("truncated PGM raster")
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return pixels.astype(np.float64) / 255.0
