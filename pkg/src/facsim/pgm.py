"""Binary PGM (P5, maxval 255) I/O and the synthetic test corpus."""

from __future__ import annotations

import os
import re
import tempfile
from pathlib import Path

import numpy as np

_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*([^\s#]+)")


def parse_pgm(data: bytes) -> np.ndarray:
    pos = 0
    fields = []
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if not m:
            raise ValueError("truncated PGM header")
        fields.append(m.group(1))
        pos = m.end()
    magic, w, h, maxval = fields
    if magic != b"P5":
        raise ValueError(f"only binary PGM (P5) is supported, got {magic!r}")
    w, h, maxval = int(w), int(h), int(maxval)
    if maxval != 255:
        raise ValueError(f"only 8-bit PGM (maxval 255) is supported, got {maxval}")
    pos += 1  # single whitespace byte after maxval
    body = data[pos:pos + w * h]
    if len(body) != w * h:
        raise ValueError(f"PGM body holds {len(body)} bytes, expected {w * h}")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w).copy()


def read_pgm(path: str | os.PathLike) -> np.ndarray:
    return parse_pgm(Path(path).read_bytes())


def encode_pgm(pixels: np.ndarray) -> bytes:
    pixels = np.asarray(pixels)
    if pixels.ndim != 2 or pixels.dtype != np.uint8:
        raise ValueError("expected a 2-D uint8 array")
    h, w = pixels.shape
    return b"P5\n%d %d\n255\n" % (w, h) + pixels.tobytes()


def atomic_write(path: str | os.PathLike, data: bytes | str) -> None:
    """Write to a sibling temp file, then rename over ``path``."""
    path = Path(path)
    if isinstance(data, str):
        data = data.encode()
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_pgm(path: str | os.PathLike, pixels: np.ndarray) -> None:
    atomic_write(path, encode_pgm(pixels))


def synthetic_corpus(size: int = 512, seed: int = 0) -> dict[str, np.ndarray]:
    """Deterministic 8-bit test images: gradients, a checkerboard, rings and
    band-limited noise."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    images = {}
    images["gradient"] = np.round((x + y) * 255.0 / (2 * (size - 1)))
    images["checkerboard"] = np.where(((x // 32) + (y // 32)) % 2 == 0, 48.0, 208.0)
    r = np.hypot(x - size / 2, y - size / 2)
    images["rings"] = np.round(127.5 + 100.0 * np.cos(r / 9.0) * np.exp(-r / size))
    noise = rng.standard_normal((size, size))
    spec = np.fft.fft2(noise)
    fy = np.fft.fftfreq(size)[:, None]
    fx = np.fft.fftfreq(size)[None, :]
    spec[np.hypot(fx, fy) > 0.08] = 0
    smooth = np.real(np.fft.ifft2(spec))
    smooth = (smooth - smooth.mean()) / smooth.std()
    images["bandnoise"] = np.round(128.0 + 40.0 * smooth)
    # a photo-like mix: soft shapes on a ramp with mild texture
    blob = 90.0 * np.exp(-((x - 0.3 * size) ** 2 + (y - 0.6 * size) ** 2) / (0.02 * size * size))
    square = np.where((abs(x - 0.7 * size) < 0.12 * size) & (abs(y - 0.3 * size) < 0.12 * size), 70.0, 0.0)
    images["scene"] = np.round(40.0 + 0.25 * x + blob + square + 12.0 * smooth)
    return {k: np.clip(v, 0, 255).astype(np.uint8) for k, v in images.items()}
