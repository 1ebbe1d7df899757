"""Fixed-point FFT/IFFT image round trip with a pluggable 32-bit adder.

Samples are signed 32-bit integers held in int64 arrays.  Every addition and
subtraction in a butterfly (including the two inside the twiddle product) goes
through the adder model on two's-complement words; subtraction adds the
negated operand.  Twiddle products are exact multiplies of Q15 constants,
rounded back to integers.

Scaling: the forward transform halves its outputs after every stage, so it
computes ``DFT/n``.  That already carries the ``1/n`` of the inverse, so the
inverse runs unscaled.  With exact adders every intermediate value stays
within the input's magnitude, which is why pixels can be pre-scaled by
``2**22`` (255 * 2**22 < 2**30) without overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from facsim import _backend
from facsim.words import AdderSpec, Strategy

PIXEL_SHIFT = 22
Q15 = 1 << 15
MAX_FFT = 4096


@dataclass(frozen=True)
class AdderModel:
    """``spec is None`` selects the exact adder."""

    spec: AdderSpec | None = None

    def __post_init__(self):
        if self.spec is not None and self.spec.N != 32:
            raise ValueError("the image pipeline uses 32-bit adders")

    @classmethod
    def exact(cls) -> "AdderModel":
        return cls(None)

    @classmethod
    def imprecise(cls, L: int, strategy: Strategy = Strategy.OR_BITS) -> "AdderModel":
        return cls(AdderSpec(32, L, strategy))

    @property
    def code(self) -> int:
        return _backend.ADD_EXACT if self.spec is None else self.spec.strategy.code

    @property
    def L(self) -> int:
        return 0 if self.spec is None else self.spec.L

    def describe(self) -> dict:
        if self.spec is None:
            return {"kind": "exact", "N": 32}
        return {"kind": "imprecise", "N": 32, "L": self.spec.L, "strategy": self.spec.strategy.value}


@dataclass
class OpCounter:
    additions: int = 0
    overflows: int = 0


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return (np.sign(x) * np.floor(np.abs(x) + 0.5)).astype(np.int64)


def twiddles(m: int, inverse: bool) -> tuple[np.ndarray, np.ndarray]:
    """Q15 twiddles ``exp(-+2 pi i j / m)`` for ``j < m/2``."""
    j = np.arange(m // 2)
    ang = (2.0 if inverse else -2.0) * math.pi * j / m
    return _round_half_away(np.cos(ang) * Q15), _round_half_away(np.sin(ang) * Q15)


def _bit_reverse(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def _check_length(n: int) -> None:
    if n < 1 or n & (n - 1) or n > MAX_FFT:
        raise ValueError(f"FFT length must be a power of two <= {MAX_FFT}, got {n}")


def fft1d(re, im, adder: AdderModel, inverse: bool = False, scale: bool | None = None,
          counter: OpCounter | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Radix-2 decimation-in-time transform along the last axis.

    ``scale`` (default: forward only) halves every stage's outputs.
    """
    re = np.asarray(re, dtype=np.int64)
    im = np.asarray(im, dtype=np.int64)
    if re.shape != im.shape:
        raise ValueError("real and imaginary parts differ in shape")
    shape = re.shape
    n = shape[-1]
    _check_length(n)
    if scale is None:
        scale = not inverse
    perm = _bit_reverse(n)
    R = np.ascontiguousarray(re.reshape(-1, n)[:, perm])
    I = np.ascontiguousarray(im.reshape(-1, n)[:, perm])
    m = 2
    while m <= n:
        wr, wi = twiddles(m, inverse)
        adds, ovf = _backend.fft_stage(R, I, wr, wi, adder.code, adder.L, bool(scale))
        if counter is not None:
            counter.additions += adds
            counter.overflows += ovf
        m *= 2
    return R.reshape(shape), I.reshape(shape)


def fft2d(re, im, adder: AdderModel, counter: OpCounter | None = None):
    """Rows, then columns."""
    re, im = fft1d(re, im, adder, counter=counter)
    re, im = fft1d(re.T, im.T, adder, counter=counter)
    return np.ascontiguousarray(re.T), np.ascontiguousarray(im.T)


def ifft2d(re, im, adder: AdderModel, counter: OpCounter | None = None):
    """Columns, then rows."""
    re, im = fft1d(re.T, im.T, adder, inverse=True, counter=counter)
    re, im = fft1d(np.ascontiguousarray(re.T), np.ascontiguousarray(im.T), adder, inverse=True, counter=counter)
    return re, im


@dataclass(frozen=True)
class FixedPointImage:
    pixels: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pixels)
        if p.ndim != 2:
            raise ValueError("image must be two-dimensional")
        for side in p.shape:
            if side < 1 or side & (side - 1):
                raise ValueError(f"image sides must be powers of two, got {p.shape}")
        if p.dtype != np.uint8:
            if p.size and (p.min() < 0 or p.max() > 255):
                raise ValueError("pixels must lie in 0..255")
            p = p.astype(np.uint8)
        object.__setattr__(self, "pixels", p)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class RoundTrip:
    image: FixedPointImage
    clamped: int
    additions: int
    overflows: int


def round_trip(image: FixedPointImage, adder: AdderModel, pixel_shift: int = PIXEL_SHIFT) -> RoundTrip:
    """FFT then IFFT, rescale, round, clamp to 8 bits; with bookkeeping."""
    if not (0 <= pixel_shift <= 22):
        raise ValueError("pixel_shift must be in 0..22 to keep 32-bit headroom")
    counter = OpCounter()
    re = image.pixels.astype(np.int64) << pixel_shift
    im = np.zeros_like(re)
    re, im = fft2d(re, im, adder, counter)
    re, _ = ifft2d(re, im, adder, counter)
    if pixel_shift:
        re = (re + (1 << (pixel_shift - 1))) >> pixel_shift
    clamped = int(np.count_nonzero((re < 0) | (re > 255)))
    out = np.clip(re, 0, 255).astype(np.uint8)
    return RoundTrip(FixedPointImage(out), clamped, counter.additions, counter.overflows)


def process_image(image: FixedPointImage, adder: AdderModel) -> FixedPointImage:
    return round_trip(image, adder).image
