"""PSNR and SSIM between a reference image and a processed one."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

PEAK = 255.0
WINDOW = 11
SIGMA = 1.5
K1, K2 = 0.01, 0.03
INFINITY_MARKER = "inf"


def _pair(reference, processed) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(reference, dtype=np.float64)
    b = np.asarray(processed, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def mse(reference, processed) -> float:
    a, b = _pair(reference, processed)
    return float(np.mean((a - b) ** 2))


def psnr(reference, processed) -> float:
    """``10 log10(255^2 / MSE)`` in dB; ``math.inf`` for identical images."""
    err = mse(reference, processed)
    if err == 0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / err)


def gaussian_window(size: int = WINDOW, sigma: float = SIGMA) -> np.ndarray:
    """1-D normalised Gaussian; the 2-D window is its outer product."""
    r = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(r * r) / (2.0 * sigma * sigma))
    return g / g.sum()


def _filter_valid(img: np.ndarray, g: np.ndarray) -> np.ndarray:
    k = g.size
    rows = sliding_window_view(img, k, axis=1) @ g
    return sliding_window_view(rows, k, axis=0) @ g


def ssim_map(reference, processed) -> np.ndarray:
    a, b = _pair(reference, processed)
    if a.ndim != 2 or min(a.shape) < WINDOW:
        raise ValueError(f"SSIM needs 2-D images at least {WINDOW} pixels per side")
    g = gaussian_window()
    mu_a = _filter_valid(a, g)
    mu_b = _filter_valid(b, g)
    var_a = _filter_valid(a * a, g) - mu_a * mu_a
    var_b = _filter_valid(b * b, g) - mu_b * mu_b
    cov = _filter_valid(a * b, g) - mu_a * mu_b
    c1 = (K1 * PEAK) ** 2
    c2 = (K2 * PEAK) ** 2
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return num / den


def ssim(reference, processed) -> float:
    """Mean SSIM over every fully-contained 11x11 Gaussian window (sigma 1.5)."""
    a, b = _pair(reference, processed)
    if np.array_equal(a, b):
        # skip float cancellation noise so identical images score exactly 1
        ssim_map(a, b)
        return 1.0
    return float(np.mean(ssim_map(a, b)))


@dataclass(frozen=True)
class QualityReport:
    mse: float
    psnr: float
    ssim: float

    def to_dict(self) -> dict:
        return {
            "mse": self.mse,
            "psnr": INFINITY_MARKER if math.isinf(self.psnr) else self.psnr,
            "ssim": self.ssim,
        }


def quality_report(reference, processed) -> QualityReport:
    return QualityReport(mse(reference, processed), psnr(reference, processed), ssim(reference, processed))
