"""Pixel-level similarity metrics: mask IoU, multi-scale SSIM, masked l2.

MS-SSIM uses the canonical five scales with weights (0.0448, 0.2856,
0.3001, 0.2363, 0.1333), an 11x11 Gaussian window with sigma 1.5, and
C1 = (0.01*255)^2, C2 = (0.03*255)^2 on the 8-bit dynamic range.  When
the (cropped) input is too small to carry all five scales, the trailing
scales are dropped and the weights renormalized.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import convolve

from ..errors import MaskEmpty, ShapeMismatch

MSSSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
WINDOW_SIZE = 11
WINDOW_SIGMA = 1.5
DYNAMIC_RANGE = 255.0
_C1 = (0.01 * DYNAMIC_RANGE) ** 2
_C2 = (0.03 * DYNAMIC_RANGE) ** 2

# Rec. 601 luma coefficients.
_LUMA = np.array([0.299, 0.587, 0.114])


def mask_iou(m1: np.ndarray, m2: np.ndarray) -> float:
    """IoU of two binary masks; two empty masks count as identical (1)."""
    a = np.asarray(m1).astype(bool)
    b = np.asarray(m2).astype(bool)
    if a.shape != b.shape:
        raise ShapeMismatch(f"mask shapes differ: {a.shape} vs {b.shape}")
    union = np.logical_or(a, b).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(a, b).sum() / union)


def to_luminance(img: np.ndarray) -> np.ndarray:
    """8-bit RGB (or grayscale) to float luminance in [0, 255]."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 3:
        if arr.shape[2] != 3:
            raise ShapeMismatch(f"expected RGB last axis of 3, got {arr.shape}")
        return arr @ _LUMA
    if arr.ndim == 2:
        return arr
    raise ShapeMismatch(f"expected HxW or HxWx3 image, got shape {arr.shape}")


def _gaussian_window(size: int = WINDOW_SIZE, sigma: float = WINDOW_SIGMA) -> np.ndarray:
    half = (size - 1) / 2.0
    xs = np.arange(size) - half
    g = np.exp(-(xs ** 2) / (2.0 * sigma ** 2))
    w = np.outer(g, g)
    return w / w.sum()


_WINDOW = _gaussian_window()


def _filter_valid(img: np.ndarray) -> np.ndarray:
    """Gaussian filter, cropped to the window's valid region."""
    full = convolve(img, _WINDOW, mode="constant")
    k = WINDOW_SIZE // 2
    return full[k:-k, k:-k]


def _ssim_terms(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Mean luminance term and mean contrast-structure term."""
    mu_x = _filter_valid(x)
    mu_y = _filter_valid(y)
    sigma_x = _filter_valid(x * x) - mu_x ** 2
    sigma_y = _filter_valid(y * y) - mu_y ** 2
    sigma_xy = _filter_valid(x * y) - mu_x * mu_y
    lum = (2.0 * mu_x * mu_y + _C1) / (mu_x ** 2 + mu_y ** 2 + _C1)
    cs = (2.0 * sigma_xy + _C2) / (sigma_x + sigma_y + _C2)
    return float(lum.mean()), float(cs.mean())


def _downsample(img: np.ndarray) -> np.ndarray:
    h, w = img.shape
    img = img[: h - h % 2, : w - w % 2]
    return (img[0::2, 0::2] + img[1::2, 0::2]
            + img[0::2, 1::2] + img[1::2, 1::2]) / 4.0


def _crop_to_mask(img: np.ndarray, mask: np.ndarray,
                  min_side: int = 4 * WINDOW_SIZE) -> np.ndarray:
    """Bounding crop of the mask with the complement zeroed.

    The crop is grown (within image bounds) to at least min_side so the
    Gaussian window always fits; the padding is zeroed on both inputs and
    cancels in the comparison.
    """
    ys, xs = np.nonzero(mask)
    out = np.where(mask, img, 0.0)

    def grow(lo, hi, limit):
        need = min(min_side, limit) - (hi - lo)
        if need > 0:
            lo = max(0, lo - need // 2)
            hi = min(limit, lo + min(min_side, limit))
            lo = max(0, hi - min(min_side, limit))
        return lo, hi

    y0, y1 = grow(ys.min(), ys.max() + 1, mask.shape[0])
    x0, x1 = grow(xs.min(), xs.max() + 1, mask.shape[1])
    return out[y0:y1, x0:x1]


def ms_ssim(img_a: np.ndarray, img_b: np.ndarray,
            mask: np.ndarray | None = None) -> float:
    """Multi-scale SSIM of two 8-bit images, optionally mask-restricted.

    With a mask, both images are cropped to the mask's bounding box and
    the complement zeroed before comparison.
    """
    x = to_luminance(img_a)
    y = to_luminance(img_b)
    if x.shape != y.shape:
        raise ShapeMismatch(f"image shapes differ: {x.shape} vs {y.shape}")
    if mask is not None:
        m = np.asarray(mask).astype(bool)
        if m.shape != x.shape:
            raise ShapeMismatch(f"mask shape {m.shape} != image {x.shape}")
        if not m.any():
            raise MaskEmpty("mask selects no pixels")
        x = _crop_to_mask(x, m)
        y = _crop_to_mask(y, m)

    n_scales = len(MSSSIM_WEIGHTS)
    while n_scales > 1 and min(x.shape) < WINDOW_SIZE * 2 ** (n_scales - 1):
        n_scales -= 1
    if min(x.shape) < WINDOW_SIZE:
        raise ShapeMismatch(
            f"image side {min(x.shape)} smaller than the {WINDOW_SIZE}px window")
    weights = np.array(MSSSIM_WEIGHTS[:n_scales])
    weights = weights / weights.sum()

    value = 1.0
    for level in range(n_scales):
        lum, cs = _ssim_terms(x, y)
        if level < n_scales - 1:
            value *= max(cs, 0.0) ** weights[level]
            x = _downsample(x)
            y = _downsample(y)
        else:
            value *= max(lum * cs, 0.0) ** weights[level]
    return float(value)


def masked_l2(img_a: np.ndarray, img_b: np.ndarray, mask: np.ndarray,
              normalize: bool = True) -> float:
    """Euclidean norm of per-pixel differences inside the mask.

    Normalized by sqrt(mask pixel count) for comparability across mask
    sizes; pass normalize=False for the raw norm.
    """
    a = np.asarray(img_a, dtype=np.float64)
    b = np.asarray(img_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatch(f"image shapes differ: {a.shape} vs {b.shape}")
    m = np.asarray(mask).astype(bool)
    if m.shape != a.shape[:2]:
        raise ShapeMismatch(f"mask shape {m.shape} != image plane {a.shape[:2]}")
    count = int(m.sum())
    if count == 0:
        raise MaskEmpty("mask selects no pixels")
    diff = a[m] - b[m]
    norm = float(np.sqrt(np.sum(diff ** 2)))
    return norm / np.sqrt(count) if normalize else norm
