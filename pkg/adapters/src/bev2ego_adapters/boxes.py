"""Mask-to-box conversion for panoptic and instance segmentation backends."""

from __future__ import annotations

import numpy as np


def tightest_box(mask: np.ndarray) -> tuple[int, int, int, int] | None:
    """Tightest (x0, y0, x1, y1) around the true pixels; None if empty.

    x1/y1 are exclusive, so a mask covering rows 10..20 and cols 5..40
    yields (5, 10, 41, 21).
    """
    m = np.asarray(mask).astype(bool)
    ys, xs = np.nonzero(m)
    if ys.size == 0:
        return None
    return int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1


def masks_to_boxes(masks: list[np.ndarray]) -> list[tuple[int, int, int, int]]:
    """Per-instance tightest boxes, skipping empty masks."""
    out = []
    for mask in masks:
        box = tightest_box(mask)
        if box is not None:
            out.append(box)
    return out
