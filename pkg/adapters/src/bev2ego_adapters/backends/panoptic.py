"""Panoptic/instance segmentation backends adapted to 2D detection.

Segmentation models answer boxes by drawing the tightest bounding box
around each segmented instance.  The offline variant sources instance
masks from salient color components; torch panoptic models plug in the
same conversion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from bev2ego.metrics.boxes import Detection, nms
from bev2ego.services import protocol as wire
from bev2ego.services.imaging import decode_image

from ..boxes import tightest_box


@dataclass
class PanopticBlobDetectorBackend:
    """Instance masks from color components, boxes via tightest_box."""

    color_threshold: int = 40
    min_pixels: int = 6
    fingerprint = "panoptic-blob:v1"

    def instance_masks(self, img: np.ndarray) -> list[np.ndarray]:
        work = img.astype(np.int16)
        border = np.concatenate([work[0], work[-1], work[:, 0], work[:, -1]])
        background = np.median(border, axis=0)
        salient = np.abs(work - background).max(axis=2) > self.color_threshold
        labels, count = ndimage.label(salient, structure=np.ones((3, 3)))
        masks = []
        for i in range(1, count + 1):
            component = labels == i
            if component.sum() >= self.min_pixels:
                masks.append(component)
        return masks

    def detect(self, req: wire.DetectRequest) -> wire.DetectResponse:
        req.check_ranges()
        img = decode_image(req.image_png_b64)
        dets = []
        for mask in self.instance_masks(img):
            box = tightest_box(mask)
            area_frac = mask.sum() / mask.size
            confidence = round(min(1.0, 0.6 + 2.0 * float(area_frac)), 4)
            dets.append(Detection(tuple(float(v) for v in box), "car",
                                  confidence))
        kept = nms(dets, req.nms_iou)
        return wire.DetectResponse(
            request_id=req.request_id,
            detections=[wire.WireDetection(box=d.box, label=d.label,
                                           confidence=d.confidence)
                        for d in kept])
