"""Weight-free backends built on classical vision.

These serve two purposes: working stand-ins when no GPU models are
reachable, and reference servers for protocol conformance testing.  They
never read the mock-only ``_test_oracle`` field.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import cv2
import numpy as np
from scipy import ndimage

from bev2ego.errors import EmptyMask, RangeError
from bev2ego.metrics.boxes import Detection, nms
from bev2ego.services import protocol as wire
from bev2ego.services.imaging import (decode_image, decode_mask, encode_image,
                                      encode_mask)

from ..boxes import tightest_box

# Billboard silhouette proportions (side/front width-to-height).
_AR = {"sedan": (2.4, 1.0), "SUV": (2.2, 1.1), "coupe car": (2.3, 0.95),
       "sports car": (2.5, 0.9), "smart car": (1.6, 1.0)}
_PAINT = {
    "white": (245, 245, 245), "black": (15, 15, 15), "grey": (128, 128, 128),
    "yellow": (230, 210, 40), "red": (200, 30, 30), "blue": (30, 60, 200),
    "green": (30, 160, 60), "brown": (120, 80, 40), "pink": (240, 130, 180),
    "orange": (235, 140, 30), "purple": (140, 40, 180),
}
_ROAD_GRAY = (72, 72, 80)


def _params_fingerprint(name: str, params: dict) -> str:
    digest = hashlib.sha256(repr(sorted(params.items())).encode()).hexdigest()
    return f"{name}:{digest[:12]}"


class BillboardRenderBackend:
    """Flat-color silhouette renderer; a stand-in for novel-view models."""

    fingerprint = _params_fingerprint("billboard-render", _AR)

    def render(self, req: wire.RenderRequest) -> wire.RenderResponse:
        req.check_ranges()
        if req.color not in _PAINT:
            raise RangeError(f"unknown color {req.color!r}")
        side, front = _AR.get(req.car_type, (2.2, 1.0))
        ratio = front + (side - front) * abs(np.sin(np.radians(req.azimuth_deg)))
        h = req.height_px
        w = max(1, round(h * ratio))
        img = np.empty((h, w, 3), np.uint8)
        img[:] = _PAINT[req.color]
        # rounded body corners so the silhouette is not a plain slab
        alpha = np.ones((h, w), bool)
        r = max(1, min(h, w) // 8)
        yy, xx = np.ogrid[:h, :w]
        for cy, cx in ((r, r), (r, w - 1 - r)):
            corner = (np.abs(yy - cy) + np.abs(xx - cx)) > 2 * r
            quadrant = (yy < cy) & ((xx < cx) if cx == r else (xx > cx))
            alpha &= ~(corner & quadrant)
        img[~alpha] = 0
        return wire.RenderResponse(request_id=req.request_id,
                                   image_png_b64=encode_image(img),
                                   alpha_png_b64=encode_mask(alpha))


@dataclass
class TeleaOutpaintBackend:
    """Road-contingent classical outpainting.

    The road region is filled with asphalt gray, then the remaining
    complement of the object mask is completed with Telea inpainting from
    the boundary.  Pixels inside the object mask are preserved exactly.
    """

    inpaint_radius: int = 3
    fingerprint = _params_fingerprint("telea-outpaint", {"radius": 3})

    def outpaint(self, req: wire.OutpaintRequest) -> wire.OutpaintResponse:
        img = decode_image(req.image_png_b64)
        obj = decode_mask(req.object_mask_png_b64)
        road = decode_mask(req.road_mask_png_b64)
        if obj.shape != img.shape[:2] or road.shape != img.shape[:2]:
            raise RangeError("mask dimensions differ from image")
        work = img.copy()
        work[road & ~obj] = _ROAD_GRAY
        hole = (~obj & ~road).astype(np.uint8)
        filled = cv2.inpaint(work, hole, self.inpaint_radius, cv2.INPAINT_TELEA)
        filled[obj] = img[obj]
        filled[road & ~obj] = _ROAD_GRAY
        return wire.OutpaintResponse(request_id=req.request_id,
                                     image_png_b64=encode_image(filled))


@dataclass
class RegionGrowSegmentBackend:
    """Point-prompted segmentation by color region growing."""

    tolerance: int = 12
    fingerprint = _params_fingerprint("region-grow-segment", {"tol": 12})

    def segment(self, req: wire.SegmentRequest) -> wire.SegmentResponse:
        img = decode_image(req.image_png_b64)
        x, y = req.point
        h, w = img.shape[:2]
        if not (0 <= x < w and 0 <= y < h):
            raise RangeError(f"point {req.point} outside {w}x{h} image")
        target = img[y, x].astype(np.int16)
        close = np.abs(img.astype(np.int16) - target).max(axis=2) <= self.tolerance
        labels, _ = ndimage.label(close, structure=np.ones((3, 3)))
        mask = labels == labels[y, x]
        if mask.sum() > 0.5 * mask.size:
            raise EmptyMask("prompt point lies on the dominant background")
        return wire.SegmentResponse(request_id=req.request_id,
                                    mask_png_b64=encode_mask(mask))


@dataclass
class BlobDetectorBackend:
    """Finds saliently colored connected components and boxes them.

    Background is estimated from the border pixels; components whose color
    departs from it beyond the threshold become detections with a size-
    and contrast-based confidence.  NMS honors the request threshold.
    """

    color_threshold: int = 40
    min_pixels: int = 6
    fingerprint = _params_fingerprint("blob-detect", {"thr": 40, "min": 6})

    def detect(self, req: wire.DetectRequest) -> wire.DetectResponse:
        req.check_ranges()
        img = decode_image(req.image_png_b64).astype(np.int16)
        border = np.concatenate([img[0], img[-1], img[:, 0], img[:, -1]])
        background = np.median(border, axis=0)
        salient = np.abs(img - background).max(axis=2) > self.color_threshold
        labels, count = ndimage.label(salient, structure=np.ones((3, 3)))
        dets = []
        for i in range(1, count + 1):
            component = labels == i
            if component.sum() < self.min_pixels:
                continue
            box = tightest_box(component)
            contrast = float(np.abs(img[component] - background).max(axis=1).mean())
            confidence = min(1.0, 0.5 + contrast / 510.0
                             + min(component.sum() / 4000.0, 0.25))
            dets.append(Detection(tuple(float(v) for v in box), "car",
                                  round(confidence, 4)))
        kept = nms(dets, req.nms_iou)
        return wire.DetectResponse(
            request_id=req.request_id,
            detections=[wire.WireDetection(box=d.box, label=d.label,
                                           confidence=d.confidence)
                        for d in kept])


@dataclass
class HeuristicVqaBackend:
    """Answers the scene questionnaire from image statistics.

    Presence and activity questions answer yes when a salient blob
    exists; color questions compare blob colors against the paint table;
    road questions inspect the lower image band for asphalt grayness.
    """

    fingerprint = _params_fingerprint("heuristic-vqa", _PAINT)

    def vqa(self, req: wire.VqaRequest) -> wire.VqaResponse:
        req.check_ranges()
        img = decode_image(req.image_png_b64).astype(np.int16)
        q = req.question.strip().lower()
        answer = self._answer(q, img, req.choices)
        if answer not in req.choices:
            answer = req.choices[0]
        return wire.VqaResponse(request_id=req.request_id, answer=answer)

    def _blobs(self, img):
        border = np.concatenate([img[0], img[-1], img[:, 0], img[:, -1]])
        background = np.median(border, axis=0)
        salient = np.abs(img - background).max(axis=2) > 40
        labels, count = ndimage.label(salient, structure=np.ones((3, 3)))
        colors = []
        for i in range(1, count + 1):
            component = labels == i
            if component.sum() >= 6:
                colors.append(img[component].mean(axis=0))
        return colors

    @staticmethod
    def _nearest_paint(color) -> str:
        dists = {name: float(np.abs(np.asarray(rgb) - color).max())
                 for name, rgb in _PAINT.items()}
        return min(dists, key=dists.get)

    def _road_present(self, img) -> bool:
        band = img[int(img.shape[0] * 0.7):]
        mean = band.reshape(-1, 3).mean(axis=0)
        spread = float(mean.max() - mean.min())
        return spread < 35 and 40 <= float(mean.mean()) <= 200

    def _answer(self, q: str, img, choices) -> str:
        blobs = self._blobs(img)
        if q == "what type of path is this?":
            return "asphalted road" if self._road_present(img) else "grass"
        if q == "is there an asphalted road?":
            return "yes" if self._road_present(img) else "no"
        if q.startswith("what color is the"):
            if not blobs:
                return ""
            return self._nearest_paint(max(blobs, key=lambda c: float(c.sum())))
        if q.startswith("is the ") and q.endswith("?"):
            color_word = q[:-1].rsplit(" ", 1)[-1]
            if color_word in _PAINT:
                names = {self._nearest_paint(c) for c in blobs}
                return "yes" if color_word in names else "no"
            return "yes" if blobs else "no"
        if q.startswith("is there a"):
            return "yes" if blobs else "no"
        if "driving" in q:
            return "yes" if blobs else "no"
        return ""
