"""Bounding-box scoring: IoU, occlusion-aware matching, display-box choice.

Matching against occluded objects uses an effective IoU: the max of the
IoU with the full object box and with its visible (unoccluded) box, so
detectors that box only the visible part and detectors that extend to
the full object are both credited.
"""

from __future__ import annotations

from dataclasses import dataclass

Box = tuple[float, float, float, float]  # (x_min, y_min, x_max, y_max)

TARGET_CLASS = "car"


@dataclass(frozen=True)
class Detection:
    box: Box
    label: str
    confidence: float

    def __post_init__(self):
        x0, y0, x1, y1 = self.box
        if x0 > x1 or y0 > y1:
            raise ValueError(f"inverted box {self.box}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class GroundTruthObject:
    """Full box around the whole object plus the box of its visible part."""

    full_box: Box
    visible_box: Box | None   # None when the object is entirely hidden
    target_class: str = TARGET_CLASS


def box_area(box: Box) -> float:
    x0, y0, x1, y1 = box
    return max(0.0, x1 - x0) * max(0.0, y1 - y0)


def iou(a: Box, b: Box) -> float:
    """Intersection over union; 0 when the union is degenerate."""
    ix0 = max(a[0], b[0])
    iy0 = max(a[1], b[1])
    ix1 = min(a[2], b[2])
    iy1 = min(a[3], b[3])
    inter = max(0.0, ix1 - ix0) * max(0.0, iy1 - iy0)
    union = box_area(a) + box_area(b) - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def effective_iou(det_box: Box, gt: GroundTruthObject) -> float:
    """max(IoU vs full box, IoU vs visible box)."""
    full = iou(det_box, gt.full_box)
    if gt.visible_box is None:
        return full
    return max(full, iou(det_box, gt.visible_box))


def matched_confidence(detections: list[Detection], gt: GroundTruthObject,
                       threshold: float) -> float:
    """Best confidence among target-class detections overlapping the object.

    A detection qualifies when its label equals the target class and its
    effective IoU reaches the threshold.  The empty max is 0: a complete
    miss contributes the full penalty.
    """
    best = 0.0
    for det in detections:
        if det.label != gt.target_class:
            continue
        if effective_iou(det.box, gt) >= threshold:
            best = max(best, det.confidence)
    return best


def display_box(detections: list[Detection],
                gt: GroundTruthObject,
                threshold: float = 0.5) -> Detection | None:
    """The box to draw for an object: argmax confidence among detections
    with effective IoU >= threshold, regardless of predicted class.

    Ties break by larger effective IoU, then by smaller index, so the
    choice is deterministic.
    """
    best: Detection | None = None
    best_key = None
    for i, det in enumerate(detections):
        e = effective_iou(det.box, gt)
        if e < threshold:
            continue
        key = (det.confidence, e, -i)
        if best_key is None or key > best_key:
            best, best_key = det, key
    return best


def nms(detections: list[Detection], iou_threshold: float) -> list[Detection]:
    """Greedy per-class non-maximum suppression.

    Keeps detections in descending confidence order, dropping any box
    whose IoU with an already-kept box of the same class exceeds the
    threshold.
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError(f"NMS IoU threshold must be in (0, 1], got {iou_threshold}")
    order = sorted(range(len(detections)),
                   key=lambda i: (-detections[i].confidence, i))
    kept: list[int] = []
    for i in order:
        d = detections[i]
        if all(detections[j].label != d.label
               or iou(detections[j].box, d.box) <= iou_threshold
               for j in kept):
            kept.append(i)
    return [detections[i] for i in sorted(kept)]
