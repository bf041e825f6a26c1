"""Outpainting-method benchmark: boundary, faithfulness, and fill fidelity.

Every method is evaluated on the identical scene/seed set with four
metrics per image: mask IoU of the unoccluded car against its
re-segmented region (boundary preservation), questionnaire score
(faithfulness), and MS-SSIM / masked l2 between the pre-outpaint
composite and the final image inside the object mask (fill fidelity).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import Bev2EgoError
from ..metrics.images import mask_iou, masked_l2, ms_ssim
from ..metrics.tifa import tifa_questions, tifa_score
from ..scene import SceneConfig
from ..services import protocol as wire
from ..services.imaging import decode_mask, encode_image
from .realize import RenderSettings, realize_scene

log = logging.getLogger(__name__)

METRIC_NAMES = ("sam_iou", "tifa", "ms_ssim", "l2")


@dataclass
class BenchmarkSpec:
    methods: dict[str, object]          # label -> bundle (render/outpaint/...)
    scenes: list[SceneConfig]
    settings: RenderSettings = field(default_factory=RenderSettings)
    normalize_scale: bool = True        # score at full resolution

    def __post_init__(self):
        if len(self.methods) < 2:
            raise ValueError("benchmark needs at least two outpainting methods")
        if self.normalize_scale:
            self.scenes = [replace(s, scale=1.0) for s in self.scenes]


@dataclass
class MethodScores:
    method: str
    per_metric: dict[str, list[float]]

    def mean(self, metric: str) -> float:
        vals = self.per_metric[metric]
        return float(np.mean(vals)) if vals else math.nan

    def sem(self, metric: str) -> float:
        vals = self.per_metric[metric]
        if len(vals) < 2:
            return math.nan
        return float(np.std(vals, ddof=1) / np.sqrt(len(vals)))


def _centroid(mask: np.ndarray) -> tuple[int, int]:
    ys, xs = np.nonzero(mask)
    return int(round(xs.mean())), int(round(ys.mean()))


def score_realization(realized, bundle) -> dict[str, float]:
    """The four benchmark metrics for one realized image."""
    sidecar = realized.sidecar
    cars = sidecar["cars"]
    # boundary check targets the unoccluded (frontmost) car
    front = min(range(len(cars)), key=lambda i: cars[i]["depth"])
    front_mask = realized.car_masks[front]
    image_b64 = encode_image(realized.image)
    point = _centroid(front_mask)
    seg = bundle.segment.segment(wire.SegmentRequest(
        request_id=f"{sidecar['scene_id']}:{sidecar['seed']}:seg",
        image_png_b64=image_b64, point=point))
    sam_iou = mask_iou(decode_mask(seg.mask_png_b64), front_mask)

    scene = realized.scene
    types = [c.car_type for c in scene.cars]
    colors = [c.color for c in scene.cars]
    if len(types) == 1:
        types, colors = types * 2, colors * 2
    questions = tifa_questions(types[0], types[1], colors[0], colors[1])
    answers = []
    for qi, q in enumerate(questions):
        resp = bundle.vqa.vqa(wire.VqaRequest(
            request_id=f"{sidecar['scene_id']}:{sidecar['seed']}:vqa:{qi}",
            image_png_b64=image_b64, question=q.question,
            choices=list(q.choices), test_oracle=sidecar))
        answers.append(resp.answer)
    tifa = tifa_score(answers, questions)

    obj = realized.object_mask
    ssim_val = ms_ssim(realized.composite, realized.image, mask=obj)
    l2_val = masked_l2(realized.composite, realized.image, obj)
    return {"sam_iou": sam_iou, "tifa": tifa, "ms_ssim": ssim_val, "l2": l2_val}


def benchmark_outpainting(spec: BenchmarkSpec) -> dict[str, MethodScores]:
    results = {label: MethodScores(label, {m: [] for m in METRIC_NAMES})
               for label in spec.methods}
    for scene in spec.scenes:
        for seed in scene.seeds:
            for label, bundle in spec.methods.items():
                try:
                    realized = realize_scene(scene, seed, bundle, spec.settings)
                    scores = score_realization(realized, bundle)
                except Bev2EgoError as exc:
                    log.warning("benchmark %s on %s/%s failed: %s",
                                label, scene.scene_id, seed, exc)
                    continue
                for metric, value in scores.items():
                    results[label].per_metric[metric].append(value)
    return results


def benchmark_table(results: dict[str, MethodScores]) -> str:
    lines = [f"{'method':<16}" + "".join(f"{m:>16}" for m in METRIC_NAMES)]
    for label, scores in results.items():
        cells = []
        for m in METRIC_NAMES:
            mean, sem = scores.mean(m), scores.sem(m)
            cells.append(f"{mean:.4f}±{sem:.4f}" if not math.isnan(sem)
                         else f"{mean:.4f}")
        lines.append(f"{label:<16}" + "".join(f"{c:>16}" for c in cells))
    return "\n".join(lines) + "\n"
