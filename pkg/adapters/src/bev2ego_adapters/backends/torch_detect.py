"""Torchvision detector adapters: lazy weight loading, COCO label mapping.

Weights load on first use; a load failure marks the backend unready and
the server answers 503.  torchvision models are deterministic in eval
mode on CPU, matching the protocol's determinism-given-seed contract.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from bev2ego.errors import ServiceUnavailable
from bev2ego.metrics.boxes import Detection, nms
from bev2ego.services import protocol as wire
from bev2ego.services.imaging import decode_image

# torchvision model builders by short name; extended as needed
TORCHVISION_DETECTORS = {
    "fasterrcnn_resnet50_fpn_v2": "FasterRCNN_ResNet50_FPN_V2_Weights",
    "fasterrcnn_resnet50_fpn": "FasterRCNN_ResNet50_FPN_Weights",
    "retinanet_resnet50_fpn_v2": "RetinaNet_ResNet50_FPN_V2_Weights",
    "ssd300_vgg16": "SSD300_VGG16_Weights",
}

COCO_CAR_LABEL = 3  # COCO category id for "car"


@dataclass
class TorchvisionDetectorBackend:
    model_name: str = "fasterrcnn_resnet50_fpn_v2"
    device: str = "cpu"
    score_floor: float = 0.05
    _model: object = field(default=None, repr=False)
    _categories: list = field(default=None, repr=False)
    _fingerprint: str = field(default="unloaded", repr=False)
    _load_error: str | None = field(default=None, repr=False)

    @property
    def fingerprint(self) -> str:
        return self._fingerprint

    @property
    def load_error(self) -> str | None:
        return self._load_error

    def _ensure_loaded(self):
        if self._model is not None:
            return
        if self._load_error is not None:
            raise ServiceUnavailable(self._load_error)
        try:
            import torch
            import torchvision.models.detection as det
            builder = getattr(det, self.model_name)
            weights_enum = getattr(det, TORCHVISION_DETECTORS[self.model_name])
            weights = weights_enum.DEFAULT
            model = builder(weights=weights)
            model.eval().to(self.device)
            self._model = model
            self._categories = weights.meta["categories"]
            state = model.state_dict()
            digest = hashlib.sha256()
            for key in sorted(state):
                digest.update(key.encode())
                digest.update(state[key].cpu().numpy().tobytes()[:64])
            self._fingerprint = f"{self.model_name}:{digest.hexdigest()[:12]}"
        except Exception as exc:
            self._load_error = f"cannot load {self.model_name}: {exc}"
            raise ServiceUnavailable(self._load_error) from exc

    def detect(self, req: wire.DetectRequest) -> wire.DetectResponse:
        req.check_ranges()
        self._ensure_loaded()
        import torch
        img = decode_image(req.image_png_b64)
        tensor = torch.from_numpy(img.astype(np.float32) / 255.0).permute(2, 0, 1)
        with torch.no_grad():
            output = self._model([tensor.to(self.device)])[0]
        dets = []
        for box, label, score in zip(output["boxes"].cpu().numpy(),
                                     output["labels"].cpu().numpy(),
                                     output["scores"].cpu().numpy()):
            if score < self.score_floor:
                continue
            name = self._categories[int(label)] \
                if int(label) < len(self._categories) else str(int(label))
            dets.append(Detection(tuple(float(v) for v in box), name,
                                  float(score)))
        kept = nms(dets, req.nms_iou)
        return wire.DetectResponse(
            request_id=req.request_id,
            detections=[wire.WireDetection(box=d.box, label=d.label,
                                           confidence=d.confidence)
                        for d in kept])
