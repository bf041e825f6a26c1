"""Adapter process: one model, one port, the /v1/* protocol.

``build_adapter_app`` wires a configured backend into the shared HTTP
facade; unimplemented operations are absent (404), load failures answer
503, schema violations 422.  Health reports the weights fingerprint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from bev2ego.services.http import build_app

from .backends.classical import (BillboardRenderBackend, BlobDetectorBackend,
                                 HeuristicVqaBackend, RegionGrowSegmentBackend,
                                 TeleaOutpaintBackend)
from .backends.panoptic import PanopticBlobDetectorBackend
from .backends.torch_detect import TORCHVISION_DETECTORS, TorchvisionDetectorBackend

SCHEMA_VERSION = "v1"


@dataclass
class AdapterConfig:
    model: str
    device: str = "cpu"
    nms_iou: float | None = None       # passthrough default, request wins
    controlnet_weight: float = 1.0
    port: int = 9000
    host: str = "127.0.0.1"

    def __post_init__(self):
        if self.model not in registry_names():
            raise ValueError(f"unknown model {self.model!r}; "
                             f"known: {', '.join(registry_names())}")


def _torchvision_entries():
    return {f"torchvision:{name}": ("detect",
                                    lambda cfg, n=name: TorchvisionDetectorBackend(
                                        model_name=n, device=cfg.device))
            for name in TORCHVISION_DETECTORS}


_REGISTRY = {
    "billboard-render": ("render", lambda cfg: BillboardRenderBackend()),
    "telea-outpaint": ("outpaint", lambda cfg: TeleaOutpaintBackend()),
    "region-grow-segment": ("segment", lambda cfg: RegionGrowSegmentBackend()),
    "blob-detect": ("detect", lambda cfg: BlobDetectorBackend()),
    "panoptic-blob-detect": ("detect", lambda cfg: PanopticBlobDetectorBackend()),
    "heuristic-vqa": ("vqa", lambda cfg: HeuristicVqaBackend()),
    **_torchvision_entries(),
}


def registry_names() -> list[str]:
    return sorted(_REGISTRY)


@dataclass
class _SingleOpBundle:
    """Bundle exposing exactly one operation, as adapters run one model."""

    op: str
    backend: object
    render: object = field(default=None)
    outpaint: object = field(default=None)
    segment: object = field(default=None)
    detect: object = field(default=None)
    vqa: object = field(default=None)

    def __post_init__(self):
        setattr(self, self.op, self.backend)


def build_adapter_app(config: AdapterConfig) -> FastAPI:
    op, factory = _REGISTRY[config.model]
    backend = factory(config)
    bundle = _SingleOpBundle(op=op, backend=backend)
    fingerprint = getattr(backend, "fingerprint", config.model)
    app = build_app(bundle, fingerprint=fingerprint, ops=(op,))

    # health must reflect lazy-load state and the live fingerprint
    def health():
        error = getattr(backend, "load_error", None)
        if error is not None:
            return JSONResponse(status_code=503,
                                content={"model_fingerprint": "unavailable",
                                         "ready": False, "error": error})
        return {"model_fingerprint": getattr(backend, "fingerprint",
                                             config.model),
                "ready": True,
                "schema_version": SCHEMA_VERSION}

    for route in list(app.router.routes):
        if getattr(route, "path", "") == "/v1/health":
            app.router.routes.remove(route)
    app.get("/v1/health")(health)
    return app


def serve_adapter(config: AdapterConfig):
    """Run the adapter process until interrupted."""
    import uvicorn
    app = build_adapter_app(config)
    uvicorn.run(app, host=config.host, port=config.port)
