"""Scene-composer HTTP service: CRUD, geometric preview, realize, score.

The UI talks only to this API; geometry and scores are never computed
client-side.  Previews are pure projection (no generative calls), so
they answer instantly; realize/evaluate go through the service bundle.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from ..errors import Bev2EgoError, SchemaError
from ..metrics.boxes import display_box, effective_iou
from ..metrics.mms import GAMMA0, MmsConfig
from ..scene import SceneConfig, scene_from_dict, scene_to_dict
from ..services import protocol as wire
from ..services.imaging import encode_image
from .evaluate import detections_from_wire, objects_from_sidecar
from .mining import mine_systematic_errors, report_to_text
from .realize import RenderSettings, preview_scene, realize_scene


@dataclass
class SceneStore:
    """In-memory scene drafts with copy-on-write updates."""

    scenes: dict[str, SceneConfig] = field(default_factory=dict)
    _counter: itertools.count = field(default_factory=itertools.count)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def create(self, scene: SceneConfig) -> str:
        with self._lock:
            scene_id = scene.scene_id or f"draft-{next(self._counter):04d}"
            self.scenes[scene_id] = scene.with_id(scene_id)
            return scene_id

    def update(self, scene_id: str, scene: SceneConfig):
        with self._lock:
            if scene_id not in self.scenes:
                raise KeyError(scene_id)
            self.scenes[scene_id] = scene.with_id(scene_id)

    def get(self, scene_id: str) -> SceneConfig:
        return self.scenes[scene_id]

    def delete(self, scene_id: str):
        with self._lock:
            del self.scenes[scene_id]

    def ids(self) -> list[str]:
        return sorted(self.scenes)


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"code": code, "message": message})


def build_server_app(bundle, detectors: dict[str, object] | None = None,
                     settings: RenderSettings = RenderSettings(),
                     cfg: MmsConfig = MmsConfig(),
                     store: SceneStore | None = None) -> FastAPI:
    app = FastAPI(title="bev2ego composer service")
    store = store if store is not None else SceneStore()
    detectors = detectors or {}
    app.state.store = store
    evaluations: dict[str, list] = {}
    mms_values: dict[str, dict[str, float]] = {}

    def parse_scene(doc: dict) -> SceneConfig:
        return scene_from_dict(doc)

    def resolve_scene(doc: dict) -> SceneConfig:
        """Inline scene (a scene/v1 document, possibly under "scene") or a
        {"scene_id": ...} reference to a stored draft."""
        if doc.get("schema") == "scene/v1":
            return parse_scene(doc)
        if "scene" in doc:
            return parse_scene(doc["scene"])
        return store.get(doc["scene_id"])

    @app.post("/v1/scenes")
    def create_scene(doc: dict):
        try:
            scene = parse_scene(doc)
        except SchemaError as exc:
            return _error(422, "schema", str(exc))
        scene_id = store.create(scene)
        return {"scene_id": scene_id}

    @app.get("/v1/scenes")
    def list_scenes():
        return {"scene_ids": store.ids()}

    @app.get("/v1/scenes/{scene_id}")
    def get_scene(scene_id: str):
        try:
            return scene_to_dict(store.get(scene_id))
        except KeyError:
            return _error(404, "not_found", scene_id)

    @app.put("/v1/scenes/{scene_id}")
    def put_scene(scene_id: str, doc: dict):
        try:
            store.update(scene_id, parse_scene(doc))
        except KeyError:
            return _error(404, "not_found", scene_id)
        except SchemaError as exc:
            return _error(422, "schema", str(exc))
        return {"scene_id": scene_id}

    @app.delete("/v1/scenes/{scene_id}")
    def delete_scene(scene_id: str):
        try:
            store.delete(scene_id)
        except KeyError:
            return _error(404, "not_found", scene_id)
        return {"deleted": scene_id}

    @app.post("/v1/preview")
    def preview(doc: dict):
        try:
            scene = resolve_scene(doc)
            return preview_scene(scene, settings)
        except KeyError as exc:
            return _error(404, "not_found", str(exc))
        except (SchemaError, Bev2EgoError) as exc:
            return _error(422, "schema", str(exc))

    @app.post("/v1/realize")
    def realize(doc: dict):
        try:
            scene = resolve_scene(doc)
            seed = int(doc.get("seed", 0))
            realized = realize_scene(scene, seed, bundle, settings)
            return {"scene_id": scene.scene_id, "seed": seed,
                    "image_png_b64": encode_image(realized.image),
                    "sidecar": realized.sidecar}
        except KeyError as exc:
            return _error(404, "not_found", str(exc))
        except (SchemaError, Bev2EgoError) as exc:
            return _error(422, "schema", str(exc))

    @app.post("/v1/evaluate")
    def evaluate(doc: dict):
        """Per-car matched confidence at the display threshold, per detector."""
        try:
            scene = resolve_scene(doc)
            seed = int(doc.get("seed", 0))
            wanted = doc.get("detectors") or list(detectors)
            realized = realize_scene(scene, seed, bundle, settings)
        except KeyError as exc:
            return _error(404, "not_found", str(exc))
        except (SchemaError, Bev2EgoError) as exc:
            return _error(422, "schema", str(exc))
        image_b64 = encode_image(realized.image)
        objects = objects_from_sidecar(realized.sidecar, cfg.target_class)
        out = {}
        for name in wanted:
            detector = detectors.get(name)
            if detector is None:
                out[name] = {"error": "unknown detector"}
                continue
            try:
                resp = detector.detect(wire.DetectRequest(
                    request_id=f"eval:{scene.scene_id}:{seed}:{name}",
                    image_png_b64=image_b64, nms_iou=cfg.nms_iou,
                    test_oracle=realized.sidecar))
            except Bev2EgoError as exc:   # partial results on failure
                out[name] = {"error": str(exc)}
                continue
            dets = detections_from_wire(resp.detections)
            cars = []
            for i, obj in enumerate(objects):
                best = max((d.confidence for d in dets
                            if d.label == cfg.target_class
                            and effective_iou(d.box, obj) >= GAMMA0), default=0.0)
                shown = display_box(dets, obj, GAMMA0)
                cars.append({
                    "index": i,
                    "confidence": best,
                    "display_box": None if shown is None else {
                        "box": list(shown.box), "class": shown.label,
                        "confidence": shown.confidence},
                })
            out[name] = {"cars": cars}
        return {"scene_id": scene.scene_id, "seed": seed, "detectors": out}

    @app.get("/v1/mining-report")
    def mining_report():
        if not evaluations:
            return _error(404, "not_found", "no evaluation has been ingested")
        reports = {}
        for name, evals in evaluations.items():
            report = mine_systematic_errors(evals, mms_values[name],
                                            detector=name)
            reports[name] = report_to_text(report)
        return {"reports": reports}

    @app.get("/v1/health")
    def health():
        return {"ready": True, "detectors": sorted(detectors)}

    app.state.evaluations = evaluations
    app.state.mms_values = mms_values
    return app
