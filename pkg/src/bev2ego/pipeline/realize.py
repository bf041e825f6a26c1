"""Scene realization: project, render cutouts, composite, outpaint.

The flow per (scene, seed): project every car to image-plane geometry,
request a cutout per car at its view azimuth / polar angle / pixel
height, composite back-to-front onto the canvas, build the object-union
and road masks, outpaint the complement, and downscale by the scene's
resolution factor.  The ground-truth sidecar records boxes, occlusion
rates, and all attributes for the detector and VQA services.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from ..errors import CompositionError
from ..geometry import CameraModel
from ..projection import DEFAULT_EGO_CAMERA, occlusion_rate, project_scene
from ..scene import RoadLayout, SceneConfig
from ..services import protocol as wire
from ..services.imaging import decode_image, decode_mask, encode_image, encode_mask

SIDECAR_SCHEMA = "sidecar/v1"


@dataclass(frozen=True)
class RenderSettings:
    """Canvas geometry: base resolution and the image-plane span it covers."""

    camera: CameraModel = DEFAULT_EGO_CAMERA
    layout: RoadLayout = field(default_factory=RoadLayout)
    base_size: int = 512
    halfspan: float = 1.6  # image-plane units from center to canvas edge

    @property
    def pixels_per_unit(self) -> float:
        return self.base_size / (2.0 * self.halfspan)

    def to_pixel(self, u: float, v: float) -> tuple[float, float]:
        """Image-plane (u, v) to (col, row); v points up, rows point down."""
        ppu = self.pixels_per_unit
        return self.base_size / 2.0 + u * ppu, self.base_size / 2.0 - v * ppu


@dataclass
class RealizedScene:
    scene: SceneConfig
    seed: int
    image: np.ndarray            # final image, downscaled by scene.scale
    sidecar: dict
    composite: np.ndarray        # pre-outpaint canvas at final resolution
    object_mask: np.ndarray      # union of car silhouettes, final resolution
    road_mask: np.ndarray
    car_masks: list[np.ndarray]          # full silhouette per car (clipped)
    visible_masks: list[np.ndarray]      # silhouette minus nearer cars


@functools.lru_cache(maxsize=8)
def _road_mask_base(camera: CameraModel, layout: RoadLayout,
                    base_size: int, halfspan: float) -> np.ndarray:
    """Road membership per pixel via ground-plane ray intersection."""
    settings = RenderSettings(camera, layout, base_size, halfspan)
    ppu = settings.pixels_per_unit
    cols = (np.arange(base_size) + 0.5 - base_size / 2.0) / ppu
    rows = (base_size / 2.0 - (np.arange(base_size) + 0.5)) / ppu
    uu, vv = np.meshgrid(cols, rows)
    f = camera.focal_length
    cx, cy, cz = camera.position
    with np.errstate(divide="ignore", invalid="ignore"):
        s = -cy * f / vv                  # ray parameter hitting y = 0
        x = cx + s * uu / f
        z = cz + s
    hl, hw = layout.half_length, layout.half_width
    on_road = ((np.abs(x) <= hw) & (np.abs(z) <= hl)) \
        | ((np.abs(x) <= hl) & (np.abs(z) <= hw))
    return np.where(s > 0, on_road, False)


def _paste(canvas: np.ndarray, mask_canvas: np.ndarray,
           cutout: np.ndarray, alpha: np.ndarray,
           row1: int, col0: int) -> np.ndarray:
    """Paste a cutout whose bottom edge sits at row1; returns the pasted mask."""
    h, w = alpha.shape
    H, W = mask_canvas.shape
    row0 = row1 - h
    r0, r1 = max(0, row0), min(H, row1)
    c0, c1 = max(0, col0), min(W, col0 + w)
    pasted = np.zeros((H, W), bool)
    if r0 >= r1 or c0 >= c1:
        return pasted
    sub_alpha = alpha[r0 - row0:r1 - row0, c0 - col0:c1 - col0]
    canvas[r0:r1, c0:c1][sub_alpha] = cutout[r0 - row0:r1 - row0,
                                             c0 - col0:c1 - col0][sub_alpha]
    pasted[r0:r1, c0:c1] = sub_alpha
    mask_canvas[r0:r1, c0:c1] |= sub_alpha
    return pasted


def _tight_box(mask: np.ndarray) -> list[float] | None:
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        return None
    return [float(xs.min()), float(ys.min()), float(xs.max() + 1), float(ys.max() + 1)]


def _scale_box(box: list[float] | None, factor: float) -> list[float] | None:
    if box is None:
        return None
    return [c * factor for c in box]


def _downscale_image(arr: np.ndarray, size: int) -> np.ndarray:
    return np.array(Image.fromarray(arr).resize((size, size), Image.NEAREST))


def _downscale_mask(mask: np.ndarray, size: int) -> np.ndarray:
    img = Image.fromarray(np.where(mask, 255, 0).astype(np.uint8))
    return np.array(img.resize((size, size), Image.NEAREST)) >= 128


def realize_scene(scene: SceneConfig, seed: int, bundle,
                  settings: RenderSettings = RenderSettings()) -> RealizedScene:
    """Produce the final image and ground-truth sidecar for one seed."""
    projected = project_scene(scene, settings.camera)
    base = settings.base_size
    canvas = np.zeros((base, base, 3), np.uint8)
    union_mask = np.zeros((base, base), bool)

    order = sorted(range(len(projected)), key=lambda i: -projected[i].depth)
    full_masks: list[np.ndarray | None] = [None] * len(projected)
    for i in order:
        pc = projected[i]
        height_px = max(1, round(pc.height * settings.pixels_per_unit))
        resp = bundle.render.render(wire.RenderRequest(
            request_id=f"{scene.scene_id or 'scene'}:{seed}:render:{i}",
            azimuth_deg=pc.azimuth_deg, polar_deg=pc.polar_deg,
            height_px=height_px, car_type=pc.car.car_type,
            color=pc.car.color, seed=seed))
        cutout = decode_image(resp.image_png_b64)
        alpha = decode_mask(resp.alpha_png_b64)
        col_center, row_base = settings.to_pixel(pc.anchor_u, pc.anchor_v)
        col0 = round(col_center - alpha.shape[1] / 2.0)
        pasted = _paste(canvas, union_mask, cutout, alpha, round(row_base), col0)
        if not pasted.any():
            raise CompositionError(
                f"car {i} of scene {scene.scene_id!r} lands outside the canvas")
        full_masks[i] = pasted

    # near cars punch holes into everything pasted before them
    visible_masks: list[np.ndarray] = []
    for i, pc in enumerate(projected):
        visible = full_masks[i].copy()
        for j, other in enumerate(projected):
            if other.depth < pc.depth:
                visible &= ~full_masks[j]
        visible_masks.append(visible)

    road_mask = _road_mask_base(settings.camera, settings.layout,
                                base, settings.halfspan)

    resp = bundle.outpaint.outpaint(wire.OutpaintRequest(
        request_id=f"{scene.scene_id or 'scene'}:{seed}:outpaint",
        image_png_b64=encode_image(canvas),
        object_mask_png_b64=encode_mask(union_mask),
        road_mask_png_b64=encode_mask(road_mask),
        prompt=scene.prompt, seed=seed))
    outpainted = decode_image(resp.image_png_b64)

    final_size = max(1, round(base / scene.scale))
    factor = final_size / base
    image = _downscale_image(outpainted, final_size)
    composite = _downscale_image(canvas, final_size)
    object_mask = _downscale_mask(union_mask, final_size)
    road_small = _downscale_mask(road_mask, final_size)
    car_masks = [_downscale_mask(m, final_size) for m in full_masks]
    vis_masks = [_downscale_mask(m, final_size) for m in visible_masks]

    cars_meta = []
    for i, pc in enumerate(projected):
        full_px = int(full_masks[i].sum())
        vis_px = int(visible_masks[i].sum())
        cars_meta.append({
            "index": i,
            "car_type": pc.car.car_type,
            "color": pc.car.color,
            "height_factor": pc.car.height_factor,
            "heading_deg": pc.car.heading_deg,
            "azimuth_deg": pc.azimuth_deg,
            "polar_deg": pc.polar_deg,
            "depth": pc.depth,
            "occlusion": 1.0 - vis_px / full_px if full_px else 1.0,
            "occlusion_geometric": occlusion_rate(pc),
            "full_box": _scale_box(_tight_box(full_masks[i]), factor),
            "visible_box": _scale_box(_tight_box(visible_masks[i]), factor),
        })

    sidecar = {
        "schema": SIDECAR_SCHEMA,
        "scene_id": scene.scene_id,
        "seed": seed,
        "background": scene.background,
        "scale": scene.scale,
        "canvas": [final_size, final_size],
        "corruptions": [],
        "cars": cars_meta,
    }
    return RealizedScene(scene=scene, seed=seed, image=image, sidecar=sidecar,
                         composite=composite, object_mask=object_mask,
                         road_mask=road_small, car_masks=car_masks,
                         visible_masks=vis_masks)


def preview_scene(scene: SceneConfig,
                  settings: RenderSettings = RenderSettings()) -> dict:
    """Geometry-only projection (no generative calls), JSON-friendly."""
    projected = project_scene(scene, settings.camera)
    cars = []
    for pc in projected:
        corners = [settings.to_pixel(u, v)
                   for u, v in pc.footprint.exterior.coords[:-1]]
        cars.append({
            "index": pc.index,
            "car_type": pc.car.car_type,
            "color": pc.car.color,
            "depth": pc.depth,
            "azimuth_deg": pc.azimuth_deg,
            "polar_deg": pc.polar_deg,
            "occlusion": occlusion_rate(pc),
            "footprint_px": [[round(c, 3), round(r, 3)] for c, r in corners],
        })
    return {"scene_id": scene.scene_id, "base_size": settings.base_size,
            "cars": cars}
