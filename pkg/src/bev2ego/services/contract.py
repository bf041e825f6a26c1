"""Recorded-fixture protocol suite shared by mocks and real adapters.

``fixture_requests`` yields canonical requests per operation;
``check_response`` asserts the response against the schema invariants.
Any server that passes this suite is protocol-conformant.
"""

from __future__ import annotations

import numpy as np

from . import protocol as wire
from .imaging import decode_image, decode_mask, encode_image, encode_mask


def _fixture_image(size=48) -> tuple[str, str, str]:
    """A small scene-like image, its object mask, and its road mask."""
    img = np.full((size, size, 3), (90, 140, 90), np.uint8)
    mask = np.zeros((size, size), bool)
    mask[size // 3: 2 * size // 3, size // 4: 3 * size // 4] = True
    img[mask] = (200, 30, 30)
    road = np.zeros((size, size), bool)
    road[2 * size // 3:, :] = True
    return encode_image(img), encode_mask(mask), encode_mask(road)


def fixture_requests() -> list[tuple[str, object]]:
    img_b64, obj_b64, road_b64 = _fixture_image()
    sidecar = {
        "schema": "sidecar/v1", "scene_id": "fixture", "seed": 3,
        "background": "in forest", "scale": 1.0, "corruptions": [],
        "cars": [{"index": 0, "car_type": "sedan", "color": "red",
                  "heading_deg": 0.0, "azimuth_deg": 0.0, "occlusion": 0.0,
                  "full_box": [12.0, 16.0, 36.0, 32.0],
                  "visible_box": [12.0, 16.0, 36.0, 32.0]}],
    }
    return [
        ("render", wire.RenderRequest(
            request_id="fx-render", azimuth_deg=30.0, polar_deg=10.0,
            height_px=32, car_type="sedan", color="red", seed=1)),
        ("outpaint", wire.OutpaintRequest(
            request_id="fx-outpaint", image_png_b64=img_b64,
            object_mask_png_b64=obj_b64, road_mask_png_b64=road_b64,
            prompt="cars are driving in forest, high resolution, "
                   "high definition, high quality",
            seed=2)),
        ("segment", wire.SegmentRequest(
            request_id="fx-segment", image_png_b64=img_b64, point=(24, 24))),
        ("detect", wire.DetectRequest(
            request_id="fx-detect", image_png_b64=img_b64, nms_iou=0.5,
            test_oracle=sidecar)),
        ("vqa", wire.VqaRequest(
            request_id="fx-vqa", image_png_b64=img_b64,
            question="is there a sedan?", choices=["yes", "no"],
            test_oracle=sidecar)),
    ]


def check_response(op: str, request, response) -> None:
    assert response.request_id == request.request_id, "request id not echoed"
    if op == "render":
        img = decode_image(response.image_png_b64)
        alpha = decode_mask(response.alpha_png_b64)
        assert img.ndim == 3 and img.shape[2] == 3
        assert alpha.shape == img.shape[:2]
        ys = np.nonzero(alpha.any(axis=1))[0]
        assert abs((ys.max() - ys.min() + 1) - request.height_px) <= 1
    elif op == "outpaint":
        img = decode_image(response.image_png_b64)
        orig = decode_image(request.image_png_b64)
        assert img.shape == orig.shape
    elif op == "segment":
        mask = decode_mask(response.mask_png_b64)
        orig = decode_image(request.image_png_b64)
        assert mask.shape == orig.shape[:2]
        x, y = request.point
        assert mask[y, x], "prompt point must lie inside the mask"
    elif op == "detect":
        img = decode_image(request.image_png_b64)
        h, w = img.shape[:2]
        for det in response.detections:
            det.check_ranges()
            x0, y0, x1, y1 = det.box
            assert 0 <= x0 <= x1 <= w and 0 <= y0 <= y1 <= h
    elif op == "vqa":
        assert response.answer in request.choices
    else:
        raise AssertionError(f"unknown op {op!r}")


def run_contract_suite(bundle, repeat: int = 2, byte_deterministic: bool = True):
    """Drive every fixture through the bundle; optionally check determinism."""
    for op, request in fixture_requests():
        service = getattr(bundle, op, None)
        if service is None:
            continue
        call = getattr(service, op)
        first = call(request)
        check_response(op, request, first)
        for _ in range(repeat - 1):
            again = call(request)
            check_response(op, request, again)
            if byte_deterministic:
                assert wire.encode(again) == wire.encode(first), \
                    f"{op} is not deterministic"
