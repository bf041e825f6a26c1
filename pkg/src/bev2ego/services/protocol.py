"""Wire protocol for the model services: render, outpaint, segment, detect, vqa.

One POST endpoint per operation (``/v1/render`` etc.), JSON bodies,
images as base64-encoded PNG (RGB8; masks gray8 with values 0/255).
Mock-only ground truth rides in an optional ``_test_oracle`` field that
real adapters ignore.  Schema or range violations map to HTTP 4xx with
``{code, message}``; service failures to 5xx.
"""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..errors import ProtocolError, RangeError

DEFAULT_CONTROLNET_WEIGHT = 1.0

OPS = ("render", "outpaint", "segment", "detect", "vqa")


class _Message(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class RenderRequest(_Message):
    request_id: str
    azimuth_deg: float
    polar_deg: float
    height_px: int
    car_type: str
    color: str
    seed: int
    test_oracle: dict[str, Any] | None = Field(default=None, alias="_test_oracle")

    def check_ranges(self):
        if not (-180.0 < self.azimuth_deg <= 180.0):
            raise RangeError(f"azimuth_deg {self.azimuth_deg} outside (-180, 180]")
        if not (5.0 <= self.polar_deg <= 15.0):
            raise RangeError(f"polar_deg {self.polar_deg} outside [5, 15]")
        if self.height_px <= 0:
            raise RangeError(f"height_px must be positive, got {self.height_px}")


class RenderResponse(_Message):
    request_id: str
    image_png_b64: str
    alpha_png_b64: str


class OutpaintRequest(_Message):
    request_id: str
    image_png_b64: str
    object_mask_png_b64: str
    road_mask_png_b64: str
    prompt: str
    seed: int
    controlnet_weight: float = DEFAULT_CONTROLNET_WEIGHT
    test_oracle: dict[str, Any] | None = Field(default=None, alias="_test_oracle")


class OutpaintResponse(_Message):
    request_id: str
    image_png_b64: str


class SegmentRequest(_Message):
    request_id: str
    image_png_b64: str
    point: tuple[int, int]
    test_oracle: dict[str, Any] | None = Field(default=None, alias="_test_oracle")


class SegmentResponse(_Message):
    request_id: str
    mask_png_b64: str


class DetectRequest(_Message):
    request_id: str
    image_png_b64: str
    nms_iou: float
    test_oracle: dict[str, Any] | None = Field(default=None, alias="_test_oracle")

    def check_ranges(self):
        if not (0.0 < self.nms_iou <= 1.0):
            raise RangeError(f"nms_iou {self.nms_iou} outside (0, 1]")


class WireDetection(_Message):
    box: tuple[float, float, float, float]
    label: str = Field(alias="class")
    confidence: float

    def check_ranges(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise RangeError(f"confidence {self.confidence} outside [0, 1]")
        x0, y0, x1, y1 = self.box
        if x0 > x1 or y0 > y1:
            raise RangeError(f"inverted box {self.box}")


class DetectResponse(_Message):
    request_id: str
    detections: list[WireDetection]


class VqaRequest(_Message):
    request_id: str
    image_png_b64: str
    question: str
    choices: list[str]
    test_oracle: dict[str, Any] | None = Field(default=None, alias="_test_oracle")

    def check_ranges(self):
        if not self.choices:
            raise RangeError("choices must be non-empty")


class VqaResponse(_Message):
    request_id: str
    answer: str


class ErrorBody(_Message):
    code: str
    message: str


REQUEST_TYPES: dict[str, type[_Message]] = {
    "render": RenderRequest,
    "outpaint": OutpaintRequest,
    "segment": SegmentRequest,
    "detect": DetectRequest,
    "vqa": VqaRequest,
}

RESPONSE_TYPES: dict[str, type[_Message]] = {
    "render": RenderResponse,
    "outpaint": OutpaintResponse,
    "segment": SegmentResponse,
    "detect": DetectResponse,
    "vqa": VqaResponse,
}

Op = Literal["render", "outpaint", "segment", "detect", "vqa"]


def decode(op: Op, payload: dict, kind: str = "request") -> _Message:
    types = REQUEST_TYPES if kind == "request" else RESPONSE_TYPES
    try:
        return types[op].model_validate(payload)
    except ValidationError as exc:
        raise ProtocolError(f"invalid {op} {kind}: {exc}") from exc


def encode(message: _Message) -> dict:
    return message.model_dump(by_alias=True, exclude_none=True)
