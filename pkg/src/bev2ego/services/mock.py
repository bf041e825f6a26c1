"""Deterministic in-process mock model services.

The mocks speak the full wire protocol and are pure functions of
(request, profile): repeated calls return byte-identical payloads.
The renderer draws the parametric car silhouette, the outpainter fills
road and background regions with keyed flat colors (plus seed-keyed
dithering), the segmenter flood-fills near-identical color, the
detector reads the ground-truth sidecar through a configurable error
profile, and the VQA service answers from the same sidecar.
"""

from __future__ import annotations

import re
import zlib
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..errors import EmptyMask, ProtocolError, RangeError
from ..metrics.boxes import Detection, nms
from ..predicates import AttributePredicate
from ..scene import aspect_ratio
from . import protocol as wire
from .imaging import decode_image, decode_mask, encode_image, encode_mask

# Car paint colors.  Kept > 8/255 per channel away from every scenery
# color (and from their recolor-shifted variants) so the mock segmenter's
# flood fill never bleeds between car and scenery.
CAR_COLOR_RGB = {
    "white": (245, 245, 245),
    "black": (15, 15, 15),
    "grey": (128, 128, 128),
    "yellow": (230, 210, 40),
    "red": (200, 30, 30),
    "blue": (30, 60, 200),
    "green": (30, 160, 60),
    "brown": (120, 80, 40),
    "pink": (240, 130, 180),
    "orange": (235, 140, 30),
    "purple": (140, 40, 180),
}

ROAD_COLOR = (70, 70, 78)

BACKGROUND_RGB = {
    "in forest": (40, 95, 40),
    "on beach": (215, 190, 140),
    "in city": (160, 160, 175),
    "on snowy street": (225, 228, 235),
    "on highway": (100, 110, 100),
    "near lake": (60, 130, 190),
}
_DEFAULT_BG = (90, 140, 90)

# Colors the segmenter treats as scenery: prompting there is an error.
SENTINEL_COLORS = [ROAD_COLOR, _DEFAULT_BG, *BACKGROUND_RGB.values()]

FLOOD_TOLERANCE = 8  # per channel, out of 255
DITHER_AMPLITUDE = 3


def _require(condition: bool, message: str):
    if not condition:
        raise ProtocolError(message)


class MockRenderService:
    """Draws the parametric billboard silhouette as a solid color slab.

    The silhouette matches the rectangle footprint used by the scene
    geometry, so pixel-level occlusion agrees with the geometric model
    up to rasterization.
    """

    def render(self, req: wire.RenderRequest) -> wire.RenderResponse:
        req.check_ranges()
        if req.color not in CAR_COLOR_RGB:
            raise RangeError(f"unknown color {req.color!r}")
        h = req.height_px
        w = max(1, round(h * aspect_ratio(req.car_type, req.azimuth_deg)))
        img = np.empty((h, w, 3), np.uint8)
        img[:] = CAR_COLOR_RGB[req.color]
        alpha = np.ones((h, w), bool)
        return wire.RenderResponse(request_id=req.request_id,
                                   image_png_b64=encode_image(img),
                                   alpha_png_b64=encode_mask(alpha))


def background_color_for_prompt(prompt: str) -> tuple[int, int, int]:
    for name, rgb in BACKGROUND_RGB.items():
        if name in prompt:
            return rgb
    return _DEFAULT_BG


@dataclass
class MockOutpaintService:
    """Fills the object-mask complement with road/background colors.

    Pixels inside the object mask are always preserved byte-exactly.
    ``corruption`` selects a failure mode for benchmark tests:
    "dilate" grows each object by ~20 percent (boundary hallucination),
    "recolor" shifts colors inside the mask (content not preserved;
    applied after the preservation step, so it is the one mode allowed
    to touch masked pixels).
    """

    corruption: str | None = None

    def outpaint(self, req: wire.OutpaintRequest) -> wire.OutpaintResponse:
        img = decode_image(req.image_png_b64)
        obj = decode_mask(req.object_mask_png_b64)
        road = decode_mask(req.road_mask_png_b64)
        _require(obj.shape == img.shape[:2], "object mask dimensions differ from image")
        _require(road.shape == img.shape[:2], "road mask dimensions differ from image")

        out = img.copy()
        bg_rgb = background_color_for_prompt(req.prompt)
        bg_region = ~obj & ~road
        out[road & ~obj] = ROAD_COLOR
        out[bg_region] = bg_rgb
        # seed-keyed dithering, confined to the background region
        rng = np.random.RandomState(req.seed % (2 ** 32))
        noise = rng.randint(-DITHER_AMPLITUDE, DITHER_AMPLITUDE + 1,
                            size=out.shape).astype(np.int16)
        dithered = np.clip(out.astype(np.int16) + noise, 0, 255).astype(np.uint8)
        out[bg_region] = dithered[bg_region]

        if self.corruption == "dilate":
            out = self._dilate_objects(out, obj)
        elif self.corruption == "recolor":
            shift = np.array([40, -25, 15], np.int16)
            out[obj] = np.clip(out[obj].astype(np.int16) + shift, 0, 255).astype(np.uint8)
        return wire.OutpaintResponse(request_id=req.request_id,
                                     image_png_b64=encode_image(out))

    @staticmethod
    def _dilate_objects(out: np.ndarray, obj: np.ndarray) -> np.ndarray:
        labels, count = ndimage.label(obj, structure=np.ones((3, 3)))
        grown = obj.copy()
        for i in range(1, count + 1):
            component = labels == i
            ys, xs = np.nonzero(component)
            radius = max(1, round(0.1 * (ys.max() - ys.min() + 1)))
            grown |= ndimage.binary_dilation(component, iterations=radius)
        ring = grown & ~obj
        # paint the ring with each pixel's nearest object color
        _, idx = ndimage.distance_transform_edt(~obj, return_indices=True)
        out[ring] = out[idx[0][ring], idx[1][ring]]
        return out


class MockSegmentService:
    """Connected region of near-identical color around the prompt point."""

    def segment(self, req: wire.SegmentRequest) -> wire.SegmentResponse:
        img = decode_image(req.image_png_b64)
        x, y = req.point
        h, w = img.shape[:2]
        if not (0 <= x < w and 0 <= y < h):
            raise RangeError(f"point {req.point} outside {w}x{h} image")
        target = img[y, x].astype(np.int16)
        for sentinel in SENTINEL_COLORS:
            if np.abs(target - np.asarray(sentinel, np.int16)).max() <= FLOOD_TOLERANCE:
                raise EmptyMask(f"prompt point {req.point} lies on scenery")
        close = np.abs(img.astype(np.int16) - target).max(axis=2) <= FLOOD_TOLERANCE
        labels, _ = ndimage.label(close, structure=np.ones((3, 3)))
        mask = labels == labels[y, x]
        return wire.SegmentResponse(request_id=req.request_id,
                                    mask_png_b64=encode_mask(mask))


@dataclass(frozen=True)
class PlantedRule:
    """First-match-wins detector override for a matching car."""

    predicate: AttributePredicate
    confidence: float | None = None
    flip_class: str | None = None


@dataclass(frozen=True)
class MockDetectorProfile:
    """Behavior knobs for the sidecar-driven mock detector."""

    name: str = "mock"
    base_confidence: dict[str, float] = field(default_factory=dict)
    default_base: float = 0.9
    occlusion_curve: tuple[tuple[float, float], ...] = ((0.0, 1.0), (1.0, 1.0))
    rules: tuple[PlantedRule, ...] = ()
    localization_sigma: float = 0.0
    confidence_noise: float = 0.0
    seed: int = 0

    def base_for(self, car_type: str | None) -> float:
        if car_type is None:
            return self.default_base
        return self.base_confidence.get(car_type, self.default_base)

    def occlusion_multiplier(self, occlusion: float) -> float:
        xs = [p[0] for p in self.occlusion_curve]
        ys = [p[1] for p in self.occlusion_curve]
        return float(np.interp(occlusion, xs, ys))


def identity_profile(name: str = "identity") -> MockDetectorProfile:
    return MockDetectorProfile(name=name, default_base=1.0)


def null_profile(name: str = "null") -> MockDetectorProfile:
    return MockDetectorProfile(name=name, default_base=0.0)


@dataclass
class MockDetectService:
    """Emits one box per visible sidecar car, shaped by the profile."""

    profile: MockDetectorProfile = field(default_factory=MockDetectorProfile)

    def detect(self, req: wire.DetectRequest) -> wire.DetectResponse:
        req.check_ranges()
        sidecar = req.test_oracle
        if not sidecar:
            return wire.DetectResponse(request_id=req.request_id, detections=[])
        img = decode_image(req.image_png_b64)
        h, w = img.shape[:2]
        dets: list[Detection] = []
        for car in sidecar.get("cars", []):
            box = car.get("visible_box")
            if box is None:
                continue
            conf = self.profile.base_for(car.get("car_type")) \
                * self.profile.occlusion_multiplier(car.get("occlusion", 0.0))
            label = "car"
            for rule in self.profile.rules:
                if rule.predicate.matches_car(car, sidecar):
                    if rule.confidence is not None:
                        conf = rule.confidence
                    if rule.flip_class is not None:
                        label = rule.flip_class
                    break
            scene_key = zlib.crc32(str(sidecar.get("scene_id", "")).encode())
            rng = np.random.default_rng(
                np.random.SeedSequence([self.profile.seed & 0x7FFFFFFF,
                                        scene_key,
                                        sidecar.get("seed", 0) & 0x7FFFFFFF,
                                        int(car.get("index", 0))]))
            if self.profile.confidence_noise > 0:
                conf += rng.normal(0.0, self.profile.confidence_noise)
            conf = min(1.0, max(0.0, conf))
            x0, y0, x1, y1 = box
            if self.profile.localization_sigma > 0:
                jitter = rng.normal(0.0, self.profile.localization_sigma, 4)
                x0, y0, x1, y1 = x0 + jitter[0], y0 + jitter[1], \
                    x1 + jitter[2], y1 + jitter[3]
            x0 = min(max(0.0, x0), w - 1.0)
            x1 = min(max(x0, x1), float(w))
            y0 = min(max(0.0, y0), h - 1.0)
            y1 = min(max(y0, y1), float(h))
            dets.append(Detection((x0, y0, x1, y1), label, conf))
        kept = nms(dets, req.nms_iou)
        return wire.DetectResponse(
            request_id=req.request_id,
            detections=[wire.WireDetection(box=d.box, label=d.label,
                                           confidence=d.confidence)
                        for d in kept])


_RE_PRESENCE = re.compile(r"^is there an? (.+)\?$")
_RE_IS_COLOR = re.compile(r"^is the (.+) (\S+)\?$")
_RE_WHAT_COLOR = re.compile(r"^what color is the (.+)\?$")


class MockVqaService:
    """Answers questionnaire templates from the ground-truth sidecar."""

    def vqa(self, req: wire.VqaRequest) -> wire.VqaResponse:
        req.check_ranges()
        answer = self._answer(req)
        if answer not in req.choices:
            answer = req.choices[0]
        return wire.VqaResponse(request_id=req.request_id, answer=answer)

    @staticmethod
    def _answer(req: wire.VqaRequest) -> str:
        sidecar = req.test_oracle or {}
        cars = sidecar.get("cars", [])
        corruptions = set(sidecar.get("corruptions", []))
        q = req.question.strip().lower()

        if q == "what type of path is this?":
            return "grass" if "road_removed" in corruptions else "asphalted road"
        if q == "is there an asphalted road?":
            return "no" if "road_removed" in corruptions else "yes"

        m = _RE_PRESENCE.match(q)
        if m:
            wanted = m.group(1)
            present = any(c.get("car_type", "").lower() == wanted for c in cars)
            return "yes" if present else "no"

        m = _RE_WHAT_COLOR.match(q)
        if m:
            wanted = m.group(1)
            for c in cars:
                if c.get("car_type", "").lower() == wanted:
                    return c.get("color", "")
            return ""

        m = _RE_IS_COLOR.match(q)
        if m:
            wanted_type, wanted_color = m.group(1), m.group(2)
            match = [c for c in cars
                     if c.get("car_type", "").lower() == wanted_type]
            if not match:
                return "no"
            return "yes" if any(c.get("color", "").lower() == wanted_color
                                for c in match) else "no"

        if "driving" in q:
            return "yes"
        return ""


@dataclass
class ServiceBundle:
    """The five services the pipeline talks to, mock or remote."""

    render: MockRenderService
    outpaint: MockOutpaintService
    segment: MockSegmentService
    detect: MockDetectService
    vqa: MockVqaService


def mock_bundle(profile: MockDetectorProfile | None = None,
                corruption: str | None = None) -> ServiceBundle:
    return ServiceBundle(
        render=MockRenderService(),
        outpaint=MockOutpaintService(corruption=corruption),
        segment=MockSegmentService(),
        detect=MockDetectService(profile=profile or MockDetectorProfile()),
        vqa=MockVqaService(),
    )
