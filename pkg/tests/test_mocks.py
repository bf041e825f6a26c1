import numpy as np
import pytest

from bev2ego.errors import EmptyMask, RangeError
from bev2ego.metrics import mask_iou
from bev2ego.predicates import AttributePredicate
from bev2ego.scene import ASPECT_RATIOS
from bev2ego.services import protocol as wire
from bev2ego.services.contract import fixture_requests, run_contract_suite
from bev2ego.services.imaging import (decode_image, decode_mask, encode_image,
                                      encode_mask)
from bev2ego.services.mock import (BACKGROUND_RGB, CAR_COLOR_RGB, ROAD_COLOR,
                                   MockDetectService, MockDetectorProfile,
                                   MockOutpaintService, MockRenderService,
                                   MockSegmentService, MockVqaService,
                                   PlantedRule, mock_bundle)


def render(height=64, azimuth=0.0, car_type="sedan", color="red", seed=1):
    return MockRenderService().render(wire.RenderRequest(
        request_id="r", azimuth_deg=azimuth, polar_deg=10.0,
        height_px=height, car_type=car_type, color=color, seed=seed))


def mask_extents(mask):
    ys, xs = np.nonzero(mask)
    return ys.max() - ys.min() + 1, xs.max() - xs.min() + 1


class TestRender:
    def test_byte_deterministic(self):
        a, b = render(), render()
        assert a.image_png_b64 == b.image_png_b64
        assert a.alpha_png_b64 == b.alpha_png_b64

    def test_tight_height_contract(self):
        for h in (16, 64, 129):
            alpha = decode_mask(render(height=h).alpha_png_b64)
            th, _ = mask_extents(alpha)
            assert abs(th - h) <= 1

    def test_width_ratio_front_vs_side(self):
        for car_type, (side, front) in ASPECT_RATIOS.items():
            w_front = mask_extents(decode_mask(
                render(height=100, azimuth=0.0, car_type=car_type).alpha_png_b64))[1]
            w_side = mask_extents(decode_mask(
                render(height=100, azimuth=90.0, car_type=car_type).alpha_png_b64))[1]
            assert w_front == pytest.approx(100 * front, abs=1)
            assert w_side == pytest.approx(100 * side, abs=1)

    def test_fill_color(self):
        resp = render(color="blue")
        img = decode_image(resp.image_png_b64)
        alpha = decode_mask(resp.alpha_png_b64)
        assert tuple(img[alpha][0]) == CAR_COLOR_RGB["blue"]
        assert np.all(img[alpha] == CAR_COLOR_RGB["blue"])

    def test_range_errors(self):
        with pytest.raises(RangeError):
            MockRenderService().render(wire.RenderRequest(
                request_id="r", azimuth_deg=0.0, polar_deg=30.0, height_px=10,
                car_type="sedan", color="red", seed=0))


def outpaint_fixture(size=64, seed=5, corruption=None, prompt_bg="in forest"):
    img = np.zeros((size, size, 3), np.uint8)
    obj = np.zeros((size, size), bool)
    obj[20:40, 16:48] = True
    img[obj] = CAR_COLOR_RGB["red"]
    road = np.zeros((size, size), bool)
    road[40:, :] = True
    req = wire.OutpaintRequest(
        request_id="o", image_png_b64=encode_image(img),
        object_mask_png_b64=encode_mask(obj), road_mask_png_b64=encode_mask(road),
        prompt=f"cars are driving {prompt_bg}, high resolution, "
               f"high definition, high quality",
        seed=seed)
    out = MockOutpaintService(corruption=corruption).outpaint(req)
    return img, obj, road, decode_image(out.image_png_b64)


class TestOutpaint:
    def test_masked_pixels_preserved_exactly(self):
        img, obj, _, out = outpaint_fixture()
        np.testing.assert_array_equal(out[obj], img[obj])

    def test_road_region_filled(self):
        _, obj, road, out = outpaint_fixture()
        np.testing.assert_array_equal(out[road & ~obj][0], ROAD_COLOR)

    def test_background_keyed_color(self):
        _, obj, road, out = outpaint_fixture(prompt_bg="on snowy street")
        bg = ~obj & ~road
        base = np.asarray(BACKGROUND_RGB["on snowy street"])
        assert np.abs(out[bg].astype(int) - base).max() <= 3

    def test_same_seed_identical(self):
        _, _, _, a = outpaint_fixture(seed=9)
        _, _, _, b = outpaint_fixture(seed=9)
        np.testing.assert_array_equal(a, b)

    def test_different_seed_differs_only_in_background(self):
        _, obj, road, a = outpaint_fixture(seed=1)
        _, _, _, b = outpaint_fixture(seed=2)
        diff = np.any(a != b, axis=2)
        assert diff.any()
        assert not diff[obj].any()
        assert not diff[road & ~obj].any()

    def test_dilate_corruption_grows_object(self):
        img, obj, _, out = outpaint_fixture(corruption="dilate")
        np.testing.assert_array_equal(out[obj], img[obj])  # inside preserved
        grown = np.all(out == CAR_COLOR_RGB["red"], axis=2)
        assert grown.sum() > obj.sum() * 1.2

    def test_recolor_corruption_changes_inside(self):
        img, obj, _, out = outpaint_fixture(corruption="recolor")
        assert np.any(out[obj] != img[obj])
        # still a uniform region
        assert np.all(out[obj] == out[obj][0])


class TestSegment:
    def test_recovers_outpainted_car_mask(self):
        _, obj, _, out = outpaint_fixture()
        resp = MockSegmentService().segment(wire.SegmentRequest(
            request_id="s", image_png_b64=encode_image(out), point=(30, 30)))
        mask = decode_mask(resp.mask_png_b64)
        assert mask_iou(mask, obj) >= 0.99

    def test_scenery_point_is_empty_mask(self):
        _, _, _, out = outpaint_fixture()
        with pytest.raises(EmptyMask):
            MockSegmentService().segment(wire.SegmentRequest(
                request_id="s", image_png_b64=encode_image(out), point=(2, 62)))

    def test_point_outside_image(self):
        _, _, _, out = outpaint_fixture()
        with pytest.raises(RangeError):
            MockSegmentService().segment(wire.SegmentRequest(
                request_id="s", image_png_b64=encode_image(out), point=(999, 0)))

    def test_deterministic(self):
        _, _, _, out = outpaint_fixture()
        req = wire.SegmentRequest(request_id="s",
                                  image_png_b64=encode_image(out), point=(30, 30))
        svc = MockSegmentService()
        assert svc.segment(req).mask_png_b64 == svc.segment(req).mask_png_b64


def sidecar_with(cars, background="in forest", seed=0, corruptions=()):
    return {"schema": "sidecar/v1", "scene_id": "t", "seed": seed,
            "background": background, "scale": 1.0,
            "corruptions": list(corruptions), "cars": cars}


def car_entry(index=0, car_type="sedan", color="red", occlusion=0.0,
              box=(10.0, 10.0, 40.0, 30.0), azimuth=0.0):
    return {"index": index, "car_type": car_type, "color": color,
            "heading_deg": 0.0, "azimuth_deg": azimuth,
            "occlusion": occlusion, "full_box": list(box),
            "visible_box": list(box)}


def detect(profile, sidecar, nms_iou=0.5, size=64):
    img = np.zeros((size, size, 3), np.uint8)
    return MockDetectService(profile).detect(wire.DetectRequest(
        request_id="d", image_png_b64=encode_image(img), nms_iou=nms_iou,
        test_oracle=sidecar))


class TestDetect:
    def test_base_confidence_clean_car(self):
        profile = MockDetectorProfile(base_confidence={"sedan": 0.95})
        resp = detect(profile, sidecar_with([car_entry()]))
        assert len(resp.detections) == 1
        det = resp.detections[0]
        assert det.confidence == pytest.approx(0.95)
        assert det.label == "car"
        assert tuple(det.box) == (10.0, 10.0, 40.0, 30.0)

    def test_occlusion_curve_multiplies(self):
        profile = MockDetectorProfile(
            default_base=1.0, occlusion_curve=((0.0, 1.0), (1.0, 0.0)))
        resp = detect(profile, sidecar_with([car_entry(occlusion=0.25)]))
        assert resp.detections[0].confidence == pytest.approx(0.75)

    def test_planted_rule_first_match_wins(self):
        rule1 = PlantedRule(AttributePredicate(car_type="sports car",
                                               background="on snowy street",
                                               occlusion_gt=0.4),
                            confidence=0.05)
        rule2 = PlantedRule(AttributePredicate(car_type="sports car"),
                            confidence=0.5)
        profile = MockDetectorProfile(rules=(rule1, rule2))
        hit = detect(profile, sidecar_with(
            [car_entry(car_type="sports car", occlusion=0.6)],
            background="on snowy street"))
        assert hit.detections[0].confidence == pytest.approx(0.05)
        partial = detect(profile, sidecar_with(
            [car_entry(car_type="sports car", occlusion=0.2)],
            background="on snowy street"))
        assert partial.detections[0].confidence == pytest.approx(0.5)

    def test_class_flip_rule(self):
        rule = PlantedRule(AttributePredicate(car_type="sports car"),
                           flip_class="boat")
        resp = detect(MockDetectorProfile(rules=(rule,)),
                      sidecar_with([car_entry(car_type="sports car")]))
        assert resp.detections[0].label == "boat"

    def test_fully_hidden_car_not_emitted(self):
        entry = car_entry()
        entry["visible_box"] = None
        resp = detect(MockDetectorProfile(), sidecar_with([entry]))
        assert resp.detections == []

    def test_nms_suppresses_high_overlap(self):
        a = car_entry(index=0, box=(10.0, 10.0, 40.0, 30.0))
        b = car_entry(index=1, box=(10.0, 10.0, 40.0, 29.0))
        profile = MockDetectorProfile(base_confidence={"sedan": 0.9},
                                      occlusion_curve=((0.0, 1.0), (1.0, 0.5)))
        resp = detect(profile, sidecar_with(
            [a, dict(b, occlusion=0.5)]), nms_iou=0.5)
        assert len(resp.detections) == 1
        assert resp.detections[0].confidence == pytest.approx(0.9)

    def test_deterministic_with_noise(self):
        profile = MockDetectorProfile(confidence_noise=0.05,
                                      localization_sigma=1.0, seed=13)
        sc = sidecar_with([car_entry()], seed=7)
        a = detect(profile, sc)
        b = detect(profile, sc)
        assert wire.encode(a) == wire.encode(b)

    def test_no_sidecar_no_detections(self):
        resp = detect(MockDetectorProfile(), None)
        assert resp.detections == []


class TestVqa:
    def ask(self, question, choices, sidecar):
        img = encode_image(np.zeros((8, 8, 3), np.uint8))
        return MockVqaService().vqa(wire.VqaRequest(
            request_id="v", image_png_b64=img, question=question,
            choices=choices, test_oracle=sidecar)).answer

    def test_presence(self):
        sc = sidecar_with([car_entry(car_type="sedan")])
        assert self.ask("is there a sedan?", ["yes", "no"], sc) == "yes"
        assert self.ask("is there a SUV?", ["yes", "no"], sc) == "no"

    def test_road_questions(self):
        sc = sidecar_with([car_entry()])
        assert self.ask("is there an asphalted road?", ["yes", "no"], sc) == "yes"
        choices = ["trail", "grass", "asphalted road"]
        assert self.ask("what type of path is this?", choices, sc) == "asphalted road"

    def test_road_removed_corruption(self):
        sc = sidecar_with([car_entry()], corruptions=["road_removed"])
        assert self.ask("is there an asphalted road?", ["yes", "no"], sc) == "no"
        choices = ["trail", "grass", "asphalted road"]
        assert self.ask("what type of path is this?", choices, sc) == "grass"

    def test_colors(self):
        sc = sidecar_with([car_entry(car_type="sedan", color="red")])
        assert self.ask("is the sedan red?", ["yes", "no"], sc) == "yes"
        assert self.ask("is the sedan blue?", ["yes", "no"], sc) == "no"
        colors = ["red", "blue", "green"]
        assert self.ask("what color is the sedan?", colors, sc) == "red"

    def test_activity(self):
        sc = sidecar_with([car_entry(car_type="sedan"),
                           car_entry(index=1, car_type="SUV")])
        assert self.ask("are the sedan and SUV driving?", ["yes", "no"], sc) == "yes"

    def test_answer_always_in_choices(self):
        sc = sidecar_with([])
        assert self.ask("what color is the sedan?", ["blue", "red"], sc) in \
            ["blue", "red"]


class TestContractSuite:
    def test_mock_bundle_passes(self):
        run_contract_suite(mock_bundle())

    def test_fixtures_cover_all_ops(self):
        assert sorted(op for op, _ in fixture_requests()) == \
            ["detect", "outpaint", "render", "segment", "vqa"]


class TestPaletteSeparation:
    def test_car_colors_far_from_scenery(self):
        scenery = [ROAD_COLOR, *BACKGROUND_RGB.values()]
        shift = np.array([40, -25, 15])
        for name, rgb in CAR_COLOR_RGB.items():
            variants = [np.asarray(rgb),
                        np.clip(np.asarray(rgb) + shift, 0, 255)]
            for variant in variants:
                for s in scenery:
                    dist = np.abs(variant - np.asarray(s)).max()
                    assert dist > 8, f"{name} ({variant}) too close to {s}"
