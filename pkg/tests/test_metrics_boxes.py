import numpy as np
import pytest

from bev2ego.metrics import (Detection, GroundTruthObject, display_box,
                             effective_iou, iou, matched_confidence, nms)


def random_box(rng, span=20.0):
    x0, y0 = rng.uniform(0, span, 2)
    w, h = rng.uniform(0.1, span / 2, 2)
    return (x0, y0, x0 + w, y0 + h)


class TestIou:
    def test_identical(self):
        assert iou((0, 0, 2, 2), (0, 0, 2, 2)) == 1.0

    def test_disjoint(self):
        assert iou((0, 0, 1, 1), (5, 5, 6, 6)) == 0.0

    def test_third_overlap(self):
        # hand count: intersection 2, union 6
        assert iou((0, 0, 2, 2), (1, 0, 3, 2)) == pytest.approx(1 / 3)

    def test_degenerate_union(self):
        assert iou((0, 0, 0, 0), (1, 1, 1, 1)) == 0.0

    def test_symmetric(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            a, b = random_box(rng), random_box(rng)
            assert iou(a, b) == pytest.approx(iou(b, a))


class TestEffectiveIou:
    def test_dominates_full_box(self):
        rng = np.random.default_rng(1)
        for _ in range(10000):
            det = random_box(rng)
            gt = GroundTruthObject(full_box=random_box(rng),
                                   visible_box=random_box(rng))
            assert effective_iou(det, gt) >= iou(det, gt.full_box)

    def test_occluded_visible_box_admits(self):
        gt = GroundTruthObject(full_box=(0, 0, 10, 10), visible_box=(0, 0, 10, 6))
        det = (0, 0, 10, 6)
        assert iou(det, gt.full_box) == pytest.approx(0.6)
        assert effective_iou(det, gt) == pytest.approx(1.0)

    def test_hidden_object_uses_full_only(self):
        gt = GroundTruthObject(full_box=(0, 0, 4, 4), visible_box=None)
        assert effective_iou((0, 0, 4, 4), gt) == 1.0


class TestMatchedConfidence:
    GT = GroundTruthObject(full_box=(0, 0, 10, 10), visible_box=(0, 0, 10, 5))

    def test_empty_is_zero(self):
        assert matched_confidence([], self.GT, 0.5) == 0.0

    def test_visible_box_qualifies(self):
        det = Detection((0, 0, 10, 5), "car", 0.9)
        assert iou(det.box, self.GT.full_box) == pytest.approx(0.5)
        assert matched_confidence([det], self.GT, 0.6) == 0.9

    def test_max_over_qualifying(self):
        dets = [Detection((0, 0, 10, 10), "car", 0.3),
                Detection((0, 0, 10, 10), "car", 0.7)]
        assert matched_confidence(dets, self.GT, 0.5) == 0.7

    def test_wrong_class_ignored(self):
        dets = [Detection((0, 0, 10, 10), "boat", 0.99)]
        assert matched_confidence(dets, self.GT, 0.5) == 0.0

    def test_below_threshold_ignored(self):
        dets = [Detection((8, 8, 20, 20), "car", 0.99)]
        assert matched_confidence(dets, self.GT, 0.5) == 0.0


class TestDisplayBox:
    GT = GroundTruthObject(full_box=(0, 0, 10, 10), visible_box=(0, 0, 10, 10))

    def test_empty(self):
        assert display_box([], self.GT) is None

    def test_single_qualifying(self):
        det = Detection((0, 0, 10, 10), "boat", 0.4)  # class-agnostic
        assert display_box([det], self.GT) is det

    def test_brute_force_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(2000):
            dets = [Detection(random_box(rng, 12),
                              rng.choice(["car", "boat"]),
                              round(float(rng.uniform()), 2))
                    for _ in range(rng.integers(0, 5))]
            gt = GroundTruthObject(full_box=random_box(rng, 12),
                                   visible_box=random_box(rng, 12))
            # oracle: explicit scan with the documented tie rule
            best, key = None, None
            for i, d in enumerate(dets):
                e = effective_iou(d.box, gt)
                if e < 0.5:
                    continue
                k = (d.confidence, e, -i)
                if key is None or k > key:
                    best, key = d, k
            assert display_box(dets, gt) is best

    def test_tie_break_by_effective_iou_then_index(self):
        gt = GroundTruthObject(full_box=(0, 0, 10, 10), visible_box=(0, 0, 10, 10))
        a = Detection((0, 0, 10, 9), "car", 0.8)
        b = Detection((0, 0, 10, 10), "car", 0.8)
        assert display_box([a, b], gt) is b
        c = Detection((0, 0, 10, 10), "car", 0.8)
        assert display_box([b, c], gt) is b


class TestNms:
    def test_high_overlap_suppressed(self):
        a = Detection((0, 0, 10, 10), "car", 0.9)
        b = Detection((0, 0, 10, 9), "car", 0.8)  # IoU 0.9 with a
        assert iou(a.box, b.box) == pytest.approx(0.9)
        assert nms([a, b], 0.5) == [a]

    def test_low_overlap_kept(self):
        a = Detection((0, 0, 10, 10), "car", 0.9)
        b = Detection((9, 9, 20, 20), "car", 0.8)
        assert nms([a, b], 0.5) == [a, b]

    def test_classes_independent(self):
        a = Detection((0, 0, 10, 10), "car", 0.9)
        b = Detection((0, 0, 10, 10), "boat", 0.8)
        assert nms([a, b], 0.5) == [a, b]

    def test_brute_force_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(500):
            dets = [Detection(random_box(rng, 8),
                              rng.choice(["car", "boat"]),
                              round(float(rng.uniform()), 3))
                    for _ in range(rng.integers(0, 8))]
            psi = float(rng.uniform(0.05, 1.0))
            # oracle: independent greedy pass
            order = sorted(range(len(dets)),
                           key=lambda i: (-dets[i].confidence, i))
            kept = []
            for i in order:
                if all(dets[j].label != dets[i].label
                       or iou(dets[j].box, dets[i].box) <= psi for j in kept):
                    kept.append(i)
            expected = [dets[i] for i in sorted(kept)]
            assert nms(dets, psi) == expected

    def test_invalid_threshold(self):
        with pytest.raises(ValueError):
            nms([], 0.0)
        with pytest.raises(ValueError):
            nms([], 1.5)


class TestValidation:
    def test_inverted_box_rejected(self):
        with pytest.raises(ValueError):
            Detection((5, 0, 1, 2), "car", 0.5)

    def test_confidence_range(self):
        with pytest.raises(ValueError):
            Detection((0, 0, 1, 1), "car", 1.5)
