"""Scoring mathematics: boxes, MMS, image metrics, questionnaires, ranks."""

from .boxes import (Box, Detection, GroundTruthObject, box_area, display_box,
                    effective_iou, iou, matched_confidence, nms)
from .images import mask_iou, masked_l2, ms_ssim, to_luminance
from .mms import (DEFAULT_THRESHOLDS, GAMMA0, GroupReport, GroupRow, MmsConfig,
                  SceneEvaluation, group_mms, is_side_view, mms, recombined_mean,
                  reports_to_csv, reports_to_text, rotation_bin,
                  rotation_bin_label, seed_score, STANDARD_GROUPINGS)
from .stats import DegenerateVarianceWarning, spearman
from .tifa import Question, tifa_questions, tifa_score

__all__ = [
    "Box", "Detection", "GroundTruthObject", "box_area", "display_box",
    "effective_iou", "iou", "matched_confidence", "nms",
    "mask_iou", "masked_l2", "ms_ssim", "to_luminance",
    "DEFAULT_THRESHOLDS", "GAMMA0", "GroupReport", "GroupRow", "MmsConfig",
    "SceneEvaluation", "group_mms", "is_side_view", "mms", "recombined_mean",
    "reports_to_csv", "reports_to_text", "rotation_bin", "rotation_bin_label",
    "seed_score", "STANDARD_GROUPINGS",
    "DegenerateVarianceWarning", "spearman",
    "Question", "tifa_questions", "tifa_score",
]
