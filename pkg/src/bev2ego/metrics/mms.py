"""Mean Median Score: the per-scene failure metric and its group slices.

For one scene rendered under several seeds, the score at an IoU
threshold is one minus the median (over seeds) of the best matched
confidence; the final value is the mean of those terms over all
thresholds.  0 means the detector always found every car, 1 that it
never did.  Scenes with several cars average the per-object matched
confidences before taking the median.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from .boxes import Detection, GroundTruthObject, matched_confidence

DEFAULT_THRESHOLDS = tuple(round(0.50 + 0.05 * i, 2) for i in range(10))
GAMMA0 = 0.5

# |azimuth| in [0, 180] split into nine equal bins; the last bin is closed.
ROTATION_BIN_EDGES = tuple(20.0 * i for i in range(10))


@dataclass(frozen=True)
class MmsConfig:
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    nms_iou: float = 0.7
    target_class: str = "car"
    seeds_per_scene: int = 9

    def __post_init__(self):
        if len(self.thresholds) == 0:
            raise ConfigError("threshold set must not be empty")
        if list(self.thresholds) != sorted(self.thresholds):
            raise ConfigError("thresholds must be sorted ascending")
        if any(not 0.0 < t <= 1.0 for t in self.thresholds):
            raise ConfigError("thresholds must lie in (0, 1]")


@dataclass
class SceneEvaluation:
    """Detections and ground truth for one scene under all its seeds."""

    scene_id: str
    detections_per_seed: list[list[Detection]]
    objects_per_seed: list[list[GroundTruthObject]]
    attributes: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.detections_per_seed) != len(self.objects_per_seed):
            raise ConfigError("detections and ground truth must pair per seed")


def seed_score(detections: list[Detection],
               objects: list[GroundTruthObject],
               threshold: float) -> float:
    """Mean over ground-truth objects of the best matched confidence."""
    if not objects:
        return 0.0
    per_object = [matched_confidence(detections, o, threshold) for o in objects]
    return sum(per_object) / len(per_object)


def mms(evaluation: SceneEvaluation, cfg: MmsConfig | None = None) -> float:
    """Mean over thresholds of (1 - median over seeds of the seed score)."""
    cfg = cfg or MmsConfig()
    if len(evaluation.detections_per_seed) == 0:
        raise ConfigError("evaluation carries no seeds")
    terms = []
    for gamma in cfg.thresholds:
        scores = [seed_score(dets, objs, gamma)
                  for dets, objs in zip(evaluation.detections_per_seed,
                                        evaluation.objects_per_seed)]
        terms.append(1.0 - float(np.median(scores)))
    return sum(terms) / len(terms)


def rotation_bin(azimuth_deg: float) -> int:
    """Nine half-open bins over |azimuth| in [0, 180]; the last is closed."""
    a = abs(azimuth_deg)
    if not 0.0 <= a <= 180.0:
        raise ValueError(f"|azimuth| {a} outside [0, 180]")
    return min(8, int(a // 20.0))


def rotation_bin_label(index: int) -> str:
    lo, hi = ROTATION_BIN_EDGES[index], ROTATION_BIN_EDGES[index + 1]
    return f"[{lo:.0f},{hi:.0f}{']' if index == 8 else ')'}"


def is_side_view(azimuth_deg: float, bands=((0.0, 10.0), (170.0, 180.0))) -> bool:
    a = abs(azimuth_deg)
    return any(lo <= a <= hi for lo, hi in bands)


@dataclass(frozen=True)
class GroupRow:
    group: str
    mean_mms: float
    scene_count: int


@dataclass
class GroupReport:
    """Per-group mean MMS for one detector; empty groups are absent rows."""

    detector: str
    rows: list[GroupRow]

    def as_dict(self) -> dict[str, float]:
        return {r.group: r.mean_mms for r in self.rows}


def group_mms(scored: list[tuple[SceneEvaluation, float]],
              group_by, detector: str = "") -> GroupReport:
    """Average per-scene MMS within groups chosen by ``group_by``.

    ``group_by`` maps a SceneEvaluation to an iterable of group keys (a
    scene may fall into several groups, e.g. one per car).
    """
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for evaluation, value in scored:
        keys = group_by(evaluation)
        for key in set(keys):
            sums[key] = sums.get(key, 0.0) + value
            counts[key] = counts.get(key, 0) + 1
    rows = [GroupRow(k, sums[k] / counts[k], counts[k]) for k in sorted(sums)]
    return GroupReport(detector=detector, rows=rows)


# -- selectors over realize-sidecar attributes --------------------------------

def by_car_type(evaluation: SceneEvaluation):
    return [c["car_type"] for c in evaluation.attributes.get("cars", [])]

def by_color_and_type(evaluation: SceneEvaluation):
    return [f'{c["color"]} {c["car_type"]}'
            for c in evaluation.attributes.get("cars", [])]

def by_background_and_type(evaluation: SceneEvaluation):
    bg = evaluation.attributes.get("background", "?")
    return [f'{c["car_type"]} {bg}'
            for c in evaluation.attributes.get("cars", [])]

def by_rotation_bin(evaluation: SceneEvaluation):
    return [rotation_bin_label(rotation_bin(c["azimuth_deg"]))
            for c in evaluation.attributes.get("cars", [])]

def by_background(evaluation: SceneEvaluation):
    return [evaluation.attributes.get("background", "?")]

STANDARD_GROUPINGS = {
    "car_type": by_car_type,
    "color_x_type": by_color_and_type,
    "background_x_type": by_background_and_type,
    "rotation_bin": by_rotation_bin,
}


# -- report emission -----------------------------------------------------------

def reports_to_csv(reports: list[GroupReport], annotate: bool = False) -> str:
    """Rows = groups, columns = detectors, mirroring the summary-table layout."""
    groups = sorted({r.group for rep in reports for r in rep.rows})
    buf = io.StringIO()
    writer = csv.writer(buf)
    header = ["group"] + [rep.detector for rep in reports]
    if annotate:
        header.append("annotations")
    writer.writerow(header)
    lookup = [{r.group: r for r in rep.rows} for rep in reports]
    extrema = _extrema_markers(reports) if annotate else {}
    for g in groups:
        row = [g]
        for table in lookup:
            r = table.get(g)
            row.append(f"{r.mean_mms:.4f}" if r else "")
        if annotate:
            row.append(";".join(extrema.get(g, [])))
        writer.writerow(row)
    return buf.getvalue()


def reports_to_text(reports: list[GroupReport]) -> str:
    groups = sorted({r.group for rep in reports for r in rep.rows})
    names = [rep.detector or f"det{i}" for i, rep in enumerate(reports)]
    gw = max([len("group")] + [len(g) for g in groups])
    cw = [max(len(n), 7) for n in names]
    lines = ["  ".join(["group".ljust(gw)] + [n.rjust(w) for n, w in zip(names, cw)])]
    lookup = [{r.group: r for r in rep.rows} for rep in reports]
    for g in groups:
        cells = []
        for table, w in zip(lookup, cw):
            r = table.get(g)
            cells.append((f"{r.mean_mms:.4f}" if r else "-").rjust(w))
        lines.append("  ".join([g.ljust(gw)] + cells))
    return "\n".join(lines) + "\n"


def _extrema_markers(reports: list[GroupReport]) -> dict[str, list[str]]:
    """Mark each detector's best (green) and worst (red) group."""
    markers: dict[str, list[str]] = {}
    for rep in reports:
        if not rep.rows:
            continue
        worst = max(rep.rows, key=lambda r: r.mean_mms)
        best = min(rep.rows, key=lambda r: r.mean_mms)
        markers.setdefault(worst.group, []).append(f"red:{rep.detector}")
        markers.setdefault(best.group, []).append(f"green:{rep.detector}")
    return markers


def recombined_mean(report: GroupReport) -> float:
    """Size-weighted mean over groups; equals the global mean for a partition."""
    total = sum(r.scene_count for r in report.rows)
    if total == 0:
        return math.nan
    return sum(r.mean_mms * r.scene_count for r in report.rows) / total
