"""Systematic-error mining: rank attribute conjunctions by mean MMS.

The search enumerates every conjunction of up to three conditions over
car type, color, background, occlusion bands, and rotation bins;
car-level conditions must hold on a single car.  Groups below the
support floor are dropped.  Each reported group carries its worst
(exemplar) and best (counter-example) scenes, supporting the
probe-with-small-edits workflow.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..metrics.mms import SceneEvaluation, rotation_bin
from ..predicates import AttributePredicate
from ..scene import BACKGROUNDS, CAR_TYPES, COLORS

OCCLUSION_BANDS = (0.2, 0.4, 0.6, 0.8)
ROTATION_BINS = tuple(range(9))
MAX_DEPTH = 3
DEFAULT_MIN_SUPPORT = 5


@dataclass(frozen=True)
class MinedGroup:
    predicate: AttributePredicate
    mean_mms: float
    scene_count: int
    exemplar_scene_ids: tuple[str, ...]
    counterexample_scene_ids: tuple[str, ...]


@dataclass
class ErrorMiningReport:
    detector: str
    groups: list[MinedGroup]
    global_mean: float
    global_std: float

    def top(self, n: int = 10) -> list[MinedGroup]:
        return self.groups[:n]


def _candidate_conditions():
    """The five condition families as (field, value) atoms."""
    atoms = []
    atoms += [("car_type", t) for t in CAR_TYPES]
    atoms += [("color", c) for c in COLORS]
    atoms += [("background", b) for b in BACKGROUNDS]
    atoms += [("occlusion_gt", t) for t in OCCLUSION_BANDS]
    atoms += [("rotation_bin", r) for r in ROTATION_BINS]
    return atoms


def enumerate_predicates(max_depth: int = MAX_DEPTH):
    """All conjunctions of 1..max_depth atoms from distinct families."""
    atoms = _candidate_conditions()
    for depth in range(1, max_depth + 1):
        for combo in itertools.combinations(atoms, depth):
            fields = [f for f, _ in combo]
            if len(set(fields)) != depth:
                continue
            yield AttributePredicate(**dict(combo))


def _car_feature_arrays(evaluations: list[SceneEvaluation]):
    """Flatten (scene, car) attributes into parallel arrays."""
    scene_idx, types, colors, bgs, occs, rots = [], [], [], [], [], []
    for si, ev in enumerate(evaluations):
        bg = ev.attributes.get("background", "")
        for car in ev.attributes.get("cars", []):
            scene_idx.append(si)
            types.append(car.get("car_type", ""))
            colors.append(car.get("color", ""))
            bgs.append(bg)
            occs.append(car.get("occlusion", 0.0))
            rots.append(rotation_bin(car.get("azimuth_deg", 0.0)))
    return (np.asarray(scene_idx), np.asarray(types), np.asarray(colors),
            np.asarray(bgs), np.asarray(occs, dtype=float), np.asarray(rots))


def mine_systematic_errors(evaluations: list[SceneEvaluation],
                           mms_values: dict[str, float],
                           min_support: int = DEFAULT_MIN_SUPPORT,
                           max_depth: int = MAX_DEPTH,
                           detector: str = "") -> ErrorMiningReport:
    """Rank attribute groups by mean MMS, descending.

    ``mms_values`` maps scene_id -> MMS for the detector under analysis.
    Ties break toward larger support, then lexicographic description,
    so the ranking is deterministic.
    """
    values = np.asarray([mms_values[e.scene_id] for e in evaluations])
    n_scenes = len(evaluations)
    global_mean = float(values.mean()) if n_scenes else 0.0
    global_std = float(values.std()) if n_scenes else 0.0
    scene_ids = [e.scene_id for e in evaluations]

    scene_idx, types, colors, bgs, occs, rots = _car_feature_arrays(evaluations)

    def car_mask(pred: AttributePredicate) -> np.ndarray:
        mask = np.ones(len(scene_idx), bool)
        if pred.car_type is not None:
            mask &= types == pred.car_type
        if pred.color is not None:
            mask &= colors == pred.color
        if pred.background is not None:
            mask &= bgs == pred.background
        if pred.occlusion_gt is not None:
            mask &= occs > pred.occlusion_gt
        if pred.rotation_bin is not None:
            mask &= rots == pred.rotation_bin
        return mask

    groups: list[MinedGroup] = []
    for pred in enumerate_predicates(max_depth):
        mask = car_mask(pred)
        if not mask.any():
            continue
        member_scenes = np.unique(scene_idx[mask])
        if member_scenes.size < min_support:
            continue
        member_values = values[member_scenes]
        order = np.argsort(member_values)
        exemplars = tuple(scene_ids[member_scenes[i]] for i in order[::-1][:3])
        counters = tuple(scene_ids[member_scenes[i]] for i in order[:3])
        groups.append(MinedGroup(
            predicate=pred,
            mean_mms=float(member_values.mean()),
            scene_count=int(member_scenes.size),
            exemplar_scene_ids=exemplars,
            counterexample_scene_ids=counters))

    groups.sort(key=lambda g: (-g.mean_mms, -g.scene_count,
                               g.predicate.describe()))
    return ErrorMiningReport(detector=detector, groups=groups,
                             global_mean=global_mean, global_std=global_std)


def report_to_text(report: ErrorMiningReport, top: int = 15) -> str:
    lines = [f"systematic-error mining: detector={report.detector or '-'} "
             f"global mean MMS {report.global_mean:.4f}"]
    header = f"{'rank':>4}  {'mean MMS':>8}  {'scenes':>6}  predicate"
    lines.append(header)
    for rank, g in enumerate(report.top(top), start=1):
        lines.append(f"{rank:>4}  {g.mean_mms:>8.4f}  {g.scene_count:>6}  "
                     f"{g.predicate.describe()} "
                     f"(worst: {', '.join(g.exemplar_scene_ids)})")
    return "\n".join(lines) + "\n"
