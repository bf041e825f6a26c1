"""Orchestration: realization, evaluation, mining, benchmarks, service."""

from .benchmark import (BenchmarkSpec, MethodScores, benchmark_outpainting,
                        benchmark_table, score_realization)
from .evaluate import (DetectorSet, EvaluationRun, evaluate_detectors,
                       fold_records, objects_from_sidecar)
from .mining import (DEFAULT_MIN_SUPPORT, ErrorMiningReport, MinedGroup,
                     enumerate_predicates, mine_systematic_errors,
                     report_to_text)
from .realize import (RealizedScene, RenderSettings, preview_scene,
                      realize_scene)
from .sim2real import (OcclusionCurves, RealFrame, Sim2RealResult,
                       Sim2RealSpec, averaged_spearman, composite_at_shift,
                       real_occlusion_run, shift_for_occlusion, sim2real_study,
                       synthetic_occlusion_curves)
from .storage import ResultLog, RunManifest, write_manifest, write_text

__all__ = [
    "BenchmarkSpec", "MethodScores", "benchmark_outpainting", "benchmark_table",
    "score_realization",
    "DetectorSet", "EvaluationRun", "evaluate_detectors", "fold_records",
    "objects_from_sidecar",
    "DEFAULT_MIN_SUPPORT", "ErrorMiningReport", "MinedGroup",
    "enumerate_predicates", "mine_systematic_errors", "report_to_text",
    "RealizedScene", "RenderSettings", "preview_scene", "realize_scene",
    "OcclusionCurves", "RealFrame", "Sim2RealResult", "Sim2RealSpec",
    "averaged_spearman", "composite_at_shift", "real_occlusion_run",
    "shift_for_occlusion", "sim2real_study", "synthetic_occlusion_curves",
    "ResultLog", "RunManifest", "write_manifest", "write_text",
]
