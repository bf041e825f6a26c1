"""Command-line interface.

Subcommands: sample-scenes, preview, realize, evaluate, mine,
benchmark-outpaint, sim2real, report, serve.  Exit codes: 0 success,
1 configuration error, 2 partial failures above threshold, 3 service
unreachable.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .errors import ConfigError, ServiceUnavailable
from .metrics.mms import DEFAULT_THRESHOLDS, MmsConfig, reports_to_csv, reports_to_text
from .pipeline.benchmark import BenchmarkSpec, benchmark_outpainting, benchmark_table
from .pipeline.evaluate import DetectorSet, evaluate_detectors, fold_records
from .pipeline.mining import (DEFAULT_MIN_SUPPORT, mine_systematic_errors,
                              report_to_text)
from .pipeline.realize import preview_scene, realize_scene
from .pipeline.sim2real import (RealFrame, Sim2RealSpec, averaged_spearman,
                                real_occlusion_run, synthetic_occlusion_curves)
from .pipeline.storage import ResultLog, RunManifest, write_manifest, write_text
from .scene import SceneSampler, dumps_scene, loads_scene
from .services.client import load_endpoints_config, remote_bundle
from .services.mock import MockDetectorProfile, MockDetectService, mock_bundle

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2
EXIT_UNREACHABLE = 3

FAILURE_THRESHOLD = 0.05  # tolerated fraction of failed scene evaluations


def _bundle_from_args(args):
    if args.endpoints == "mock":
        return mock_bundle()
    config = load_endpoints_config(args.endpoints)
    return remote_bundle(config)


def _mock_detectors(names):
    profiles = {
        "mock-strong": MockDetectorProfile(name="mock-strong", default_base=0.95,
                                           occlusion_curve=((0.0, 1.0), (1.0, 0.7))),
        "mock-weak": MockDetectorProfile(name="mock-weak", default_base=0.7,
                                         occlusion_curve=((0.0, 1.0), (1.0, 0.2))),
        "mock-mid": MockDetectorProfile(name="mock-mid", default_base=0.85,
                                        occlusion_curve=((0.0, 1.0), (1.0, 0.4))),
    }
    chosen = names or list(profiles)
    return {n: MockDetectService(profiles.get(n, MockDetectorProfile(name=n)))
            for n in chosen}


def _load_scenes(paths):
    scenes = []
    for p in paths:
        scenes.append(loads_scene(Path(p).read_text(encoding="utf-8")))
    return scenes


def _scene_paths(scene_arg) -> list[Path]:
    path = Path(scene_arg)
    if path.is_dir():
        return sorted(path.glob("*.json"))
    return [path]


def cmd_sample_scenes(args) -> int:
    sampler = SceneSampler(seed=args.sampler_seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seeds = tuple(range(args.seeds))
    for i in range(args.scenes):
        scene = sampler.sample_scene(args.cars, seeds=seeds).with_id(f"scene-{i:05d}")
        (out / f"{scene.scene_id}.json").write_text(dumps_scene(scene),
                                                    encoding="utf-8")
    print(f"wrote {args.scenes} scene files to {out}")
    return EXIT_OK


def cmd_preview(args) -> int:
    scenes = _load_scenes(_scene_paths(args.scenes))
    for scene in scenes:
        print(json.dumps(preview_scene(scene), indent=2))
    return EXIT_OK


def cmd_realize(args) -> int:
    bundle = _bundle_from_args(args)
    scenes = _load_scenes(_scene_paths(args.scenes))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    from PIL import Image
    for scene in scenes:
        for seed in scene.seeds:
            realized = realize_scene(scene, seed, bundle)
            stem = f"{scene.scene_id}_{seed}"
            Image.fromarray(realized.image).save(out / f"{stem}.png")
            (out / f"{stem}.sidecar.json").write_text(
                json.dumps(realized.sidecar, indent=2, sort_keys=True) + "\n",
                encoding="utf-8")
    print(f"realized {len(scenes)} scenes into {out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    bundle = _bundle_from_args(args)
    scenes = _load_scenes(_scene_paths(args.scenes))
    cfg = MmsConfig(thresholds=tuple(args.thresholds), nms_iou=args.nms_iou)
    detector_set = DetectorSet(_mock_detectors(args.detectors)
                               if args.endpoints == "mock"
                               else {"remote": bundle.detect})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log = ResultLog(out / "results.jsonl") if (args.resume or args.out) else None
    manifest = RunManifest(run_id=args.run_id, scene_count=len(scenes),
                           seeds=tuple(scenes[0].seeds) if scenes else (),
                           mms_config=cfg, endpoints=args.endpoints,
                           prompt_template=scenes[0].prompt_template
                           if scenes else "")
    for name, detector in detector_set.detectors.items():
        health = getattr(detector, "health", None)
        if callable(health):
            try:
                manifest.model_fingerprints[name] = \
                    health().get("model_fingerprint", "unknown")
            except ServiceUnavailable:
                manifest.model_fingerprints[name] = "unreachable"
    run = evaluate_detectors(scenes, detector_set, bundle, cfg,
                             result_log=log, run_id=args.run_id)
    manifest.failure_count = run.failure_count
    manifest.completeness = run.completeness
    manifest.completed_at = time.time()
    write_manifest(manifest, out)
    for grouping, reports in run.group_reports.items():
        write_text(reports_to_csv(reports, annotate=True),
                   out / f"groups_{grouping}.csv")
        write_text(reports_to_text(reports), out / f"groups_{grouping}.txt")
    summary = {"mms_full": run.mms_full, "mms_at_0.5": run.mms_at_05,
               "completeness": run.completeness}
    write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
               out / "summary.json")
    print(json.dumps(summary, indent=2, sort_keys=True))
    if run.completeness < 1.0 - FAILURE_THRESHOLD:
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_mine(args) -> int:
    records = ResultLog(Path(args.results)).records()
    cfg = MmsConfig(thresholds=tuple(args.thresholds), nms_iou=args.nms_iou)
    run = fold_records(records, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for detector, evals in run.evaluations.items():
        report = mine_systematic_errors(evals, run.scene_mms[detector],
                                        min_support=args.min_support,
                                        detector=detector)
        text = report_to_text(report)
        write_text(text, out / f"mining_{detector}.txt")
        print(text)
    return EXIT_OK


def cmd_benchmark_outpaint(args) -> int:
    scenes = _load_scenes(_scene_paths(args.scenes))
    methods = {
        "perfect": mock_bundle(),
        "dilating": mock_bundle(corruption="dilate"),
        "recoloring": mock_bundle(corruption="recolor"),
    }
    if args.endpoints != "mock":
        config = load_endpoints_config(args.endpoints)
        methods["remote"] = remote_bundle(config)
    spec = BenchmarkSpec(methods=methods, scenes=scenes)
    results = benchmark_outpainting(spec)
    table = benchmark_table(results)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_text(table, out / "benchmark.txt")
    print(table)
    return EXIT_OK


def cmd_sim2real(args) -> int:
    from PIL import Image
    frames = []
    frame_dir = Path(args.frames)
    for img_path in sorted(frame_dir.glob("*_image.png")):
        stem = img_path.name.removesuffix("_image.png")
        image = np.array(Image.open(img_path).convert("RGB"))
        moving = np.array(Image.open(
            frame_dir / f"{stem}_moving.png").convert("L")) >= 128
        static = np.array(Image.open(
            frame_dir / f"{stem}_static.png").convert("L")) >= 128
        frames.append(RealFrame(stem, image, moving, static))
    if not frames:
        raise ConfigError(f"no frames found under {frame_dir}")
    detectors = _mock_detectors(args.detectors)
    spec = Sim2RealSpec(frames=frames, detectors=detectors)
    real_curves = real_occlusion_run(spec, nms_iou=args.nms_iou)
    records = ResultLog(Path(args.results)).records()
    run = fold_records(records, MmsConfig(nms_iou=args.nms_iou))
    syn_curves = synthetic_occlusion_curves(run.evaluations, run.scene_mms)
    avg, per_bin = averaged_spearman(syn_curves, real_curves)
    result = {"averaged_spearman": avg, "per_bin": per_bin}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_text(json.dumps(result, indent=2) + "\n", out / "sim2real.json")
    print(json.dumps(result, indent=2))
    return EXIT_OK


def cmd_report(args) -> int:
    records = ResultLog(Path(args.results)).records()
    run = fold_records(records, MmsConfig(thresholds=tuple(args.thresholds),
                                          nms_iou=args.nms_iou))
    lines = ["detector  MMS@[0.50:0.95]  MMS@[0.50]"]
    for name in sorted(run.mms_full):
        lines.append(f"{name}  {run.mms_full[name]:.4f}  {run.mms_at_05[name]:.4f}")
    print("\n".join(lines))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_text("\n".join(lines) + "\n", out / "mms_summary.txt")
        for grouping, reports in run.group_reports.items():
            write_text(reports_to_csv(reports, annotate=True),
                       out / f"groups_{grouping}.csv")
            write_text(reports_to_text(reports), out / f"groups_{grouping}.txt")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .pipeline.server import build_server_app
    bundle = _bundle_from_args(args)
    detectors = _mock_detectors(args.detectors) if args.endpoints == "mock" \
        else {"remote": bundle.detect}
    app = build_server_app(bundle, detectors=detectors)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bev2ego",
        description="BEV scene composition, EGO realization, and "
                    "detector error mining")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenes=True):
        if scenes:
            p.add_argument("--scenes", required=True,
                           help="scene file or directory of scene files")
        p.add_argument("--endpoints", default="mock",
                       help="endpoints config file, or 'mock'")
        p.add_argument("--nms-iou", type=float, default=0.7)
        p.add_argument("--thresholds", type=float, nargs="+",
                       default=list(DEFAULT_THRESHOLDS))
        p.add_argument("--out", default="out")
        p.add_argument("--detectors", nargs="*", default=None)

    p = sub.add_parser("sample-scenes", help="emit scene files")
    p.add_argument("--scenes", type=int, default=1200, dest="scenes")
    p.add_argument("--seeds", type=int, default=9)
    p.add_argument("--cars", type=int, default=2, choices=(1, 2, 3))
    p.add_argument("--sampler-seed", type=int, default=0)
    p.add_argument("--out", default="scenes")
    p.set_defaults(func=cmd_sample_scenes)

    p = sub.add_parser("preview", help="geometry-only projection")
    p.add_argument("--scenes", required=True)
    p.set_defaults(func=cmd_preview)

    p = sub.add_parser("realize", help="render scene images")
    common(p)
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("evaluate", help="score detectors over scenes")
    common(p)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--run-id", default="run-0")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("mine", help="rank systematic-error groups")
    p.add_argument("--results", required=True, help="results.jsonl path")
    p.add_argument("--min-support", type=int, default=DEFAULT_MIN_SUPPORT)
    p.add_argument("--nms-iou", type=float, default=0.7)
    p.add_argument("--thresholds", type=float, nargs="+",
                   default=list(DEFAULT_THRESHOLDS))
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("benchmark-outpaint", help="compare outpainting methods")
    common(p)
    p.set_defaults(func=cmd_benchmark_outpaint)

    p = sub.add_parser("sim2real", help="occlusion study on real composites")
    p.add_argument("--frames", required=True,
                   help="directory of *_image.png / *_moving.png / *_static.png")
    p.add_argument("--results", required=True,
                   help="synthetic results.jsonl for the synthetic side")
    p.add_argument("--nms-iou", type=float, default=0.7)
    p.add_argument("--detectors", nargs="*", default=None)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_sim2real)

    p = sub.add_parser("report", help="emit CSV/text tables from results")
    p.add_argument("--results", required=True)
    p.add_argument("--nms-iou", type=float, default=0.7)
    p.add_argument("--thresholds", type=float, nargs="+",
                   default=list(DEFAULT_THRESHOLDS))
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="run the composer HTTP service")
    p.add_argument("--endpoints", default="mock")
    p.add_argument("--detectors", nargs="*", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ServiceUnavailable as exc:
        print(f"service unreachable: {exc}", file=sys.stderr)
        return EXIT_UNREACHABLE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
