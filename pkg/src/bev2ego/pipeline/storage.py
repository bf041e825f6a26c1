"""Run persistence: manifest, append-only result log, derived reports.

The result log is line-delimited JSON with a header record carrying the
schema version; one record per (scene, seed, detector).  Resuming a run
skips records already present.  Records carry no timestamps so that two
identical runs produce byte-identical logs.
"""

from __future__ import annotations

import dataclasses
import json
import time
from pathlib import Path

from .. import __version__
from ..errors import SchemaError
from ..metrics.mms import MmsConfig

RESULTS_SCHEMA = "results/v1"
MANIFEST_SCHEMA = "manifest/v1"


@dataclasses.dataclass
class RunManifest:
    run_id: str
    scene_count: int
    seeds: tuple[int, ...]
    mms_config: MmsConfig
    endpoints: str            # "mock" or the endpoints file path
    prompt_template: str
    code_version: str = __version__
    results_schema: str = RESULTS_SCHEMA
    started_at: float = dataclasses.field(default_factory=time.time)
    completed_at: float | None = None
    failure_count: int = 0
    completeness: float = 1.0
    model_fingerprints: dict = dataclasses.field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema": MANIFEST_SCHEMA,
            "run_id": self.run_id,
            "scene_count": self.scene_count,
            "seeds": list(self.seeds),
            "mms_config": {
                "thresholds": list(self.mms_config.thresholds),
                "nms_iou": self.mms_config.nms_iou,
                "target_class": self.mms_config.target_class,
                "seeds_per_scene": self.mms_config.seeds_per_scene,
            },
            "endpoints": self.endpoints,
            "prompt_template": self.prompt_template,
            "code_version": self.code_version,
            "results_schema": self.results_schema,
            "started_at": self.started_at,
            "completed_at": self.completed_at,
            "failure_count": self.failure_count,
            "completeness": self.completeness,
            "model_fingerprints": dict(self.model_fingerprints),
        }


class ResultLog:
    """Append-only JSONL store keyed by (scene_id, seed, detector)."""

    def __init__(self, path: Path | str):
        self.path = Path(path)
        self._keys: set[tuple[str, int, str]] = set()
        if self.path.exists():
            self._load_existing()
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "w", encoding="utf-8") as fh:
                fh.write(json.dumps({"schema": RESULTS_SCHEMA}) + "\n")

    def _load_existing(self):
        with open(self.path, encoding="utf-8") as fh:
            header = fh.readline()
            if json.loads(header).get("schema") != RESULTS_SCHEMA:
                raise SchemaError(f"result log {self.path} has a foreign schema")
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    self._keys.add(self._key(rec))

    @staticmethod
    def _key(record: dict) -> tuple[str, int, str]:
        return record["scene_id"], record["seed"], record["detector"]

    def __contains__(self, key: tuple[str, int, str]) -> bool:
        return key in self._keys

    def __len__(self) -> int:
        return len(self._keys)

    def append(self, record: dict):
        key = self._key(record)
        if key in self._keys:
            return
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
        self._keys.add(key)

    def records(self) -> list[dict]:
        out = []
        with open(self.path, encoding="utf-8") as fh:
            fh.readline()
            for line in fh:
                if line.strip():
                    out.append(json.loads(line))
        return out


def write_manifest(manifest: RunManifest, out_dir: Path | str) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_text(content: str, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(content)
    return path
