"""Replica orchestration, the prebuilt experiment suites and run manifests.

Every run lands in ``<out>/<suite>/<point>/<replica>/`` and the suite
directory gets a ``manifest.json`` recording the resolved config of each run,
so any run can be re-executed from the manifest alone.
"""

from __future__ import annotations

import itertools
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .config import SimConfig
from .engine import run
from .errors import ConfigError
from .export import FINAL_DOT, METRICS_CSV, SUMMARY_JSON, TRAJECTORY_CSV, export_csv

SUITES = ("verification", "composition", "density", "resistance")
MANIFEST = "manifest.json"
RUN_FILES = (METRICS_CSV, TRAJECTORY_CSV, FINAL_DOT, SUMMARY_JSON)

BASE = SimConfig(nodes=75, K=4, type_dist=(1 / 3, 1 / 3, 1 / 3), saturation=0.15, steps=100, seed=0)
MIXES = {
    "34-33-33": (0.34, 0.33, 0.33),
    "50-25-25": (0.50, 0.25, 0.25),
    "60-20-20": (0.60, 0.20, 0.20),
    "70-15-15": (0.70, 0.15, 0.15),
}


def suite_points(name: str, base: SimConfig = BASE) -> dict[str, SimConfig]:
    """Named sweep points of a prebuilt suite, in run order."""
    if name == "verification":
        mixes = {
            "hom": (1, 0, 0), "het": (0, 1, 0), "adv": (0, 0, 1),
            "hom-adv": (0.5, 0, 0.5), "hom-het": (0.5, 0.5, 0), "het-adv": (0, 0.5, 0.5),
        }
        return {k: base.with_(type_dist=v) for k, v in mixes.items()}
    if name == "composition":
        return {
            k: base.with_(type_dist=v, saturation=0.15, upd_thresh=0.0, res_overrides={})
            for k, v in MIXES.items()
        }
    if name == "density":
        return {
            f"sat-{s}": base.with_(type_dist=MIXES["34-33-33"], saturation=s)
            for s in (0.05, 0.1, 0.15, 0.2, 0.25)
        }
    if name == "resistance":
        return {
            f"{mix}_res-{r}": base.with_(type_dist=MIXES[mix], res_overrides={"het": r})
            for mix in ("34-33-33", "50-25-25")
            for r in (0.0, 0.25, 0.5)
        }
    raise ConfigError({"suite": f"must be one of {SUITES}, got {name!r}"})


@dataclass
class ExperimentSpec:
    base: SimConfig
    replicas: int = 1
    seed_base: int = 0
    sweep: list[tuple[str, list]] = field(default_factory=list)
    suite: str | None = None

    def validate(self) -> None:
        p = {}
        if not isinstance(self.replicas, int) or self.replicas < 1:
            p["replicas"] = f"need at least 1, got {self.replicas!r}"
        if not isinstance(self.seed_base, int) or self.seed_base < 0:
            p["seed_base"] = f"non-negative integer required, got {self.seed_base!r}"
        known = {f.name for f in fields(SimConfig)} - {"seed"}
        for name, values in self.sweep:
            if name not in known:
                p[f"sweep.{name}"] = "not a sweepable config field"
            elif not values:
                p[f"sweep.{name}"] = "no values"
        if self.suite is not None and self.suite not in SUITES:
            p["suite"] = f"must be one of {SUITES}, got {self.suite!r}"
        if p:
            raise ConfigError(p)

    @property
    def label(self) -> str:
        return self.suite or "run"

    def points(self) -> dict[str, SimConfig]:
        """Sweep points (suite points crossed with the explicit sweep)."""
        self.validate()
        start = suite_points(self.suite, self.base) if self.suite else {"base": self.base}
        if not self.sweep:
            return start
        out = {}
        names = [n for n, _ in self.sweep]
        for pname, cfg in start.items():
            for combo in itertools.product(*(v for _, v in self.sweep)):
                tag = ",".join(f"{n}={v}" for n, v in zip(names, combo))
                key = tag if pname == "base" else f"{pname}_{tag}"
                out[key] = cfg.with_(**dict(zip(names, combo)))
        return out

    def runs(self) -> list[dict]:
        return [
            {
                "suite": self.label,
                "point": point,
                "replica": r,
                "seed": self.seed_base + r,
                "config": cfg.with_(seed=self.seed_base + r).to_dict(),
            }
            for point, cfg in self.points().items()
            for r in range(self.replicas)
        ]


@dataclass
class RunManifest:
    root: Path  # directory holding manifest.json; run paths are relative to it
    suite: str
    replicas: int
    seed_base: int
    runs: list[dict]
    version: str = __version__

    @property
    def path(self) -> Path:
        return self.root / MANIFEST

    def to_json(self) -> dict:
        return {
            "tool": "opinionnet",
            "version": self.version,
            "suite": self.suite,
            "replicas": self.replicas,
            "seed_base": self.seed_base,
            "layout": "<suite>/<point>/<replica>/{" + ",".join(RUN_FILES) + "}",
            "runs": self.runs,
        }

    def write(self) -> Path:
        self.path.write_text(json.dumps(self.to_json(), sort_keys=True, indent=1) + "\n", encoding="utf-8")
        return self.path

    @classmethod
    def load(cls, path) -> "RunManifest":
        path = Path(path)
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise OSError(f"cannot read manifest {path}: {e.strerror or e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError({"manifest": f"{path}: invalid JSON ({e})"}) from None
        if not isinstance(obj, dict) or "runs" not in obj:
            raise ConfigError({"manifest": f"{path}: no runs listed"})
        return cls(path.parent, obj.get("suite", "run"), obj.get("replicas", 0),
                   obj.get("seed_base", 0), obj["runs"], obj.get("version", "unknown"))


def _ensure_writable(d: Path) -> None:
    try:
        d.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=d, prefix=".probe-"):
            pass
    except OSError as e:
        raise OSError(f"output directory {d} is not writable: {e.strerror or e}") from e


def execute_run(record: dict, root) -> dict[str, str]:
    """Run one manifest record and write its files under ``root``."""
    cfg = SimConfig.from_dict(record["config"])
    d = Path(root) / record["dir"]
    export_csv(run(cfg), d)
    return {name: str(Path(record["dir"]) / name) for name in RUN_FILES}


def run_suite(spec: ExperimentSpec, out, workers: int = 1) -> RunManifest:
    """Execute every (sweep point, replica) run and write the manifest.

    The output directory is checked for writability before any run starts.
    """
    runs = spec.runs()
    root = Path(out) / spec.label
    _ensure_writable(root)
    for rec in runs:
        rec["dir"] = f"{rec['point']}/{rec['replica']}"
    if workers > 1 and len(runs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            files = list(pool.map(execute_run, runs, itertools.repeat(root)))
    else:
        files = [execute_run(rec, root) for rec in runs]
    for rec, f in zip(runs, files):
        rec["files"] = f
    manifest = RunManifest(root, spec.label, spec.replicas, spec.seed_base, runs)
    manifest.write()
    return manifest


def rerun(manifest: RunManifest, out=None) -> RunManifest:
    """Re-execute every run of ``manifest`` into ``out`` (default: in place)."""
    root = Path(out) if out is not None else manifest.root
    _ensure_writable(root)
    runs = [dict(rec) for rec in manifest.runs]
    for rec in runs:
        rec["files"] = execute_run(rec, root)
    m = RunManifest(root, manifest.suite, manifest.replicas, manifest.seed_base, runs)
    m.write()
    return m


def _mean(xs):
    xs = [x for x in xs if x is not None]
    return float(np.mean(xs)) if xs else None


def summarize(manifest) -> dict:
    """Aggregate per-run summaries by sweep point.

    Only the summary files named in the manifest are read.
    """
    if not isinstance(manifest, RunManifest):
        manifest = RunManifest.load(manifest)
    if not manifest.runs:
        raise ConfigError({"manifest": "no runs listed"})
    missing = []
    for rec in manifest.runs:
        for name in rec.get("files", {}).values() or [None]:
            if name is None or not (manifest.root / name).is_file():
                missing.append(str(manifest.root / name) if name else f"{rec.get('dir')} (no files recorded)")
    if missing:
        raise FileNotFoundError("missing run files:\n  " + "\n  ".join(missing))

    by_point: dict[str, list[dict]] = {}
    for rec in manifest.runs:
        text = (manifest.root / rec["files"][SUMMARY_JSON]).read_text(encoding="utf-8")
        by_point.setdefault(rec["point"], []).append(json.loads(text))

    out = {}
    for point, sums in by_point.items():
        flag_names = [k for k, v in sums[0]["flags"].items() if isinstance(v, bool)]
        archs = sorted({a for s in sums for a in s["final"]["isolates_by_archetype"]})
        out[point] = {
            "replicas": len(sums),
            "flag_fractions": {f: sum(bool(s["flags"][f]) for s in sums) / len(sums) for f in flag_names},
            "mean_final_density": _mean(s["final"]["density"] for s in sums),
            "mean_isolates_by_archetype": {
                a: _mean(s["final"]["isolates_by_archetype"].get(a, 0) for s in sums) for a in archs
            },
            "mean_het_betweenness_t50": _mean(s["het_betweenness_mean_t50"] for s in sums),
        }
    return {"suite": manifest.suite, "version": manifest.version, "points": out}


def default_workers() -> int:
    return max(1, min(os.cpu_count() or 1, 8))
