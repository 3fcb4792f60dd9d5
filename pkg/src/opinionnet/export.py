"""File formats: DOT topology, edge lists, metric and trajectory CSVs, run summaries.

All writers produce byte-identical output for equal inputs: fixed column
order, sorted keys, ``\\n`` line endings and shortest round-trip floats.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .graph import SocialGraph
from .metrics import CSV_HEADER, BETWEENNESS_NORMALIZATION
from .model import Archetype

METRICS_CSV = "metrics.csv"
TRAJECTORY_CSV = "trajectory.csv"
FINAL_DOT = "final.dot"
SUMMARY_JSON = "summary.json"


def to_dot(graph: SocialGraph, archetypes, profile) -> str:
    lines = ["graph social {"]
    for i in range(graph.n):
        ops = ",".join(str(int(x)) for x in profile[i])
        lines.append(f'  {i} [archetype="{Archetype(archetypes[i]).value}", opinions="{ops}"];')
    for i, j in graph.edges():
        lines.append(f"  {i} -- {j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_edge_list(graph: SocialGraph) -> str:
    """One ``i j w_ij w_ji`` line per edge."""
    return "".join(
        f"{i} {j} {float(graph.weights[i, j])!r} {float(graph.weights[j, i])!r}\n" for i, j in graph.edges()
    )


def read_edge_list(text: str, n: int) -> SocialGraph:
    g = SocialGraph(n)
    for line in text.splitlines():
        if line.strip():
            i, j, w_ij, w_ji = line.split()
            g.add_edge(int(i), int(j), float(w_ij), float(w_ji))
    return g


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def metrics_csv(result) -> str:
    return _csv_text(CSV_HEADER, (f.csv_row() for f in result.frames))


def trajectory_csv(result) -> str:
    K = result.trajectory.shape[2]
    header = ["t", "node", "archetype"] + [f"k{k}" for k in range(K)]
    types = [a.value for a in result.archetypes]
    rows = (
        [t, i, types[i], *result.trajectory[t, i].tolist()]
        for t in range(result.trajectory.shape[0])
        for i in range(result.trajectory.shape[1])
    )
    return _csv_text(header, rows)


def run_summary(result) -> dict:
    """Outcome flags and final measurements for one run."""
    final = result.frames[-1]
    flags = result.flags()
    deg = result.final.graph.degree()
    isolates = {
        a.value: int(sum(1 for i, t in enumerate(result.archetypes) if t == a and deg[i] == 0))
        for a in set(result.archetypes)
    }
    het_btw = [f.per_type_betweenness[Archetype.HET][0] for f in result.frames[50:]
               if Archetype.HET in f.per_type_betweenness]
    return {
        "config": result.config.to_dict(),
        "flags": {**flags.to_json(), "fully_disconnected": final.isolate_count == result.config.nodes},
        "final": {
            "density": final.density,
            "component_sizes": final.component_sizes,
            "isolates": final.isolate_count,
            "isolates_by_archetype": dict(sorted(isolates.items())),
            "distinct_opinions": final.distinct_opinions,
            "largest_component_camps": len(final.camps[0]) if final.camps else 0,
        },
        "het_betweenness_mean_t50": float(np.mean(het_btw)) if het_btw else None,
        "betweenness_normalization": BETWEENNESS_NORMALIZATION,
    }


def export_dot(state, path) -> Path:
    path = Path(path)
    _write(path, to_dot(state.graph, state.archetypes, state.profile))
    return path


def export_csv(result, directory) -> dict[str, Path]:
    """Write metrics.csv, trajectory.csv, final.dot and summary.json into ``directory``."""
    d = Path(directory)
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create {d}: {e.strerror or e}") from e
    files = {
        METRICS_CSV: metrics_csv(result),
        TRAJECTORY_CSV: trajectory_csv(result),
        SUMMARY_JSON: json.dumps(run_summary(result), sort_keys=True, indent=1) + "\n",
    }
    out = {}
    for name, text in files.items():
        _write(d / name, text)
        out[name] = d / name
    out[FINAL_DOT] = export_dot(result.final, d / FINAL_DOT)
    return out


def result_json(result) -> str:
    return json.dumps(result.to_json(), sort_keys=True)
