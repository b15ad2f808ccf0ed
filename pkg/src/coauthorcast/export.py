"""Artifact files: metadata headers and CSV round-trips for pipeline data.

Every CSV artifact starts with one comment line
``# coauthorcast stage=<stage> config_sha256=<hash> seed=<seed>``; JSON
artifacts carry the same fields under a top-level ``"meta"`` key.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from coauthorcast import __version__
from coauthorcast.corpus import AuthorTimeline
from coauthorcast.errors import ConfigError
from coauthorcast.predict import Forecast


@dataclass(frozen=True)
class ArtifactMeta:
    stage: str
    config_sha256: str
    seed: int

    def header(self) -> str:
        return (f"# coauthorcast stage={self.stage} config_sha256={self.config_sha256} "
                f"seed={self.seed}\n")

    def to_dict(self) -> dict:
        return {"tool": "coauthorcast", "version": __version__, "stage": self.stage,
                "config_sha256": self.config_sha256, "seed": self.seed}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return None if math.isnan(obj) or math.isinf(obj) else obj
    return obj


def write_csv(path: Path, text: str, meta: ArtifactMeta) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(meta.header())
        fh.write(text)
    return path


def write_json(path: Path, payload: dict, meta: ArtifactMeta) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"meta": meta.to_dict(), **_jsonable(payload)}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(body, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return path


def read_text(path: Path) -> str:
    """Artifact body without its comment header."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"missing artifact {path}; run the producing stage first")
    lines = path.read_text(encoding="utf-8").splitlines(keepends=True)
    return "".join(ln for ln in lines if not ln.startswith("#"))


def read_json(path: Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"missing artifact {path}; run the producing stage first")
    return json.loads(path.read_text(encoding="utf-8"))


def _rows(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def timelines_to_csv(timelines) -> str:
    out = io.StringIO()
    out.write("author,year,pubs,new_coauthors\n")
    for tl in timelines.values():
        for y, n in tl.pubs_by_year.items():
            out.write(f"{tl.author},{y},{n},{tl.new_coauthors_by_year.get(y, 0)}\n")
    return out.getvalue()


def timelines_from_csv(text: str) -> dict[str, AuthorTimeline]:
    pubs: dict[str, dict[int, int]] = {}
    new: dict[str, dict[int, int]] = {}
    for row in _rows(text):
        a, y = row["author"], int(row["year"])
        pubs.setdefault(a, {})[y] = int(row["pubs"])
        if int(row["new_coauthors"]):
            new.setdefault(a, {})[y] = int(row["new_coauthors"])
    out = {}
    for a in sorted(pubs):
        yearly = dict(sorted(pubs[a].items()))
        out[a] = AuthorTimeline(author=a, pubs_by_year=yearly,
                                new_coauthors_by_year=dict(sorted(new.get(a, {}).items())),
                                first_year=next(iter(yearly)))
    return out


def forecasts_to_csv(forecasts) -> str:
    out = io.StringIO()
    out.write("author,year,mean_h,mean_k,q05_k,q95_k\n")
    for f in forecasts:
        for c, y in enumerate(f.years):
            out.write(f"{f.author},{int(y)},{float(f.mean_h[c])!r},{float(f.mean_k[c])!r},"
                      f"{float(f.q05_k[c])!r},{float(f.q95_k[c])!r}\n")
    return out.getvalue()


def forecast_replicates_csv(forecasts, replicates=None) -> str:
    """Per-replicate trajectories; only replicate 0 unless ``replicates`` says otherwise."""
    out = io.StringIO()
    out.write("author,replicate,year,h,k\n")
    for f in forecasts:
        reps = range(f.h.shape[0]) if replicates is None else replicates
        for r in reps:
            for c, y in enumerate(f.years):
                out.write(f"{f.author},{r},{int(y)},{int(f.h[r, c])},{int(f.k[r, c])}\n")
    return out.getvalue()


def forecasts_from_csv(summary: str, trajectories: str, replicates: int, seed: int) -> list[Forecast]:
    """Rebuild forecasts from the summary CSV and a replicate dump."""
    stats: dict[str, list] = {}
    for row in _rows(summary):
        stats.setdefault(row["author"], []).append(
            (int(row["year"]), float(row["mean_h"]), float(row["mean_k"]),
             float(row["q05_k"]), float(row["q95_k"])))
    paths: dict[str, dict[int, dict[int, tuple[int, int]]]] = {}
    for row in _rows(trajectories):
        paths.setdefault(row["author"], {}).setdefault(int(row["replicate"]), {})[
            int(row["year"])] = (int(row["h"]), int(row["k"]))
    out = []
    for author, rows in stats.items():
        rows.sort()
        years = np.array([r[0] for r in rows])
        reps = paths.get(author, {})
        order = sorted(reps)
        h = np.array([[reps[r][y][0] for y in years] for r in order], dtype=np.int64)
        k = np.array([[reps[r][y][1] for y in years] for r in order], dtype=np.int64)
        col = np.array(rows, dtype=float).T
        out.append(Forecast(author, years, h.reshape(len(order), len(years)),
                            k.reshape(len(order), len(years)), replicates, seed,
                            mean_h=col[1], mean_k=col[2], q05_k=col[3], q95_k=col[4]))
    return out
