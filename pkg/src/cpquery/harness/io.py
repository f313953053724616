"""Scenario documents (JSON) and trace/report CSV files."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..motion import Scenario, Trajectory
from ..schemes.trace import KINDS, QueryTrace, SchemeConfig


class ScenarioFormatError(ValueError):
    """Schema violation; ``path`` names the offending field."""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class ReportSpec:
    sample_dt: float | None = None
    windows: list[tuple[float, float]] | None = None
    shift_fraction: float = 2.0**-10

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"shift_fraction": self.shift_fraction}
        if self.sample_dt is not None:
            out["sample_dt"] = self.sample_dt
        if self.windows is not None:
            out["windows"] = [list(w) for w in self.windows]
        return out


@dataclass
class ScenarioDocument:
    scenario: Scenario
    scheme: SchemeConfig | None = None
    report: ReportSpec = field(default_factory=ReportSpec)


def _number(v: Any, path: str, *, nonneg: bool = False) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioFormatError(path, f"expected a number, got {type(v).__name__}")
    v = float(v)
    if not math.isfinite(v):
        raise ScenarioFormatError(path, "must be finite")
    if nonneg and v < 0:
        raise ScenarioFormatError(path, "must be nonnegative")
    return v


def _require(doc: dict, key: str, path: str) -> Any:
    if key not in doc:
        raise ScenarioFormatError(f"{path}{key}", "missing required field")
    return doc[key]


def _parse_entity(ent: Any, k: int, dim: int) -> Trajectory:
    path = f"entities[{k}]"
    if not isinstance(ent, dict):
        raise ScenarioFormatError(path, "expected an object")
    if "id" in ent and ent["id"] != k:
        raise ScenarioFormatError(f"{path}.id", f"must equal its position {k}")
    wps = _require(ent, "waypoints", path + ".")
    if not isinstance(wps, list) or not wps:
        raise ScenarioFormatError(f"{path}.waypoints", "expected a nonempty list")
    times, points = [], []
    for j, wp in enumerate(wps):
        wpath = f"{path}.waypoints[{j}]"
        if not isinstance(wp, list) or len(wp) != 2 or not isinstance(wp[1], list):
            raise ScenarioFormatError(wpath, "expected [t, [coords]]")
        t = _number(wp[0], wpath, nonneg=True)
        if len(wp[1]) != dim:
            raise ScenarioFormatError(wpath, f"expected {dim} coordinates, got {len(wp[1])}")
        coords = [_number(c, wpath) for c in wp[1]]
        if times and t <= times[-1]:
            raise ScenarioFormatError(wpath, "waypoint times must be strictly increasing")
        times.append(t)
        points.append(coords)
    return Trajectory(np.array(times), np.array(points))


def _parse_scheme(doc: Any) -> SchemeConfig:
    if not isinstance(doc, dict):
        raise ScenarioFormatError("scheme", "expected an object")
    kind = _require(doc, "kind", "scheme.")
    if kind not in KINDS:
        raise ScenarioFormatError("scheme.kind", f"unknown kind {kind!r}")
    x = _require(doc, "x", "scheme.")
    if isinstance(x, bool) or not isinstance(x, int) or x < 1:
        raise ScenarioFormatError("scheme.x", "expected a positive integer")
    beta = _number(doc.get("beta", 0.0), "scheme.beta", nonneg=True)
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ScenarioFormatError("scheme.params", "expected an object")
    tt = doc.get("target_time")
    tt = None if tt is None else _number(tt, "scheme.target_time", nonneg=True)
    cfg = SchemeConfig(kind=kind, x=x, beta=beta, target_time=tt, params=dict(params))
    try:
        cfg.bound
    except ValueError as exc:
        raise ScenarioFormatError("scheme.beta", str(exc)) from None
    return cfg


def _parse_report(doc: Any) -> ReportSpec:
    if not isinstance(doc, dict):
        raise ScenarioFormatError("report", "expected an object")
    spec = ReportSpec()
    if doc.get("sample_dt") is not None:
        spec.sample_dt = _number(doc["sample_dt"], "report.sample_dt")
        if spec.sample_dt <= 0:
            raise ScenarioFormatError("report.sample_dt", "must be positive")
    if doc.get("windows") is not None:
        wins = []
        for k, w in enumerate(doc["windows"]):
            p = f"report.windows[{k}]"
            if not isinstance(w, list) or len(w) != 2:
                raise ScenarioFormatError(p, "expected [t_start, t_end]")
            a, b = _number(w[0], p, nonneg=True), _number(w[1], p, nonneg=True)
            if b <= a:
                raise ScenarioFormatError(p, "window end must follow its start")
            wins.append((a, b))
        spec.windows = wins
    if "shift_fraction" in doc:
        spec.shift_fraction = _number(doc["shift_fraction"], "report.shift_fraction", nonneg=True)
    return spec


def parse_document(doc: Any) -> ScenarioDocument:
    if not isinstance(doc, dict):
        raise ScenarioFormatError("$", "expected a JSON object")
    dim = _require(doc, "dim", "")
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise ScenarioFormatError("dim", "expected a positive integer")
    rho = _number(_require(doc, "rho", ""), "rho", nonneg=True)
    horizon = _number(_require(doc, "horizon", ""), "horizon", nonneg=True)
    ents = _require(doc, "entities", "")
    if not isinstance(ents, list):
        raise ScenarioFormatError("entities", "expected a list")
    trajs = [_parse_entity(e, k, dim) for k, e in enumerate(ents)]
    tt = doc.get("target_time")
    scn = Scenario(
        dim=dim,
        rho=rho,
        trajectories=trajs,
        horizon=horizon,
        enforce_disjoint=bool(doc.get("enforce_disjoint", True)),
        target_time=None if tt is None else _number(tt, "target_time", nonneg=True),
        expectations=dict(doc.get("expectations", {})),
        name=str(doc.get("name", "")),
    )
    scheme = _parse_scheme(doc["scheme"]) if doc.get("scheme") is not None else None
    report = _parse_report(doc["report"]) if doc.get("report") is not None else ReportSpec()
    return ScenarioDocument(scn, scheme, report)


def load_document(path: str | Path) -> ScenarioDocument:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError("$", f"invalid JSON: {exc}") from None
    return parse_document(doc)


def load_scenario(path: str | Path) -> Scenario:
    return load_document(path).scenario


def scenario_to_dict(
    scn: Scenario, scheme: SchemeConfig | None = None, report: ReportSpec | None = None
) -> dict[str, Any]:
    out: dict[str, Any] = {
        "name": scn.name,
        "dim": scn.dim,
        "rho": scn.rho,
        "enforce_disjoint": scn.enforce_disjoint,
        "horizon": scn.horizon,
        "target_time": scn.target_time,
        "entities": [{"id": k, "waypoints": [[t, p] for t, p in tr.waypoints()]} for k, tr in enumerate(scn.trajectories)],
    }
    if scn.expectations:
        out["expectations"] = scn.expectations
    if scheme is not None:
        out["scheme"] = scheme.to_dict()
    if report is not None:
        out["report"] = report.to_dict()
    return out


def save_scenario(
    scn: Scenario, path: str | Path, scheme: SchemeConfig | None = None, report: ReportSpec | None = None
) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scn, scheme, report), indent=2) + "\n")


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return repr(v)
    return str(v)


def write_csv(path: str | Path, header: list[str], rows: list[list[Any]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def save_trace(trace: QueryTrace, path: str | Path) -> None:
    write_csv(path, ["time", "entity_id"], [[float(t), int(i)] for t, i in zip(trace.times, trace.entities)])


def load_trace(path: str | Path) -> QueryTrace:
    trace = QueryTrace()
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            trace.add(float(row["time"]), int(row["entity_id"]))
    return trace
