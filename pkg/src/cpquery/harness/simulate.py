"""Replay query traces against true motion and measure what they achieve."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .. import congestion
from ..demand import InfiniteDemandError, phi_integral
from ..geometry import TOL
from ..motion import Scenario
from ..schemes.trace import QueryTrace
from .io import ReportSpec

MAX_SAMPLES = 20_000
# applicability threshold of the demand lower bound, per entity
RATIO_THRESHOLD = 1010.0

REPORT_HEADER = ["time", "degree", "ply", "ply_exact", "thickness", "thickness_exact"]
WINDOW_HEADER = ["t_start", "t_end", "queries", "min_granularity", "phi_integral", "ratio", "ratio_shifted"]


@dataclass
class Replay:
    """Uncertainty regions at each sample time: centers (S, n, d), radii (S, n)."""

    times: np.ndarray
    centers: np.ndarray
    radii: np.ndarray
    last: np.ndarray


def replay(scn: Scenario, trace: QueryTrace, times) -> Replay:
    """Regions implied by the trace, a query at t counting from t on."""
    ts = np.asarray(times, dtype=float)
    qt, qe = trace.as_arrays()
    s, n = len(ts), scn.n
    last = np.full((s, n), -np.inf)
    centers = np.full((s, n, scn.dim), np.nan)
    for i in range(n):
        mine = qt[qe == i]
        if len(mine) == 0:
            continue
        pos = scn.trajectories[i].positions_at(mine)
        idx = np.searchsorted(mine, ts, side="right") - 1
        ok = idx >= 0
        last[ok, i] = mine[idx[ok]]
        centers[ok, i] = pos[idx[ok]]
    with np.errstate(invalid="ignore"):
        radii = scn.rho + ts[:, None] - last
    radii[~np.isfinite(last)] = np.inf
    return Replay(ts, centers, radii, last)


def degree_series(rep: Replay, tol: float = TOL, chunk: int = 256) -> np.ndarray:
    """Uncertainty degree at every sample, computed a block of samples at a time."""
    out = np.empty(len(rep.times), dtype=int)
    n = rep.radii.shape[1] if rep.radii.ndim == 2 else 0
    if n == 0:
        out[:] = 0
        return out
    eye = np.eye(n, dtype=bool)
    for lo in range(0, len(rep.times), chunk):
        r = rep.radii[lo : lo + chunk]
        inf = ~np.isfinite(r)
        c = np.where(inf[:, :, None], 0.0, rep.centers[lo : lo + chunk])
        diff = c[:, :, None, :] - c[:, None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=-1))
        with np.errstate(invalid="ignore"):
            adj = dist <= r[:, :, None] + r[:, None, :] + tol
        adj |= inf[:, :, None] | inf[:, None, :] | eye
        out[lo : lo + chunk] = adj.sum(axis=2).max(axis=1)
    return out


def ply_series(rep: Replay, dim: int, tol: float = TOL) -> tuple[np.ndarray, bool]:
    vals, exact = [], True
    for k in range(len(rep.times)):
        p = congestion.ply(rep.centers[k], rep.radii[k], dim, tol)
        vals.append(p.value)
        exact &= p.exact
    return np.array(vals), exact


def true_positions(scn: Scenario, times) -> np.ndarray:
    return np.stack([scn.positions_at(float(t)) for t in times])


def _kth_separations(pos: np.ndarray, rho: float, x: int) -> np.ndarray:
    diff = pos[:, :, None, :] - pos[:, None, :, :]
    seps = np.sqrt((diff * diff).sum(axis=-1)) - 2.0 * rho
    n = pos.shape[1]
    seps[:, np.arange(n), np.arange(n)] = np.inf
    return np.partition(seps, x - 1, axis=2)[:, :, x - 1]


def sandwich_series(scn: Scenario, rep: Replay, x: int) -> tuple[np.ndarray, np.ndarray]:
    """Perceived and true x-separations at every sample, each (S, n)."""
    perceived = _kth_separations(rep.centers, scn.rho, x)
    true = _kth_separations(true_positions(scn, rep.times), scn.rho, x)
    return perceived, true


def default_sample_dt(scn: Scenario, x: int, t0: float = 0.0) -> float:
    """One eighth of the smallest x-separation at t0 (bounded below by the
    sample cap and by a fallback when separations vanish)."""
    floor = scn.horizon / MAX_SAMPLES if scn.horizon > 0 else 1.0
    if scn.n < 2:
        return floor
    xx = min(x, scn.n - 1)
    sig = _kth_separations(scn.positions_at(t0)[None], scn.rho, xx)[0]
    smallest = float(sig.min())
    if smallest <= 0:
        return max(floor, scn.horizon / 1000.0 if scn.horizon > 0 else 1.0)
    return max(smallest / 8.0, floor)


def sample_grid(t_start: float, t_end: float, dt: float) -> np.ndarray:
    count = int(math.floor((t_end - t_start) / dt + 1e-9)) + 1
    return t_start + dt * np.arange(max(count, 1))


@dataclass
class CongestionReport:
    times: list[float]
    rows: list[list[Any]]
    windows: list[list[Any]]
    warnings: list[str] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def column(self, name: str) -> list[Any]:
        k = REPORT_HEADER.index(name)
        return [r[k] for r in self.rows]


def _window_row(scn: Scenario, trace: QueryTrace, x: int, a: float, b: float, shift: float, threshold: float):
    queries = trace.count_in(a, b)
    gran = trace.min_granularity(a, b)
    try:
        phi = phi_integral(scn, x, (a, b)) if scn.n > x else math.nan
    except InfiniteDemandError:
        phi = math.inf
    ratio = ratio_shifted = math.nan
    if math.isfinite(phi) and phi >= threshold:
        ratio = queries / phi
        d = shift * (b - a)
        ratio_shifted = trace.count_in(a + d, b + d) / phi
    return [a, b, queries, gran, phi, ratio, ratio_shifted]


def simulate(
    scn: Scenario,
    trace: QueryTrace,
    x: int,
    spec: ReportSpec | None = None,
    t_start: float = 0.0,
    measures: tuple[str, ...] = ("degree", "ply", "thickness"),
    exact_limit: int = congestion.EXACT_THICKNESS_LIMIT,
) -> CongestionReport:
    """Sample congestion along the trace and summarize it per window."""
    spec = spec or ReportSpec()
    dt = spec.sample_dt or default_sample_dt(scn, x, t_start)
    times = sample_grid(t_start, scn.horizon, dt)
    tau = scn.target_time
    if tau is not None and t_start <= tau <= scn.horizon:
        times = np.union1d(times, [tau])
    rep = replay(scn, trace, times)
    rows = []
    for k, t in enumerate(times):
        c, r = rep.centers[k], rep.radii[k]
        g = congestion.build_pe_graph(c, r)
        deg = congestion.degree(g)[0] if "degree" in measures else ""
        if "ply" in measures:
            p = congestion.ply(c, r, scn.dim)
            pv, pe = p.value, p.exact
        else:
            pv, pe = "", ""
        if "thickness" in measures:
            chi, ce = congestion.thickness(g, exact_limit)
        else:
            chi, ce = "", ""
        rows.append([float(t), deg, pv, pe, chi, ce])

    warnings = list(trace.warnings)
    if not scn.enforce_disjoint:
        warnings.append("point-entity mode: disjointness not enforced")
    if trace.clairvoyant:
        warnings.append("clairvoyant scheme")
    if scn.dim >= 3 and "ply" in measures:
        warnings.append("ply is a sampled lower bound in dimension >= 3")
    if any(r[5] is False for r in rows):
        warnings.append("thickness is a greedy upper bound on some rows")

    wins = spec.windows
    if wins is None:
        wins = [(0.0, scn.horizon)] if scn.horizon > 0 else []
    threshold = RATIO_THRESHOLD * scn.n
    windows = [_window_row(scn, trace, x, a, b, spec.shift_fraction, threshold) for a, b in wins]
    meta = {
        "scheme": trace.scheme,
        "queries": len(trace),
        "sample_dt": dt,
        "samples": len(times),
        "ratio_threshold": threshold,
        "shift_fraction": spec.shift_fraction,
        "perturbations": trace.perturbations,
        "feasible": trace.feasible,
    }
    return CongestionReport([float(t) for t in times], rows, windows, warnings, meta)
