"""Comparison baselines: uniform round robin and scripted clairvoyant schemes.

Clairvoyant scripts read the true trajectories (and the fixture's attached
expectations), so their traces are flagged ``clairvoyant``.
"""

from __future__ import annotations

import math

import numpy as np

from ..motion import Scenario
from .trace import QueryTrace, SchemeConfig, SchemeError


def run_round_robin(scn: Scenario, cfg: SchemeConfig, horizon: float | None = None) -> QueryTrace:
    """Cycle through the entities at a fixed granularity.

    ``params['segments']`` may list ``[start, granularity, count]`` runs that
    are played back to back; otherwise a single run starts at
    ``params['start']`` (default 0) and lasts until the horizon.
    """
    horizon = scn.horizon if horizon is None else horizon
    order = list(cfg.params.get("order", range(scn.n)))
    if not order:
        raise SchemeError("round robin needs at least one entity")
    segments = cfg.params.get("segments")
    if segments is None:
        g = float(cfg.params.get("granularity", 1.0))
        if g <= 0:
            raise SchemeError("granularity must be positive")
        start = float(cfg.params.get("start", 0.0))
        count = int(math.floor((horizon - start) / g + 1e-9)) + 1 if horizon >= start else 0
        segments = [[start, g, count]]

    trace = QueryTrace(scheme="round_robin")
    k = 0
    for start, g, count in segments:
        for m in range(int(count)):
            t = start + m * g
            if t > horizon:
                break
            trace.add(t, order[k % len(order)])
            k += 1
    trace.meta.update(segments=[list(map(float, s)) for s in segments], order=order)
    return trace


def _deadline_script(scn: Scenario, cfg: SchemeConfig) -> QueryTrace:
    """Query everything once at granularity 1, widest-separated first, the
    last query landing on the deadline."""
    tau = cfg.target_time if cfg.target_time is not None else scn.target_time
    if tau is None:
        raise SchemeError("deadline script needs a target time")
    pos = scn.positions_at(tau)
    dist = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1) - 2.0 * scn.rho
    np.fill_diagonal(dist, np.inf)
    sep = dist.min(axis=1)
    order = sorted(range(scn.n), key=lambda i: (-sep[i], i))
    trace = QueryTrace(scheme="clairvoyant_deadline", clairvoyant=True)
    for k, i in enumerate(order):
        trace.add(tau - (scn.n - 1) + k, i)
    trace.meta.update(target_time=tau, order=order)
    return trace


def _reversal_script(scn: Scenario, cfg: SchemeConfig, horizon: float) -> QueryTrace:
    """Sweep every entity once at granularity 1, then cycle through the
    entities that turn around."""
    specials = list(scn.expectations.get("specials", []))
    if not specials:
        raise SchemeError("reversal script needs the fixture's special entities")
    trace = QueryTrace(scheme="clairvoyant_reversal", clairvoyant=True)
    for i in range(scn.n):
        trace.add(float(i), i)
    t, k = float(scn.n), 0
    while t <= horizon:
        trace.add(t, specials[k % len(specials)])
        t += 1.0
        k += 1
    trace.meta.update(specials=specials, sweep_end=float(scn.n - 1))
    return trace


def _cluster_script(scn: Scenario, cfg: SchemeConfig, horizon: float) -> QueryTrace:
    """Sweep every entity once, then alternate between the active members
    of the two clusters at granularity 1."""
    clusters = scn.expectations.get("clusters")
    active = int(scn.expectations.get("active_per_cluster", 0))
    if not clusters or active < 1:
        raise SchemeError("cluster script needs the fixture's clusters")
    a, b = clusters[0][:active], clusters[1][:active]
    cycle = []
    for m in range(max(len(a), len(b))):
        if m < len(a):
            cycle.append(a[m])
        if m < len(b):
            cycle.append(b[m])
    trace = QueryTrace(scheme="clairvoyant_cluster", clairvoyant=True)
    # idle entities first, so the active ones are fresh when the sweep ends
    busy = set(cycle)
    sweep = [i for i in range(scn.n) if i not in busy] + cycle
    for k, i in enumerate(sweep):
        trace.add(float(k), i)
    t, k = float(scn.n), 0
    while t <= horizon:
        trace.add(t, cycle[k % len(cycle)])
        t += 1.0
        k += 1
    trace.meta.update(cycle=cycle, sweep_end=float(scn.n - 1))
    return trace


SCRIPTS = {"deadline", "reversal", "cluster"}


def run_clairvoyant(scn: Scenario, cfg: SchemeConfig, horizon: float | None = None) -> QueryTrace:
    horizon = scn.horizon if horizon is None else horizon
    script = cfg.params.get("script", "deadline")
    if script == "deadline":
        return _deadline_script(scn, cfg)
    if script == "reversal":
        return _reversal_script(scn, cfg, horizon)
    if script == "cluster":
        return _cluster_script(scn, cfg, horizon)
    raise SchemeError(f"unknown clairvoyant script {script!r}; expected one of {sorted(SCRIPTS)}")


def run_baseline(scn: Scenario, cfg: SchemeConfig, horizon: float | None = None) -> QueryTrace:
    if cfg.kind == "round_robin":
        return run_round_robin(scn, cfg, horizon)
    if cfg.kind == "clairvoyant":
        return run_clairvoyant(scn, cfg, horizon)
    raise SchemeError(f"{cfg.kind!r} is not a baseline")


def oblivious_window_config(scn: Scenario, x: int) -> SchemeConfig:
    """Round robin for the reversal fixture that cannot tell specials apart:
    one sweep at granularity 1, then every entity once, evenly, inside the
    final window before the target."""
    tau = scn.target_time
    window = scn.expectations.get("window")
    if tau is None or window is None:
        raise SchemeError("the oblivious window scheme needs a target time and a final window")
    n = scn.n
    segments = [[0.0, 1.0, n], [tau - window + window / n, window / n, n]]
    return SchemeConfig(kind="round_robin", x=x, params={"segments": segments})
