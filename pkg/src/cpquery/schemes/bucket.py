"""Bucket scheme for mobile entities, in basic and refined (Schedule*) modes.

After each query of entity j the scheme picks a level b from j's perceived
x-separation and parks j in the next dyadic bucket [i 2^b, (i+1) 2^b).
Basic mode queries a bucket's occupants evenly across it; refined mode keeps
one occupant per bucket, splitting on collision, and queries at midpoints.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from ..geometry import scheme_lambda
from ..motion import Scenario
from ..uncertainty import PerceptionState, apply_query, perceived_x_separation, perceived_x_separations
from .fwrr import floor_lg
from .ftt import run_init
from .trace import QueryTrace, SchemeConfig, SchemeError

SNAPSHOT_LIMIT = 200
REL_SLACK = 1e-9


def oracle_init(scn: Scenario, t0: float) -> tuple[QueryTrace, PerceptionState]:
    """Query every entity at t0 (ties nudged apart), so perception equals reality."""
    st = PerceptionState.for_scenario(scn)
    trace = QueryTrace(scheme="oracle-init")
    for i in range(scn.n):
        t = trace.add(t0, i)
        apply_query(st, i, t, scn)
    trace.meta["init"] = "oracle-init"
    return trace, st


def _true_x_separation(scn: Scenario, i: int, t: float, x: int) -> float:
    pos = scn.positions_at(t)
    diff = pos - pos[i]
    seps = np.sqrt((diff * diff).sum(axis=1)) - 2.0 * scn.rho
    seps[i] = np.inf
    return float(np.partition(seps, x - 1)[x - 1])


class _Buckets:
    """Occupied buckets plus the pending-query heap with lazy invalidation."""

    def __init__(self, refined: bool, now: float) -> None:
        self.refined = refined
        self.now = now
        self.occ: dict[tuple[int, int], list[int]] = {}
        self.where: dict[int, tuple[int, int]] = {}
        self.version: dict[int, int] = {}
        self.heap: list[tuple[float, int, int]] = []

    def _push(self, j: int, t: float) -> None:
        self.version[j] = self.version.get(j, 0) + 1
        heapq.heappush(self.heap, (t, j, self.version[j]))

    def place(self, j: int, b: int, i: int) -> None:
        if self.refined:
            self._place_refined(j, b, i)
        else:
            self._place_basic(j, b, i)

    def _place_refined(self, j: int, b: int, i: int) -> None:
        key = (b, i)
        if key in self.occ:
            inc = self.occ.pop(key)[0]
            del self.where[inc]
            self._place_refined(inc, b - 1, 2 * i)
            self._place_refined(j, b - 1, 2 * i + 1)
            return
        self.occ[key] = [j]
        self.where[j] = key
        self._push(j, math.ldexp(i + 0.5, b))

    def _place_basic(self, j: int, b: int, i: int) -> None:
        key = (b, i)
        members = self.occ.setdefault(key, [])
        members.append(j)
        members.sort()
        self.where[j] = key
        start, end = math.ldexp(i, b), math.ldexp(i + 1, b)
        lo = max(start, self.now)
        step = (end - lo) / len(members)
        for m, e in enumerate(members):
            self._push(e, lo + (m + 0.5) * step)

    def pop(self) -> tuple[float, int, tuple[int, int]] | None:
        while self.heap:
            t, j, v = heapq.heappop(self.heap)
            if self.version.get(j) != v:
                continue
            key = self.where.pop(j)
            members = self.occ[key]
            members.remove(j)
            if not members:
                del self.occ[key]
            return t, j, key
        return None

    def peek_time(self) -> float:
        while self.heap and self.version.get(self.heap[0][1]) != self.heap[0][2]:
            heapq.heappop(self.heap)
        return self.heap[0][0] if self.heap else math.inf

    def snapshot(self) -> list[tuple[int, int]]:
        return sorted(self.occ)


def run_bucket(
    scn: Scenario,
    cfg: SchemeConfig,
    mode: str | None = None,
    init: str | tuple[QueryTrace, PerceptionState] = "oracle",
    t0: float | None = None,
    horizon: float | None = None,
    check_perception: bool = True,
) -> QueryTrace:
    """Run the bucket scheme from a warm start at t0 until the horizon.

    ``init`` is "oracle", "lemma" (the super-safe round-robin initializer) or
    a (trace, state) pair whose state already satisfies the perception
    preconditions at t0.
    """
    if mode is None:
        mode = "basic" if cfg.kind == "bucket_basic" else "refined"
    if mode not in ("basic", "refined"):
        raise ValueError(f"unknown bucket mode {mode!r}")
    bound = cfg.bound
    if scn.n <= bound:
        raise SchemeError(f"bucket scheme needs more than {bound} entities")
    lam = scheme_lambda(scn.dim, bound, scn.rho)
    t0 = float(cfg.params.get("t0", 0.0) if t0 is None else t0)
    horizon = scn.horizon if horizon is None else horizon
    literal_gap = bool(cfg.params.get("literal_gap", False))

    if init == "oracle":
        trace, st = oracle_init(scn, t0)
        label = "oracle-init"
    elif init == "lemma":
        trace, st = run_init(scn, cfg, t0)
        label = "lemma-init"
        if not trace.feasible or not trace.meta.get("certified", False):
            raise SchemeError("initialization failed to certify the perception preconditions: " + "; ".join(trace.warnings))
    else:
        init_trace, st = init
        trace = QueryTrace(scheme="")
        trace.extend(init_trace)
        st = st.copy()
        label = "supplied-init"
    trace.scheme = f"bucket_{mode}[{bound}]"
    st.advance(max(st.clock, t0))

    tilde = perceived_x_separations(st, bound)
    if np.any(tilde <= 0):
        raise SchemeError("perceived separation vanishes at t0")
    last_tilde = tilde.copy()
    now = st.clock
    buckets = _Buckets(mode == "refined", now)
    clipped = 0
    for j in range(scn.n):
        budget = lam * tilde[j] / 12.0 - (now - st.last_query[j])
        target = min(lam * tilde[j] / 24.0, budget / 2.0)
        if target <= 0:
            target = lam * tilde[j] * REL_SLACK
            clipped += 1
        b = floor_lg(target)
        buckets.place(j, b, math.ceil(math.ldexp(now, -b)))

    levels: list[int] = []
    wait_ratio: list[float] = []
    snapshots: list[list[tuple[int, int]]] = [buckets.snapshot()]
    every = max(1, scn.n)
    count = 0
    while buckets.peek_time() <= horizon:
        t, j, (b_served, _) = buckets.pop()
        t = trace.add(t, j)
        wait = t - st.last_query[j]
        wait_ratio.append(wait / (lam * last_tilde[j] / 12.0))
        apply_query(st, j, t, scn)
        buckets.now = t
        s_tilde = perceived_x_separation(st, j, bound)
        if check_perception:
            s_true = _true_x_separation(scn, j, t, bound)
            if not (s_true / 2 <= s_tilde * (1 + REL_SLACK) and s_tilde <= 1.5 * s_true * (1 + REL_SLACK)):
                raise SchemeError(
                    f"perception breach for entity {j} at t={t}: perceived {s_tilde}, true {s_true}"
                )
        if s_tilde <= 0:
            raise SchemeError(f"perceived separation of entity {j} vanished at t={t}")
        last_tilde[j] = s_tilde
        levels.append(b_served)
        b = floor_lg(lam * s_tilde / 24.0)
        earliest = t + math.ldexp(1.0, b) if literal_gap else t
        buckets.place(j, b, math.ceil(math.ldexp(earliest, -b)))
        count += 1
        if mode == "refined" and count % every == 0 and len(snapshots) < SNAPSHOT_LIMIT:
            snapshots.append(buckets.snapshot())

    ratios = np.asarray(wait_ratio)
    trace.meta.update(
        init=label,
        mode=mode,
        t0=t0,
        lam=lam,
        bound=bound,
        init_queries=len(trace) - count,
        query_levels=levels,
        max_wait_ratio=float(ratios.max()) if len(ratios) else 0.0,
        wait_violations=int((ratios > 1 + REL_SLACK).sum()),
        clipped_initial=clipped,
        bucket_snapshots=snapshots,
    )
    if clipped:
        trace.warnings.append(f"{clipped} entities had no wait budget left at t0")
    return trace
