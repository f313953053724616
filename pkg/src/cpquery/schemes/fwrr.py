"""Frequency-weighted round robin for stationary entities."""

from __future__ import annotations

import math

import numpy as np

from ..demand import phi_stationary
from ..geometry import Configuration, scheme_lambda, x_separations
from .trace import QueryTrace, SchemeConfig, SchemeError


def ceil_lg(v: float) -> int:
    """Exact ceil(log2(v)) for v > 0."""
    m, e = math.frexp(v)
    return e - 1 if m == 0.5 else e


def floor_lg(v: float) -> int:
    """Exact floor(log2(v)) for v > 0."""
    _, e = math.frexp(v)
    return e - 1


def fwrr_periods(cfg0: Configuration, bound: int, lam: float) -> tuple[int, list[int], float]:
    """Slot exponent g and per-entity periods (in slots of width 2**-g)."""
    sig = x_separations(cfg0, bound)
    phi = phi_stationary(cfg0, bound)
    g = ceil_lg((lam + 2.0) / lam * phi) + 1
    periods = [2 ** (g + floor_lg(s * lam / (lam + 2.0))) for s in sig]
    return g, periods, phi


def assign_slots(periods: list[int]) -> list[int]:
    """Offsets so each entity owns one slot per period and no slot is shared.

    Periods must be powers of two with sum of reciprocals below one. Entities
    are placed shortest period first, each at its earliest free residue.
    """
    if not periods:
        return []
    for p in periods:
        if p < 1 or p & (p - 1):
            raise ValueError(f"period {p} is not a power of two")
    if sum(1.0 / p for p in periods) >= 1.0:
        raise SchemeError("periods are too dense to schedule")
    hyper = max(periods)
    occupied = np.zeros(hyper, dtype=bool)
    offsets = [0] * len(periods)
    for i in sorted(range(len(periods)), key=lambda k: (periods[k], k)):
        p = periods[i]
        busy = occupied.reshape(-1, p).any(axis=0)
        free = np.flatnonzero(~busy)
        if len(free) == 0:
            raise SchemeError(f"no free slot for entity {i} with period {p}")
        offsets[i] = int(free[0])
        occupied[offsets[i]::p] = True
    return offsets


def run_fwrr(cfg0: Configuration, cfg: SchemeConfig, horizon: float) -> QueryTrace:
    """Query each entity once per period, in its own slot, until the horizon.

    Every entity's first query falls inside the first max-period, which
    serves as the start-up round; congestion bounds hold once it ends.
    """
    bound = cfg.bound
    lam = scheme_lambda(cfg0.dim, bound, cfg0.rho)
    g, periods, phi = fwrr_periods(cfg0, bound, lam)
    offsets = assign_slots(periods)
    width = math.ldexp(1.0, -g)
    n_slots = int(math.ceil(horizon / width))

    # slots are exclusive, so the merged times are already strictly increasing
    slots = np.concatenate([np.arange(off, n_slots, p) for p, off in zip(periods, offsets)])
    ents = np.concatenate([np.full(len(range(off, n_slots, p)), i) for i, (p, off) in enumerate(zip(periods, offsets))])
    order = np.argsort(slots, kind="stable")
    trace = QueryTrace(scheme="fwrr")
    trace.times = (slots[order] * width).tolist()
    trace.entities = ents[order].tolist()
    trace.meta.update(
        g=g,
        slot_width=width,
        periods=periods,
        offsets=offsets,
        phi=phi,
        lam=lam,
        bound=bound,
        startup_end=max(periods) * width,
        granularity_bound=lam / (4.0 * (lam + 2.0)) / phi,
    )
    return trace
