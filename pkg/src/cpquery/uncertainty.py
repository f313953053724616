"""What a query scheme is allowed to know: last query times and perceived centers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import congestion
from .geometry import TOL
from .motion import Scenario

NEVER = -math.inf


class TimeRegressionError(ValueError):
    pass


class UnqueriedEntityError(ValueError):
    pass


@dataclass(frozen=True)
class UncertaintyRegion:
    center: np.ndarray
    radius: float

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.radius)


class PerceptionState:
    """Per-entity last query time and perceived center, plus a clock.

    Before its first query an entity has last-query time ``-inf`` and an
    unbounded uncertainty region.
    """

    def __init__(self, n: int, dim: int, rho: float, clock: float = 0.0) -> None:
        self.n = n
        self.dim = dim
        self.rho = rho
        self.clock = clock
        self.last_query = np.full(n, NEVER)
        self.perceived = np.full((n, dim), np.nan)

    @classmethod
    def for_scenario(cls, scn: Scenario, clock: float = 0.0) -> PerceptionState:
        return cls(scn.n, scn.dim, scn.rho, clock)

    def copy(self) -> PerceptionState:
        other = PerceptionState(self.n, self.dim, self.rho, self.clock)
        other.last_query = self.last_query.copy()
        other.perceived = self.perceived.copy()
        return other

    @property
    def all_queried(self) -> bool:
        return bool(np.all(np.isfinite(self.last_query)))

    def record(self, i: int, t: float, position: np.ndarray) -> None:
        if t < self.clock:
            raise TimeRegressionError(f"query at t={t} precedes clock {self.clock}")
        self.last_query[i] = t
        self.perceived[i] = position
        self.clock = t

    def advance(self, t: float) -> None:
        if t < self.clock:
            raise TimeRegressionError(f"cannot move clock back from {self.clock} to {t}")
        self.clock = t

    def radius(self, i: int, t: float | None = None) -> float:
        t = self.clock if t is None else t
        p = self.last_query[i]
        if math.isinf(p):
            return math.inf
        return self.rho + t - p

    def radii(self, t: float | None = None) -> np.ndarray:
        t = self.clock if t is None else t
        with np.errstate(invalid="ignore"):
            r = self.rho + t - self.last_query
        r[~np.isfinite(self.last_query)] = math.inf
        return r

    def region(self, i: int, t: float | None = None) -> UncertaintyRegion:
        return UncertaintyRegion(self.perceived[i].copy(), self.radius(i, t))

    def regions(self, t: float | None = None) -> list[UncertaintyRegion]:
        return [self.region(i, t) for i in range(self.n)]


def apply_query(st: PerceptionState, i: int, t: float, scn: Scenario) -> PerceptionState:
    """Query entity i at time t, updating ``st`` in place; returns ``st``."""
    st.record(i, t, scn.position_of(i, t))
    return st


def projected_region(st: PerceptionState, i: int, tau: float) -> UncertaintyRegion:
    """Region of i at time tau if i receives no further queries."""
    if tau < st.clock:
        raise TimeRegressionError(f"target {tau} precedes clock {st.clock}")
    return st.region(i, tau)


def projected_regions(st: PerceptionState, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Centers and radii of all projected regions at tau."""
    if tau < st.clock:
        raise TimeRegressionError(f"target {tau} precedes clock {st.clock}")
    return st.perceived.copy(), st.radii(tau)


def is_degree_safe(st: PerceptionState, i: int, tau: float, x: int, tol: float = TOL) -> bool:
    """True when i's projected region meets at most x - 1 other projected regions."""
    centers, radii = projected_regions(st, tau)
    adj = congestion.adjacency(centers, radii, tol)
    return int(adj[i].sum()) - 1 <= x - 1


def is_ply_safe(st: PerceptionState, i: int, tau: float, x: int, tol: float = TOL) -> bool:
    """True when no point of i's projected region lies in x or more other regions."""
    centers, radii = projected_regions(st, tau)
    return congestion.ply_within(centers, radii, st.dim, i, tol=tol).value <= x


def perceived_x_separations(st: PerceptionState, x: int) -> np.ndarray:
    """x-th smallest perceived separation for every entity."""
    if not st.all_queried:
        raise UnqueriedEntityError("every entity must be queried before perceiving separations")
    if x > st.n - 1:
        raise ValueError(f"x={x} needs at least {x + 1} entities")
    diff = st.perceived[:, None, :] - st.perceived[None, :, :]
    seps = np.sqrt((diff * diff).sum(axis=-1)) - 2.0 * st.rho
    np.fill_diagonal(seps, np.inf)
    return np.partition(seps, x - 1, axis=1)[:, x - 1]


def perceived_x_separation(st: PerceptionState, i: int, x: int) -> float:
    """x-th smallest perceived separation from entity i."""
    if not st.all_queried:
        raise UnqueriedEntityError("every entity must be queried before perceiving separations")
    if x > st.n - 1:
        raise ValueError(f"x={x} needs at least {x + 1} entities")
    diff = st.perceived - st.perceived[i]
    seps = np.sqrt((diff * diff).sum(axis=1)) - 2.0 * st.rho
    seps[i] = np.inf
    return float(np.partition(seps, x - 1)[x - 1])
