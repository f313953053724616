"""Speed-bounded piecewise-linear trajectories and scenarios built from them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .geometry import TOL, Configuration

SPEED_BOUND = 1.0


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Piecewise-linear path, held constant outside its waypoint span."""

    times: np.ndarray
    positions: np.ndarray

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float).reshape(-1)
        positions = np.asarray(self.positions, dtype=float)
        if positions.ndim == 1:
            positions = positions.reshape(len(times), -1)
        if len(times) == 0:
            raise ValueError("a trajectory needs at least one waypoint")
        if positions.shape[0] != len(times):
            raise ValueError("one position per waypoint time is required")
        if np.any(np.diff(times) <= 0):
            raise ValueError("waypoint times must be strictly increasing")
        if times[0] < 0:
            raise ValueError("waypoint times must be nonnegative")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "positions", positions)

    @classmethod
    def stationary(cls, position) -> Trajectory:
        return cls(np.array([0.0]), np.asarray(position, dtype=float).reshape(1, -1))

    @classmethod
    def from_waypoints(cls, waypoints) -> Trajectory:
        times = [float(t) for t, _ in waypoints]
        positions = [np.atleast_1d(np.asarray(p, dtype=float)) for _, p in waypoints]
        return cls(np.array(times), np.vstack(positions))

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    @property
    def is_stationary(self) -> bool:
        return bool(np.all(self.positions == self.positions[0]))

    def waypoints(self) -> list[tuple[float, list[float]]]:
        return [(float(t), [float(v) for v in p]) for t, p in zip(self.times, self.positions)]

    def segment_speeds(self) -> np.ndarray:
        if len(self.times) < 2:
            return np.zeros(0)
        dp = np.linalg.norm(np.diff(self.positions, axis=0), axis=1)
        return dp / np.diff(self.times)

    def position_at(self, t: float) -> np.ndarray:
        return self.positions_at(np.array([t], dtype=float))[0]

    def positions_at(self, ts: np.ndarray) -> np.ndarray:
        """Vectorized evaluation at many times; returns shape (len(ts), dim)."""
        ts = np.asarray(ts, dtype=float)
        if len(self.times) == 1:
            return np.repeat(self.positions, len(ts), axis=0)
        return np.column_stack(
            [np.interp(ts, self.times, self.positions[:, k]) for k in range(self.dim)]
        )


def position_at(traj: Trajectory, t: float) -> np.ndarray:
    return traj.position_at(t)


@dataclass(eq=False)
class Scenario:
    """Entities, their motion, and the time horizon [0, horizon]."""

    dim: int
    rho: float
    trajectories: list[Trajectory]
    horizon: float
    enforce_disjoint: bool = True
    target_time: float | None = None
    expectations: dict[str, Any] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self) -> None:
        for k, tr in enumerate(self.trajectories):
            if tr.dim != self.dim:
                raise ValueError(f"trajectory {k} has dimension {tr.dim}, expected {self.dim}")
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.trajectories)

    @property
    def is_stationary(self) -> bool:
        return all(tr.is_stationary for tr in self.trajectories)

    def breakpoints(self, t0: float = 0.0, t1: float | None = None) -> np.ndarray:
        """All waypoint times strictly inside (t0, t1)."""
        t1 = self.horizon if t1 is None else t1
        times = np.unique(np.concatenate([tr.times for tr in self.trajectories]))
        return times[(times > t0) & (times < t1)]

    def _packed(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        # waypoint tables padded with +inf times so a single vectorized lookup
        # serves every entity
        cache = self.__dict__.get("_pack")
        if cache is not None:
            return cache
        k = max(len(tr.times) for tr in self.trajectories)
        times = np.full((self.n, k + 1), np.inf)
        pos = np.zeros((self.n, k + 1, self.dim))
        last = np.zeros(self.n, dtype=int)
        for i, tr in enumerate(self.trajectories):
            m = len(tr.times)
            times[i, :m] = tr.times
            pos[i, :m] = tr.positions
            pos[i, m:] = tr.positions[-1]
            last[i] = max(m - 2, 0)
        self.__dict__["_pack"] = (times, pos, last)
        return times, pos, last

    def positions_at(self, t: float) -> np.ndarray:
        """True centers of all entities at time t, shape (n, dim)."""
        if self.n == 0:
            return np.zeros((0, self.dim))
        times, pos, last = self._packed()
        if times.shape[1] == 2:
            # every trajectory is a single waypoint
            return pos[:, 0].copy()
        idx = np.minimum(np.maximum((times <= t).sum(axis=1) - 1, 0), last)
        rows = np.arange(self.n)
        t0, t1 = times[rows, idx], times[rows, idx + 1]
        # t1 is +inf past the last waypoint, which gives frac 0
        with np.errstate(invalid="ignore"):
            frac = np.minimum(np.maximum((t - t0) / (t1 - t0), 0.0), 1.0)
        frac = np.where(np.isnan(frac), 0.0, frac)
        p0, p1 = pos[rows, idx], pos[rows, idx + 1]
        return p0 + frac[:, None] * (p1 - p0)

    def position_of(self, i: int, t: float) -> np.ndarray:
        return self.trajectories[i].position_at(t)


def configuration_at(scn: Scenario, t: float) -> Configuration:
    if t < 0:
        raise ValueError("time must be nonnegative")
    return Configuration(scn.dim, scn.rho, scn.positions_at(t))


def validate(scn: Scenario, grid_step: float | None = None) -> list[str]:
    """List every speed or disjointness violation; empty means valid."""
    problems: list[str] = []
    for k, tr in enumerate(scn.trajectories):
        for s, v in enumerate(tr.segment_speeds()):
            if v > SPEED_BOUND + TOL:
                problems.append(f"entity {k}: speed {v:.6g} exceeds 1 on segment {s}")
    if not scn.enforce_disjoint or scn.n < 2:
        return problems

    if grid_step is None:
        grid_step = 0.01 * scn.horizon if scn.horizon > 0 else 1.0
    grid = np.arange(0.0, scn.horizon + grid_step / 2, grid_step) if scn.horizon > 0 else np.array([0.0])
    extra = np.concatenate([tr.times for tr in scn.trajectories])
    ts = np.unique(np.concatenate([grid, extra[extra <= scn.horizon]]))
    # (T, n, dim)
    pos = np.stack([tr.positions_at(ts) for tr in scn.trajectories], axis=1)
    iu, ju = np.triu_indices(scn.n, k=1)
    seps = np.linalg.norm(pos[:, iu, :] - pos[:, ju, :], axis=-1) - 2.0 * scn.rho
    bad = np.argwhere(seps < -TOL)
    seen: set[tuple[int, int]] = set()
    for ti, p in bad:
        pair = (int(iu[p]), int(ju[p]))
        if pair in seen:
            continue
        seen.add(pair)
        problems.append(
            f"entities {pair[0]} and {pair[1]} overlap at t={ts[ti]:.6g} "
            f"(separation {seps[ti, p]:.6g})"
        )
    return problems
