"""Query traces and scheme configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

TIE_EPS = 1e-12

KINDS = ("ftt", "fwrr", "bucket_basic", "bucket_refined", "round_robin", "clairvoyant", "init")


class SchemeError(RuntimeError):
    """A scheme detected a broken precondition or invariant."""


@dataclass
class SchemeConfig:
    """Which scheme to run and with what constants.

    ``x`` is the base congestion bound and ``beta`` the slack; the scheme
    maintains ``bound = (1 + beta) * x``.
    """

    kind: str
    x: int
    beta: float = 0.0
    target_time: float | None = None
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}; expected one of {KINDS}")
        if self.x < 1:
            raise ValueError("x must be positive")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")

    @property
    def bound(self) -> int:
        b = (1.0 + self.beta) * self.x
        if abs(b - round(b)) > 1e-9:
            raise ValueError(f"(1 + beta) * x = {b} is not an integer")
        return int(round(b))

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, "x": self.x, "beta": self.beta, "params": dict(self.params)}
        if self.target_time is not None:
            out["target_time"] = self.target_time
        return out


@dataclass
class QueryTrace:
    """Time-ordered (time, entity) queries plus run metadata."""

    times: list[float] = field(default_factory=list)
    entities: list[int] = field(default_factory=list)
    scheme: str = ""
    clairvoyant: bool = False
    feasible: bool = True
    perturbations: int = 0
    warnings: list[str] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def add(self, t: float, i: int) -> float:
        """Append a query, nudging t forward if it collides with the last one."""
        if self.times and t <= self.times[-1]:
            if t < self.times[-1] - 1e-9:
                raise SchemeError(f"query at {t} is earlier than previous query {self.times[-1]}")
            t = self.times[-1] + TIE_EPS
            self.perturbations += 1
        self.times.append(float(t))
        self.entities.append(int(i))
        return t

    def extend(self, other: QueryTrace) -> None:
        for t, i in zip(other.times, other.entities):
            self.add(t, i)
        self.perturbations += other.perturbations
        self.warnings.extend(other.warnings)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.times, dtype=float), np.asarray(self.entities, dtype=int)

    def query_times_of(self, i: int) -> np.ndarray:
        t, e = self.as_arrays()
        return t[e == i]

    def count_in(self, t0: float, t1: float) -> int:
        """Queries with t0 <= t < t1."""
        t = np.asarray(self.times)
        return int(((t >= t0) & (t < t1)).sum())

    def entities_in(self, t0: float, t1: float) -> set[int]:
        t, e = self.as_arrays()
        return set(e[(t >= t0) & (t < t1)].tolist())

    def min_granularity(self, t0: float = -math.inf, t1: float = math.inf) -> float:
        """Smallest gap between consecutive queries inside [t0, t1)."""
        t = np.asarray(self.times)
        t = t[(t >= t0) & (t < t1)]
        if len(t) < 2:
            return math.inf
        return float(np.diff(t).min())

    def window_totals(self, windows: list[tuple[float, float]]) -> list[int]:
        return [self.count_in(a, b) for a, b in windows]
