"""Frequency-demand functionals of a configuration or a scenario.

``phi_stationary`` is the per-unit-time query demand of a frozen
configuration, ``phi_integral`` its time integral along a scenario,
``gamma_fixed_target`` the intrinsic fixed-target granularity and
``mu_uniformity`` the x-uniformity ratio.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import congestion
from .geometry import TOL, Configuration, x_radii, x_separations
from .motion import Scenario, configuration_at

DEFAULT_REL_TOL = 1e-6
EXACT_GAMMA_LIMIT = 8
BISECTION_STEPS = 40


class InfiniteDemandError(ValueError):
    """Some x-separation vanishes, so the demand is unbounded."""


@dataclass
class DemandReport:
    phi_stationary: float | None = None
    phi_integral: float | None = None
    gamma: float | None = None
    mu: float | None = None
    metadata: dict = field(default_factory=dict)


def phi_stationary(cfg: Configuration, x: int) -> float:
    """Sum over entities of 1 / x-separation."""
    sig = x_separations(cfg, x)
    if np.any(sig <= 0):
        raise InfiniteDemandError(f"entity {int(np.argmin(sig))} has zero {x}-separation")
    return float(np.sum(1.0 / sig))


def adaptive_simpson(
    f: Callable[[float], np.ndarray],
    a: float,
    b: float,
    rel_tol: float = DEFAULT_REL_TOL,
    max_depth: int = 48,
) -> np.ndarray:
    """Componentwise adaptive Simpson integral of a vector-valued f over [a, b].

    A panel is accepted once every component's Richardson error estimate is
    below ``rel_tol`` times that component's running integral estimate.
    """
    fa, fb = np.asarray(f(a), dtype=float), np.asarray(f(b), dtype=float)
    if b <= a:
        return np.zeros_like(fa)
    m = 0.5 * (a + b)
    fm = np.asarray(f(m), dtype=float)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    # scale for the tolerance; a coarse composite estimate avoids a zero start
    scale = np.abs(whole) + 1e-300
    tol = rel_tol * scale

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = np.asarray(f(lm), dtype=float), np.asarray(f(rm), dtype=float)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        err = (left + right - whole) / 15.0
        if depth >= max_depth or np.all(np.abs(err) <= tol):
            return left + right + err
        return recurse(a, m, fa, flm, fm, left, tol / 2.0, depth + 1) + recurse(
            m, b, fm, frm, fb, right, tol / 2.0, depth + 1
        )

    return recurse(a, b, fa, fm, fb, whole, tol, 0)


def _piecewise_integral(
    scn: Scenario,
    integrand: Callable[[Configuration], np.ndarray],
    t0: float,
    t1: float,
    rel_tol: float,
) -> np.ndarray:
    """Per-entity integral of integrand(configuration_at(t)) over [t0, t1]."""
    if t1 < t0:
        raise ValueError("interval end precedes its start")
    cuts = np.concatenate([[t0], scn.breakpoints(t0, t1), [t1]])
    total = np.zeros(scn.n)
    if t1 == t0:
        return total
    f = lambda t: integrand(configuration_at(scn, t))
    for a, b in zip(cuts[:-1], cuts[1:]):
        total += adaptive_simpson(f, float(a), float(b), rel_tol)
    return total


def _inverse_separations(x: int):
    def g(cfg: Configuration) -> np.ndarray:
        sig = x_separations(cfg, x)
        if np.any(sig <= 0):
            raise InfiniteDemandError(f"{x}-separation vanishes inside the interval")
        return 1.0 / sig

    return g


def phi_integral_per_entity(
    scn: Scenario, x: int, interval: tuple[float, float], rel_tol: float = DEFAULT_REL_TOL
) -> np.ndarray:
    return _piecewise_integral(scn, _inverse_separations(x), interval[0], interval[1], rel_tol)


def phi_integral(
    scn: Scenario, x: int, interval: tuple[float, float], rel_tol: float = DEFAULT_REL_TOL
) -> float:
    """Integral over the interval of the instantaneous stationary demand."""
    return float(phi_integral_per_entity(scn, x, interval, rel_tol).sum())


def mu_stationary(cfg: Configuration, x: int) -> float:
    if 2 * x > cfg.n - 1:
        raise ValueError(f"uniformity needs 2x <= n - 1 (x={x}, n={cfg.n})")
    num = np.sum(1.0 / x_radii(cfg, 2 * x))
    den = np.sum(1.0 / x_radii(cfg, x))
    return float(2.0 ** (1.0 / cfg.dim) * num / den)


def mu_uniformity(
    scn: Scenario, x: int, interval: tuple[float, float], rel_tol: float = DEFAULT_REL_TOL
) -> float:
    """x-uniformity over an interval; a single instant gives the stationary value."""
    if 2 * x > scn.n - 1:
        raise ValueError(f"uniformity needs 2x <= n - 1 (x={x}, n={scn.n})")
    t0, t1 = interval
    if t1 <= t0:
        return mu_stationary(configuration_at(scn, t0), x)
    num = _piecewise_integral(scn, lambda c: 1.0 / x_radii(c, 2 * x), t0, t1, rel_tol).sum()
    den = _piecewise_integral(scn, lambda c: 1.0 / x_radii(c, x), t0, t1, rel_tol).sum()
    return float(2.0 ** (1.0 / scn.dim) * num / den)


# -- intrinsic fixed-target granularity ------------------------------------


def _measure_ok(cfg: Configuration, radii: np.ndarray, x: int, measure: str, tol: float) -> bool:
    if measure == "degree":
        adj = congestion.adjacency(cfg.centers, radii, tol)
        return int(adj.sum(axis=1).max()) <= x
    if measure == "ply":
        return congestion.ply(cfg.centers, radii, cfg.dim, tol).value <= x
    raise ValueError(f"unknown measure {measure!r}")


def _degree_ok_all_perms(dist: np.ndarray, rho: float, perms: np.ndarray, gamma: float, x: int, tol: float) -> np.ndarray:
    """Vectorized degree check of every permutation at one gamma."""
    radii = rho + perms * gamma  # (P, n)
    reach = radii[:, :, None] + radii[:, None, :]
    deg = (dist[None, :, :] <= reach + tol).sum(axis=2)
    return deg.max(axis=1) <= x


def _bisect(feasible: Callable[[float], bool], hi: float, steps: int) -> float:
    lo = 0.0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def gamma_fixed_target(
    cfg: Configuration,
    x: int,
    measure: str = "degree",
    exact_limit: int = EXACT_GAMMA_LIMIT,
    steps: int = BISECTION_STEPS,
    tol: float = TOL,
) -> tuple[float, bool]:
    """Largest gamma such that radii rho + k_i * gamma, k a permutation of
    1..n, keep the measure at most x. Returns (gamma, exact).

    Exact mode searches all permutations; beyond ``exact_limit`` entities the
    largest multiplier goes to the entity with the largest x-separation.
    """
    n = cfg.n
    if n <= x:
        return math.inf, True
    dist = cfg.distance_matrix()
    hi = float(dist.max()) / 3.0 + 1.0
    exact = n <= exact_limit
    if exact:
        perms = np.array(list(itertools.permutations(range(1, n + 1))), dtype=float)
    else:
        order = np.argsort(x_separations(cfg, min(x, n - 1)), kind="stable")
        k = np.empty(n)
        k[order] = np.arange(1, n + 1)
        perms = k.reshape(1, -1)

    if measure == "degree":
        feasible = lambda g: bool(_degree_ok_all_perms(dist, cfg.rho, perms, g, x, tol).any())
    else:
        feasible = lambda g: any(_measure_ok(cfg, cfg.rho + p * g, x, measure, tol) for p in perms)
    return _bisect(feasible, hi, steps), exact
