"""Scenario generators: the adversarial constructions and seeded random scenes.

Each constructed scenario carries ``expectations``, a plain dict of the
analytically known quantities that tests and reports check against.
"""

from __future__ import annotations

import math

import numpy as np

from . import congestion
from .motion import Scenario, Trajectory

PAIR_SPACING_FACTOR = 100


class FixtureError(ValueError):
    pass


def _point(*coords: float) -> np.ndarray:
    return np.array(coords, dtype=float)


def pairs_demand(n: int) -> float:
    """Degree-one maintenance demand of the pairs fixture over a window of length n."""
    return float(sum(n / (4.0 * i - 1.0) for i in range(1, n // 2 + 1)))


def gen_pairs_fixture(n: int) -> Scenario:
    """n/2 far-apart stationary pairs on a line; pair i has separation 4i - 1."""
    if n < 2 or n % 2:
        raise FixtureError(f"pairs fixture needs a positive even n, got {n}")
    trajs = []
    seps = []
    base = 0.0
    for i in range(1, n // 2 + 1):
        seps.append(4 * i - 1)
        trajs.append(Trajectory.stationary(_point(base)))
        trajs.append(Trajectory.stationary(_point(base + 4 * i - 1)))
        base += 4 * i - 1 + PAIR_SPACING_FACTOR * n
    return Scenario(
        dim=1,
        rho=0.0,
        trajectories=trajs,
        horizon=float(n),
        enforce_disjoint=False,
        target_time=float(n),
        name=f"pairs-{n}",
        expectations={
            "pair_separations": seps,
            "deadline": float(n),
            "deadline_degree": 1,
            "deadline_granularity": 1.0,
            "deadline_queries": n,
            "window": float(n),
            "continuous_demand": pairs_demand(n),
        },
    )


def _integral(v: float, what: str) -> int:
    if abs(v - round(v)) > 1e-9:
        raise FixtureError(f"{what} = {v} must be an integer")
    return int(round(v))


def gen_cluster_fixture(x: int, beta: float, cycles: int = 10) -> Scenario:
    """Two clusters of coincident points at distance 4(1 + beta x).

    The larger cluster holds ceil(n/2) of the n = (1 + beta) x + 1 points.
    """
    bx = _integral(beta * x, "beta * x")
    n = x + bx + 1
    size_a = (n + 1) // 2
    dist = 4.0 * (1 + bx)
    trajs = [Trajectory.stationary(_point(0.0)) for _ in range(size_a)]
    trajs += [Trajectory.stationary(_point(dist)) for _ in range(n - size_a)]
    return Scenario(
        dim=1,
        rho=0.0,
        trajectories=trajs,
        horizon=cycles * dist,
        enforce_disjoint=False,
        name=f"cluster-x{x}-b{beta:g}",
        expectations={
            "x": x,
            "beta": beta,
            "clusters": [list(range(size_a)), list(range(size_a, n))],
            "even_split": n % 2 == 0,
            "distance": dist,
            "active_per_cluster": bx + 1,
            "ply_bound": x,
            "ply_window": 2.0 * (1 + bx),
            "degree_bound": x + bx,
            "degree_window": dist,
            "degree_forced_distinct": n,
        },
    )


def gen_reversal_fixture(
    x: int, beta: float, periodic: bool = False, cycles: int = 1, horizon: float | None = None
) -> Scenario:
    """Two groups closing in on the origin from distance x + 4 beta x + 4.

    In each group the first beta x + 1 entities (the specials) turn around at
    time 2 beta x + 3; the rest reach the origin at the target time and stop.
    With ``periodic`` the non-specials retreat again and the specials return,
    so the start configuration recurs every twice the target time.
    """
    if x < 3 or x % 2 == 0:
        raise FixtureError(f"reversal fixture needs an odd x >= 3, got {x}")
    bx = _integral(beta * x, "beta * x")
    per_side = (x + 1) // 2 + bx
    k = bx + 1
    far = float(x + 4 * bx + 4)
    turn = float(2 * bx + 3)
    period = 2.0 * far
    cycles = cycles if periodic else 1
    if horizon is None:
        horizon = cycles * period

    def path(side: float, special: bool) -> Trajectory:
        pts: list[tuple[float, np.ndarray]] = []
        for c in range(cycles):
            s = c * period
            if special:
                pts += [(s, side * far), (s + turn, side * (far - turn)), (s + far, side * (2 * far - 2 * turn))]
            else:
                pts += [(s, side * far), (s + far, 0.0)]
        if periodic:
            pts.append((cycles * period, side * far))
        end_t, end_p = pts[-1]
        if horizon > end_t:
            if special and not periodic:
                end_p = side * (abs(end_p) + (horizon - end_t))
            pts.append((horizon, end_p))
        return Trajectory.from_waypoints([(t, [p]) for t, p in pts])

    trajs, specials = [], []
    for side_idx, side in enumerate((-1.0, 1.0)):
        for m in range(per_side):
            special = m < k
            if special:
                specials.append(side_idx * per_side + m)
            trajs.append(path(side, special))
    n = 2 * per_side
    return Scenario(
        dim=1,
        rho=0.0,
        trajectories=trajs,
        horizon=float(horizon),
        enforce_disjoint=False,
        target_time=far,
        name=f"reversal-x{x}-b{beta:g}",
        expectations={
            "x": x,
            "beta": beta,
            "sides": [list(range(per_side)), list(range(per_side, n))],
            "specials": specials,
            "start_distance": far,
            "reversal_time": turn,
            "window": turn,
            "degree_bound": x + bx,
            "ply_bound": x,
            "n": n,
            "granularity_ratio": ((1 + 2 * beta) * x + 1) / (2 * bx + 3),
            "sweep_end": float(n - 1),
            "periodic": periodic,
        },
    )


def reversal_ply_at_target(scn: Scenario, stale: set[int]) -> int:
    """Ply at the target time when the stale entities were last queried at
    time 0 and every other entity is queried exactly at the target."""
    tau = scn.target_time
    start = scn.positions_at(0.0)
    end = scn.positions_at(tau)
    centers = np.array([start[i] if i in stale else end[i] for i in range(scn.n)])
    radii = np.array([tau + scn.rho if i in stale else scn.rho for i in range(scn.n)])
    return congestion.ply(centers, radii, scn.dim).value


def reversal_forced_counts(scn: Scenario) -> dict:
    """How many entities a ply-safe scheme must refresh in the final window.

    ``oblivious`` treats every entity the same way (it cannot tell specials
    apart), so it refreshes everyone or no one. ``adversarial`` is the fewest
    refreshes that keep ply within bound for the worst labeling of specials;
    by symmetry stale sets are prefixes of each side, which is where the
    specials sit.
    """
    bound = scn.expectations["ply_bound"]
    side_a, side_b = scn.expectations["sides"]
    n = scn.n
    none_ok = reversal_ply_at_target(scn, set(range(n))) <= bound
    all_ok = reversal_ply_at_target(scn, set()) <= bound
    if none_ok:
        oblivious = 0
    elif all_ok:
        oblivious = n
    else:
        oblivious = -1
    best = n if all_ok else -1
    for sa in range(len(side_a) + 1):
        for sb in range(len(side_b) + 1):
            stale = set(side_a[:sa]) | set(side_b[:sb])
            if n - len(stale) < best and reversal_ply_at_target(scn, stale) <= bound:
                best = n - len(stale)
    return {"oblivious": oblivious, "adversarial": best, "n": n}


def gen_separating_pair() -> Scenario:
    """Two points whose gap grows from 1 to 2 over [0, 1]; demand integral 2 ln 2."""
    trajs = [
        Trajectory.stationary(_point(0.0)),
        Trajectory.from_waypoints([(0.0, [1.0]), (1.0, [2.0])]),
    ]
    return Scenario(
        dim=1,
        rho=0.0,
        trajectories=trajs,
        horizon=1.0,
        enforce_disjoint=False,
        name="separating-pair",
        expectations={"x": 1, "phi_integral": 2.0 * math.log(2.0)},
    )


def gen_grid(n: int, spacing: float = 4.0, rho: float = 0.5) -> Scenario:
    """Evenly spaced stationary entities on a line."""
    trajs = [Trajectory.stationary(_point(k * spacing)) for k in range(n)]
    return Scenario(dim=1, rho=rho, trajectories=trajs, horizon=1.0, name=f"grid-{n}")


def gen_random(
    seed: int,
    n: int,
    d: int,
    density: float,
    rho: float = 0.5,
    mobile: bool = False,
    wander: float = 1.0,
    horizon: float = 100.0,
    legs: int = 4,
    min_gap: float = 0.5,
    max_tries: int = 200,
) -> Scenario:
    """Seeded dart-throwing placement in a cube holding ``density`` entities
    per unit volume.

    Mobile entities wander within distance ``wander`` of their home point
    along ``legs`` random straight legs; homes are kept 2 rho + 2 wander +
    min_gap apart so the balls never touch.
    """
    if n < 1 or d < 1 or density <= 0:
        raise FixtureError("need n >= 1, d >= 1 and a positive density")
    rng = np.random.default_rng(seed)
    wander = wander if mobile else 0.0
    side = (n / density) ** (1.0 / d)
    need = 2.0 * rho + 2.0 * wander + min_gap
    homes: list[np.ndarray] = []
    for _ in range(max_tries * n):
        cand = rng.uniform(0.0, side, size=d)
        if all(np.linalg.norm(cand - h) >= need for h in homes):
            homes.append(cand)
            if len(homes) == n:
                break
    if len(homes) < n:
        raise FixtureError(f"placed only {len(homes)} of {n} entities; lower the density")

    trajs = []
    for h in homes:
        if not mobile:
            trajs.append(Trajectory.stationary(h))
            continue
        times = np.linspace(0.0, horizon, legs + 1)
        offsets = rng.normal(size=(legs + 1, d))
        offsets /= np.maximum(np.linalg.norm(offsets, axis=1, keepdims=True), 1e-12)
        offsets *= wander * rng.uniform(0.0, 1.0, size=(legs + 1, 1))
        offsets[0] = 0.0
        pts = h + offsets
        # keep every leg within the speed limit
        step = horizon / legs
        for k in range(1, legs + 1):
            delta = pts[k] - pts[k - 1]
            dist = np.linalg.norm(delta)
            if dist > step:
                pts[k] = pts[k - 1] + delta * (step / dist)
        trajs.append(Trajectory(times, pts))
    return Scenario(
        dim=d,
        rho=rho,
        trajectories=trajs,
        horizon=horizon,
        name=f"random-s{seed}-n{n}-d{d}",
        expectations={"seed": seed, "density": density, "mobile": mobile},
    )


FIXTURES = {
    "pairs": gen_pairs_fixture,
    "cluster": gen_cluster_fixture,
    "reversal": gen_reversal_fixture,
    "random": gen_random,
    "separating_pair": gen_separating_pair,
    "grid": gen_grid,
}
