"""Randomized checks of the geometric inequalities everything else relies on."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    TOL,
    Configuration,
    ball_cover_constant,
    dim_constants,
    verify_ball_cover,
    x_hat,
    x_radii,
    x_separations,
)


def random_configuration(rng: np.random.Generator, n: int, dim: int, rho: float, side: float) -> Configuration:
    """Rejection-sampled disjoint balls in a cube of the given side."""
    centers: list[np.ndarray] = []
    for _ in range(1000 * n):
        c = rng.uniform(0.0, side, size=dim)
        if all(np.linalg.norm(c - o) >= 2.0 * rho for o in centers):
            centers.append(c)
            if len(centers) == n:
                break
    if len(centers) < n:
        raise ValueError("could not place disjoint balls; enlarge the cube")
    return Configuration(dim, rho, np.array(centers), enforce_disjoint=True)


def neighbor_inequality_violations(cfg: Configuration, tol: float = TOL) -> int:
    """Pairs (i, j, x) breaking sigma_j(x) <= |z_j - z_i| + sigma_i(x), or
    breaking r_j(x) <= rho + 2 r_i(x) while e_j meets the x-ball of e_i.

    The radius form only makes sense for such neighbors: a far entity can
    have an arbitrarily larger x-radius.
    """
    dist = cfg.distance_matrix()
    bad = 0
    for x in range(1, cfg.n):
        r = x_radii(cfg, x)
        s = x_separations(cfg, x)
        near = dist <= r[:, None] + cfg.rho + tol
        bad += int((near & (r[None, :] > cfg.rho + 2.0 * r[:, None] + tol)).sum())
        bad += int((s[None, :] > dist + s[:, None] + tol).sum())
    return bad


def packing_inequality_violations(cfg: Configuration, tol: float = TOL) -> int:
    """Entities breaking rho <= (1 - lam)/lam * sigma or r <= sigma / lam,
    over every x in the valid regime."""
    bad = 0
    for x in range(x_hat(cfg.dim) + 1, cfg.n):
        lam = dim_constants(cfg.dim, x).lam
        s = x_separations(cfg, x)
        r = x_radii(cfg, x)
        bad += int((cfg.rho > (1.0 - lam) / lam * s + tol).sum())
        bad += int((r > s / lam + tol).sum())
    return bad


def ball_cover_excess(cfg: Configuration, center, radius: float, x: int, alpha: float) -> int:
    """How far the inflated-ball count exceeds A_{d,alpha} * x (0 when within)."""
    count = verify_ball_cover(cfg, center, radius, x, alpha)
    return max(0, count - ball_cover_constant(cfg.dim, alpha) * x)


@dataclass
class SuiteResult:
    instances: int = 0
    cover_violations: int = 0
    neighbor_violations: int = 0
    packing_violations: int = 0
    details: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.cover_violations == 0 and self.neighbor_violations == 0 and self.packing_violations == 0


def run_suite(seed: int = 0, instances: int = 1000, dim: int = 2) -> SuiteResult:
    """Draw random configurations and balls and count inequality failures."""
    rng = np.random.default_rng(seed)
    out = SuiteResult()
    for k in range(instances):
        n = int(rng.integers(x_hat(dim) + 3, 41))
        rho = float(rng.choice([0.0, 0.5, 1.0]))
        side = float(rng.uniform(2.0, 6.0)) * (2.0 * rho + 1.0) * n ** (1.0 / dim)
        cfg = random_configuration(rng, n, dim, rho, side)
        x = int(rng.integers(1, n))
        alpha = float(rng.choice([1.0, 3.0]))
        center = rng.uniform(-0.1 * side, 1.1 * side, size=dim)
        radius = float(np.exp(rng.uniform(np.log(1e-3), np.log(side))))
        excess = ball_cover_excess(cfg, center, radius, x, alpha) if dim <= 2 else 0
        nv = neighbor_inequality_violations(cfg)
        pv = packing_inequality_violations(cfg) if rho > 0 else 0
        out.instances += 1
        out.cover_violations += int(excess > 0)
        out.neighbor_violations += nv
        out.packing_violations += pv
        if excess or nv or pv:
            out.details.append(f"instance {k}: cover excess {excess}, neighbor {nv}, packing {pv}")
    return out
