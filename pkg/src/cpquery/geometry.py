"""Static geometry of an entity configuration.

Separations, x-balls, their inflations, and the dimension-dependent packing
constants used by the query schemes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

TOL = 1e-9

# Kissing numbers; the largest x with a zero x-th separation is kiss + 1.
_KISSING = {1: 2, 2: 6, 3: 12, 4: 24}


class InvalidRegimeError(ValueError):
    """Raised when x is too small for the packing constants to be positive."""


@dataclass(frozen=True, eq=False)
class Configuration:
    """Positions of all entity centers at one instant.

    Attributes:
        dim: Ambient dimension d.
        rho: Common entity radius.
        centers: Array of shape (n, dim).
        enforce_disjoint: Require nonnegative pairwise separations.
    """

    dim: int
    rho: float
    centers: np.ndarray
    enforce_disjoint: bool = False

    def __post_init__(self) -> None:
        centers = np.asarray(self.centers, dtype=float)
        if centers.ndim == 1 and self.dim == 1:
            centers = centers.reshape(-1, 1)
        if centers.ndim != 2 or (centers.size and centers.shape[1] != self.dim):
            raise ValueError(f"centers must have shape (n, {self.dim}), got {centers.shape}")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.rho < 0:
            raise ValueError("rho must be nonnegative")
        object.__setattr__(self, "centers", centers)
        if self.enforce_disjoint and self.n > 1:
            seps = self.separation_matrix()
            np.fill_diagonal(seps, np.inf)
            if seps.min() < -TOL:
                i, j = np.unravel_index(np.argmin(seps), seps.shape)
                raise ValueError(f"entities {i} and {j} overlap (separation {seps[i, j]:.3g})")

    @property
    def n(self) -> int:
        return self.centers.shape[0]

    def distance_matrix(self) -> np.ndarray:
        diff = self.centers[:, None, :] - self.centers[None, :, :]
        return np.sqrt((diff * diff).sum(axis=-1))

    def separation_matrix(self) -> np.ndarray:
        return self.distance_matrix() - 2.0 * self.rho


def _check_index(cfg: Configuration, i: int) -> None:
    if not 0 <= i < cfg.n:
        raise IndexError(f"entity index {i} out of range for n={cfg.n}")


def _check_x(cfg: Configuration, x: int) -> None:
    if x < 1:
        raise ValueError("x must be a positive integer")
    if x > cfg.n - 1:
        raise ValueError(f"x={x} needs at least {x + 1} entities, have {cfg.n}")


def separation(cfg: Configuration, i: int, j: int) -> float:
    """Distance between the boundaries of entities i and j."""
    _check_index(cfg, i)
    _check_index(cfg, j)
    if i == j:
        raise ValueError("separation needs two distinct entities")
    return float(np.linalg.norm(cfg.centers[i] - cfg.centers[j]) - 2.0 * cfg.rho)


def neighbor_order(cfg: Configuration, i: int) -> np.ndarray:
    """Other entities sorted by separation from i, ties by index."""
    _check_index(cfg, i)
    d = np.linalg.norm(cfg.centers - cfg.centers[i], axis=1)
    others = np.array([j for j in range(cfg.n) if j != i], dtype=int)
    return others[np.argsort(d[others], kind="stable")]


def x_separation(cfg: Configuration, i: int, x: int) -> float:
    """Separation between entity i and its x-th closest neighbor."""
    _check_index(cfg, i)
    _check_x(cfg, x)
    seps = np.linalg.norm(cfg.centers - cfg.centers[i], axis=1) - 2.0 * cfg.rho
    seps = np.delete(seps, i)
    return float(np.partition(seps, x - 1)[x - 1])


def x_separations(cfg: Configuration, x: int) -> np.ndarray:
    """Vector of x-separations for every entity."""
    _check_x(cfg, x)
    seps = cfg.separation_matrix()
    np.fill_diagonal(seps, np.inf)
    return np.partition(seps, x - 1, axis=1)[:, x - 1]


def x_radius(cfg: Configuration, i: int, x: int) -> float:
    return cfg.rho + x_separation(cfg, i, x)


def x_radii(cfg: Configuration, x: int) -> np.ndarray:
    return cfg.rho + x_separations(cfg, x)


def x_ball(cfg: Configuration, i: int, x: int) -> tuple[np.ndarray, float]:
    """Center and radius of the closed x-ball of entity i."""
    return cfg.centers[i].copy(), x_radius(cfg, i, x)


def gamma_x_neighbors(cfg: Configuration, i: int, x: int, tol: float = TOL) -> set[int]:
    """Entities whose bodies meet the open interior of the x-ball of i.

    A coincident entity always counts, even when the x-ball is degenerate.
    """
    sigma = x_separation(cfg, i, x)
    d = np.linalg.norm(cfg.centers - cfg.centers[i], axis=1)
    reach = sigma + 2.0 * cfg.rho
    inside = (d < reach - tol) | (d <= tol)
    return {int(j) for j in np.nonzero(inside)[0]}


@dataclass(frozen=True)
class DimConstants:
    """Packing constants for dimension d and congestion bound x.

    ``c`` is a lower bound on the true packing constant, so ``lam`` is
    conservative. ``exact`` records whether c is the true value.
    """

    dim: int
    x: int
    c: float
    lam: float
    x_hat: int
    exact: bool
    A: Callable[[float], int]


def x_hat(d: int) -> int:
    if d not in _KISSING:
        raise ValueError(f"no packing constants for dimension {d}")
    return _KISSING[d] + 1


def _annulus_count_bound(x: int) -> float:
    """Lower bound on c_{2,x} from counting centers in the annulus [2, 2 + c].

    Unit disks with separation at most c from a unit disk B have centers at
    distance in [2, 2 + c] from B's center and at least 2 from each other.
    For outer radius R <= 4 the angle they subtend at B's center is at least
    arccos(max(R/4, 1 - 2/R^2)), which caps how many fit.
    """
    cos_t = math.cos(2.0 * math.pi / (x - 1))
    r_star = min(4.0 * cos_t, math.sqrt(2.0 / (1.0 - cos_t)))
    return max(0.0, r_star - 2.0)


def packing_constant(d: int, x: int) -> tuple[float, bool]:
    """Return (c, exact) with c a lower bound on c_{d,x}."""
    if d == 1:
        return 2.0 * math.ceil((x - 3) / 2.0), True
    c = x ** (1.0 / d) - 3.0
    if d == 2:
        c = max(c, _annulus_count_bound(x))
    return c, False


def ball_cover_constant(d: int, alpha: float) -> int:
    """A_{d,alpha}: max number of directions pairwise at angle >= 2 asin(1/(4 alpha))."""
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    if d == 1:
        return 2
    if d == 2:
        theta = 2.0 * math.asin(1.0 / (4.0 * alpha))
        return int(math.floor(2.0 * math.pi / theta))
    raise NotImplementedError(f"A_{{d,alpha}} is not available for d={d}")


def dim_constants(d: int, x: int) -> DimConstants:
    """Packing constants for (d, x); x must exceed the degenerate threshold."""
    xh = x_hat(d)
    if x <= xh:
        raise InvalidRegimeError(f"x={x} must exceed x_hat={xh} in dimension {d}")
    c, exact = packing_constant(d, x)
    if c <= 0:
        raise InvalidRegimeError(f"no positive packing bound for d={d}, x={x}")
    return DimConstants(
        dim=d,
        x=x,
        c=c,
        lam=c / (1.0 + c),
        x_hat=xh,
        exact=exact,
        A=lambda alpha, _d=d: ball_cover_constant(_d, alpha),
    )


def scheme_lambda(d: int, x: int, rho: float) -> float:
    """Lambda used by schemes: packing-based, or 1 for point entities."""
    if rho == 0:
        return 1.0
    return dim_constants(d, x).lam


def verify_ball_cover(
    cfg: Configuration,
    center: np.ndarray,
    radius: float,
    x: int,
    alpha: float,
    tol: float = TOL,
) -> int:
    """Count entities whose alpha-inflated x-ball meets ball(center, radius)
    and is at least as large as it."""
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    inflated = alpha * x_radii(cfg, x)
    d = np.linalg.norm(cfg.centers - np.asarray(center, dtype=float), axis=1)
    hit = (inflated >= radius - tol) & (d <= inflated + radius + tol)
    return int(hit.sum())
