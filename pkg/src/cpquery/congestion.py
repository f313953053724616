"""Congestion potential of a set of uncertainty regions: degree, ply and thickness.

Regions are passed as parallel arrays of centers (n, d) and radii (n,).
An infinite radius marks a region that covers everything; its center is
ignored and may be NaN.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np

from .geometry import TOL

EXACT_THICKNESS_LIMIT = 20
DEFAULT_SAMPLES = 10_000


def _as_arrays(centers, radii) -> tuple[np.ndarray, np.ndarray]:
    radii = np.asarray(radii, dtype=float).reshape(-1)
    centers = np.asarray(centers, dtype=float)
    if centers.ndim == 1:
        centers = centers.reshape(len(radii), -1)
    return centers, radii


def regions_to_arrays(regions) -> tuple[np.ndarray, np.ndarray]:
    """Convert a list of UncertaintyRegion objects to (centers, radii)."""
    centers = np.vstack([np.atleast_1d(r.center) for r in regions])
    radii = np.array([r.radius for r in regions], dtype=float)
    return centers, radii


def adjacency(centers, radii, tol: float = TOL) -> np.ndarray:
    """Boolean closed-intersection matrix, diagonal included."""
    centers, radii = _as_arrays(centers, radii)
    inf = ~np.isfinite(radii)
    c = np.where(inf[:, None], 0.0, centers)
    diff = c[:, None, :] - c[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=-1))
    with np.errstate(invalid="ignore"):
        adj = dist <= radii[:, None] + radii[None, :] + tol
    adj |= inf[:, None] | inf[None, :]
    np.fill_diagonal(adj, True)
    return adj


@dataclass(eq=False)
class PEGraph:
    """Potential-encroachment graph; ``adj`` includes the diagonal."""

    adj: np.ndarray

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    def neighbors(self, i: int) -> list[int]:
        return [int(j) for j in np.nonzero(self.adj[i])[0] if j != i]

    def edges(self) -> list[tuple[int, int]]:
        iu, ju = np.nonzero(np.triu(self.adj, k=1))
        return list(zip(iu.tolist(), ju.tolist()))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges())
        return g


def build_pe_graph(centers, radii=None, tol: float = TOL) -> PEGraph:
    """Build the PE graph from arrays, or from a list of regions when radii is None."""
    if radii is None:
        centers, radii = regions_to_arrays(centers)
    return PEGraph(adjacency(centers, radii, tol))


def degree(g: PEGraph) -> tuple[int, list[int]]:
    """Max and per-entity degree, each entity counting itself."""
    per = g.adj.sum(axis=1).astype(int)
    return (int(per.max()) if g.n else 0), per.tolist()


@dataclass(frozen=True)
class PlyResult:
    value: int
    exact: bool


def _depths(points: np.ndarray, centers: np.ndarray, radii: np.ndarray, tol: float) -> np.ndarray:
    if len(points) == 0 or len(radii) == 0:
        return np.zeros(len(points), dtype=int)
    diff = points[:, None, :] - centers[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=-1))
    slack = tol * np.maximum(1.0, radii)
    return (dist <= radii[None, :] + slack[None, :]).sum(axis=1)


def _circle_intersections(centers: np.ndarray, radii: np.ndarray, tol: float) -> np.ndarray:
    """All pairwise circle-circle intersection points (tangencies included)."""
    n = len(radii)
    if n < 2:
        return np.zeros((0, 2))
    iu, ju = np.triu_indices(n, k=1)
    c1, c2 = centers[iu], centers[ju]
    r1, r2 = radii[iu], radii[ju]
    delta = c2 - c1
    d = np.sqrt((delta * delta).sum(axis=1))
    ok = (d > tol) & (d <= r1 + r2 + tol) & (d >= np.abs(r1 - r2) - tol)
    if not ok.any():
        return np.zeros((0, 2))
    c1, delta, d, r1, r2 = c1[ok], delta[ok], d[ok], r1[ok], r2[ok]
    a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d)
    h = np.sqrt(np.clip(r1 * r1 - a * a, 0.0, None))
    u = delta / d[:, None]
    perp = np.column_stack([-u[:, 1], u[:, 0]])
    base = c1 + a[:, None] * u
    return np.vstack([base + h[:, None] * perp, base - h[:, None] * perp])


def _ply_1d(lo: np.ndarray, hi: np.ndarray, tol: float) -> int:
    """Max depth of closed intervals by an endpoint sweep."""
    if len(lo) == 0:
        return 0
    # starts sort before ends at equal coordinates so touching intervals overlap
    events = sorted([(float(a), 0) for a in lo] + [(float(b) + tol, 1) for b in hi])
    depth = best = 0
    for _, kind in events:
        if kind == 0:
            depth += 1
            best = max(best, depth)
        else:
            depth -= 1
    return best


def _split(centers, radii):
    centers, radii = _as_arrays(centers, radii)
    finite = np.isfinite(radii)
    return centers[finite], radii[finite], int((~finite).sum())


def ply(
    centers,
    radii=None,
    dim: int | None = None,
    tol: float = TOL,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> PlyResult:
    """Maximum number of regions sharing a point.

    Exact for d = 1 and d = 2; for d >= 3 the value is a sampled lower bound.
    """
    if radii is None:
        centers, radii = regions_to_arrays(centers)
    centers, radii = _as_arrays(centers, radii)
    dim = centers.shape[1] if dim is None else dim
    c, r, n_inf = _split(centers, radii)
    if len(r) == 0:
        return PlyResult(n_inf, True)
    if dim == 1:
        return PlyResult(n_inf + _ply_1d(c[:, 0] - r, c[:, 0] + r, tol), True)
    if dim == 2:
        pts = np.vstack([c, _circle_intersections(c, r, tol)])
        return PlyResult(n_inf + int(_depths(pts, c, r, tol).max()), True)
    pts = _sample_points(c, r, samples, seed)
    return PlyResult(n_inf + int(_depths(pts, c, r, tol).max()), False)


def _sample_points(c: np.ndarray, r: np.ndarray, samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    pts = [c]
    n = len(r)
    if n > 1:
        iu, ju = np.triu_indices(n, k=1)
        delta = c[ju] - c[iu]
        d = np.linalg.norm(delta, axis=1)
        safe = np.where(d > 0, d, 1.0)
        a = np.clip((r[iu] ** 2 - r[ju] ** 2 + d * d) / (2.0 * safe), 0.0, d)
        pts.append(c[iu] + (a / safe)[:, None] * delta)
    lo = (c - r[:, None]).min(axis=0)
    hi = (c + r[:, None]).max(axis=0)
    pts.append(rng.uniform(lo, hi, size=(samples, c.shape[1])))
    return np.vstack(pts)


def ply_within(
    centers,
    radii,
    dim: int,
    i: int,
    tol: float = TOL,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> PlyResult:
    """Max depth over points of region i (region i itself counted)."""
    centers, radii = _as_arrays(centers, radii)
    if not np.isfinite(radii[i]):
        return ply(centers, radii, dim, tol, samples, seed)
    c, r, n_inf = _split(centers, radii)
    ci, ri = centers[i], radii[i]
    # only regions meeting region i can contribute
    near = np.linalg.norm(c - ci, axis=1) <= r + ri + tol
    c, r = c[near], r[near]
    if dim == 1:
        lo, hi = c[:, 0] - r, c[:, 0] + r
        cand = np.concatenate([lo, hi, [ci[0] - ri]])
        cand = cand[(cand >= ci[0] - ri - tol) & (cand <= ci[0] + ri + tol)]
        pts = np.clip(cand, ci[0] - ri, ci[0] + ri).reshape(-1, 1)
        exact = True
    elif dim == 2:
        pts = np.vstack([c, _circle_intersections(c, r, tol), ci.reshape(1, -1)])
        exact = True
    else:
        pts = _sample_points(c, r, samples, seed)
        exact = False
    inside = np.linalg.norm(pts - ci, axis=1) <= ri + tol * max(1.0, ri)
    pts = pts[inside]
    return PlyResult(n_inf + int(_depths(pts, c, r, tol).max()), exact)


def greedy_coloring(g: PEGraph) -> dict[int, int]:
    return nx.greedy_color(g.to_networkx(), strategy="smallest_last")


def _exact_chromatic(adj: np.ndarray, upper: int) -> int:
    """Branch and bound over DSATUR orderings."""
    n = adj.shape[0]
    nbrs = [np.nonzero(adj[v])[0].tolist() for v in range(n)]
    nbrs = [[u for u in nb if u != v] for v, nb in enumerate(nbrs)]
    colors = [-1] * n
    best = upper

    def pick() -> int:
        chosen, key = -1, (-1, -1)
        for v in range(n):
            if colors[v] >= 0:
                continue
            sat = len({colors[u] for u in nbrs[v] if colors[u] >= 0})
            k = (sat, len(nbrs[v]))
            if k > key:
                chosen, key = v, k
        return chosen

    def search(colored: int, used: int) -> None:
        nonlocal best
        if used >= best:
            return
        if colored == n:
            best = used
            return
        v = pick()
        taken = {colors[u] for u in nbrs[v]}
        for col in range(min(used + 1, best - 1)):
            if col in taken:
                continue
            colors[v] = col
            search(colored + 1, max(used, col + 1))
            colors[v] = -1

    search(0, 0)
    return best


def thickness(g: PEGraph, exact_limit: int = EXACT_THICKNESS_LIMIT) -> tuple[int, bool]:
    """Chromatic number of the PE graph and whether it is exact."""
    if g.n == 0:
        return 0, True
    greedy = greedy_coloring(g)
    upper = max(greedy.values()) + 1
    if g.n > exact_limit:
        return upper, False
    return _exact_chromatic(g.adj, upper), True


def clique_number(g: PEGraph) -> int:
    if g.n == 0:
        return 0
    return max(len(c) for c in nx.find_cliques(g.to_networkx()))


def measure_all(centers, radii, dim: int, tol: float = TOL, exact_limit: int = EXACT_THICKNESS_LIMIT) -> dict:
    """Degree, ply and thickness of one region set, as a flat dict."""
    g = build_pe_graph(centers, radii, tol)
    delta, _ = degree(g)
    p = ply(centers, radii, dim, tol)
    chi, chi_exact = thickness(g, exact_limit)
    return {
        "degree": delta,
        "ply": p.value,
        "ply_exact": p.exact,
        "thickness": chi,
        "thickness_exact": chi_exact,
    }
