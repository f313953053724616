import itertools
import math

import numpy as np

from cpquery import congestion
from cpquery.congestion import build_pe_graph, clique_number, degree, measure_all, ply, ply_within, thickness


def brute_ply_2d(centers, radii, tol=1e-9):
    """Depth at every center and every pairwise circle crossing, via complex arithmetic."""
    pts = [complex(*c) for c in centers]
    zs = [complex(*c) for c in centers]
    for (z1, r1), (z2, r2) in itertools.combinations(zip(zs, radii), 2):
        d = abs(z2 - z1)
        if d == 0 or d > r1 + r2 + tol or d < abs(r1 - r2) - tol:
            continue
        a = (r1 * r1 - r2 * r2 + d * d) / (2 * d)
        h = math.sqrt(max(r1 * r1 - a * a, 0.0))
        u = (z2 - z1) / d
        base = z1 + a * u
        pts += [base + h * u * 1j, base - h * u * 1j]
    return max(
        sum(1 for z, r in zip(zs, radii) if abs(p - z) <= r + tol * max(1.0, r)) for p in pts
    )


def brute_ply_1d(lo, hi):
    best = 0
    for p in list(lo) + list(hi):
        best = max(best, sum(1 for a, b in zip(lo, hi) if a - 1e-9 <= p <= b + 1e-9))
    return best


def brute_chromatic(adj):
    n = len(adj)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if adj[i][j]]
    for k in range(1, n + 1):
        for colors in itertools.product(range(k), repeat=n):
            if colors[0] != 0:
                continue
            if all(colors[i] != colors[j] for i, j in edges):
                return k
    return n


def random_disks(rng, n, spread=10.0):
    return rng.uniform(0, spread, size=(n, 2)), rng.uniform(0.3, 3.0, size=n)


class TestDegree:
    def test_counts_itself(self):
        g = build_pe_graph(np.array([[0.0], [10.0]]), np.array([1.0, 1.0]))
        assert degree(g) == (1, [1, 1])

    def test_touching_regions_intersect(self):
        g = build_pe_graph(np.array([[0.0], [2.0]]), np.array([1.0, 1.0]))
        assert degree(g)[0] == 2
        assert g.edges() == [(0, 1)]

    def test_unbounded_region_meets_everything(self):
        centers = np.array([[np.nan], [0.0], [100.0]])
        g = build_pe_graph(centers, np.array([np.inf, 1.0, 1.0]))
        assert degree(g) == (3, [3, 2, 2])


class TestPly:
    def test_one_dimensional_sweep_matches_brute_force(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            n = int(rng.integers(1, 15))
            c = rng.uniform(0, 20, size=n)
            r = rng.uniform(0, 4, size=n)
            got = ply(c.reshape(-1, 1), r, 1)
            assert got.exact
            assert got.value == brute_ply_1d(c - r, c + r)

    def test_touching_intervals_share_a_point(self):
        assert ply(np.array([[0.0], [2.0]]), np.array([1.0, 1.0]), 1).value == 2

    def test_planar_matches_candidate_point_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            n = int(rng.integers(1, 16))
            c, r = random_disks(rng, n)
            got = ply(c, r, 2)
            assert got.exact
            assert got.value == brute_ply_2d(c.tolist(), r.tolist())

    def test_unbounded_regions_add_to_every_point(self):
        c = np.array([[0.0, 0.0], [5.0, 5.0], [np.nan, np.nan]])
        r = np.array([1.0, 1.0, np.inf])
        assert ply(c, r, 2).value == 2

    def test_three_dimensional_is_flagged_lower_bound(self):
        rng = np.random.default_rng(2)
        c = rng.uniform(0, 5, size=(6, 3))
        r = np.full(6, 2.0)
        got = ply(c, r, 3)
        assert not got.exact
        assert 1 <= got.value <= 6

    def test_ply_within_is_the_depth_inside_one_region(self):
        c = np.array([[0.0], [1.5], [10.0], [10.5]])
        r = np.array([1.0, 1.0, 1.0, 1.0])
        assert ply_within(c, r, 1, 0).value == 2
        assert ply_within(c, r, 1, 2).value == 2
        c2 = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.8], [20.0, 0.0]])
        r2 = np.array([1.0, 1.0, 1.0, 1.0])
        assert ply_within(c2, r2, 2, 0).value == 3
        assert ply_within(c2, r2, 2, 3).value == 1


class TestThickness:
    def test_exact_matches_brute_force_coloring(self):
        rng = np.random.default_rng(9)
        for _ in range(60):
            n = int(rng.integers(1, 11))
            c, r = random_disks(rng, n, spread=8.0)
            g = build_pe_graph(c, r)
            chi, exact = thickness(g)
            assert exact
            adj = g.adj.tolist()
            assert chi == brute_chromatic([[adj[i][j] and i != j for j in range(n)] for i in range(n)])

    def test_odd_cycle_needs_three_colors(self):
        adj = np.eye(5, dtype=bool)
        for i in range(5):
            adj[i, (i + 1) % 5] = adj[(i + 1) % 5, i] = True
        assert thickness(congestion.PEGraph(adj)) == (3, True)

    def test_large_graphs_fall_back_to_greedy(self):
        rng = np.random.default_rng(1)
        c, r = random_disks(rng, 30, spread=30.0)
        chi, exact = thickness(build_pe_graph(c, r))
        assert not exact and chi >= 1

    def test_measure_chain(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            n = int(rng.integers(2, 12))
            c, r = random_disks(rng, n)
            m = measure_all(c, r, 2)
            g = build_pe_graph(c, r)
            assert m["ply"] <= clique_number(g) <= m["thickness"] <= m["degree"]
