"""Shared helpers for the test suite."""

import math

import numpy as np

import lyapcert as lc


def expanding_zoo():
    """Critical-point-free built-ins used for randomized identities."""
    return [
        lc.DoublingMap(),
        lc.PerturbedDoubling(0.05),
        lc.PerturbedDoubling(0.02),
        lc.ToralEndomorphism([[2, 1], [1, 1]]),
        lc.ToralEndomorphism([[1, 1], [1, 0]]),
        lc.ProductMap(lc.DoublingMap(), lc.ToralEndomorphism([[3]])),
        lc.PolynomialMap([0.0, 1.0, 1.0], "torus"),
    ]


def cat_map():
    return lc.ToralEndomorphism([[2, 1], [1, 1]])


CAT_TOP_EXPONENT = math.log((3.0 + math.sqrt(5.0)) / 2.0)


def all_simple_cycle_means(n, edges):
    """Brute-force oracle: mean weight of every simple cycle.

    DFS rooted at each start node, visiting only nodes with larger
    index, so each simple cycle is enumerated exactly once.
    """
    adj = {}
    for s, t, w in edges:
        adj.setdefault(s, []).append((t, w))
    means = []

    def dfs(start, node, weights, visited):
        for t, w in adj.get(node, []):
            if t == start:
                ws = weights + [w]
                means.append(math.fsum(ws) / len(ws))
            elif t > start and t not in visited:
                visited.add(t)
                dfs(start, t, weights + [w], visited)
                visited.remove(t)

    for s in range(n):
        dfs(s, s, [], {s})
    return means


def random_edge_list(rng, max_nodes=8, max_edges=20):
    n = int(rng.randint(2, max_nodes + 1))
    m = int(rng.randint(1, max_edges + 1))
    edges = {}
    for _ in range(m):
        s = int(rng.randint(n))
        t = int(rng.randint(n))
        edges[(s, t)] = float(rng.uniform(-1.0, 1.0))
    return n, [(s, t, w) for (s, t), w in edges.items()]


def random_bundle_point(rng, dim):
    x = rng.rand(dim)
    v = rng.randn(dim)
    while np.linalg.norm(v) < 1e-6:
        v = rng.randn(dim)
    return lc.SphereBundlePoint(x, v)
