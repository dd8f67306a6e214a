"""Slow reference implementations used as test oracles."""
from collections import deque
from itertools import combinations

import numpy as np


def bfs_component_count(n, edges):
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = [False] * n
    count = 0
    for s in range(n):
        if seen[s]:
            continue
        count += 1
        seen[s] = True
        q = deque([s])
        while q:
            v = q.popleft()
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    q.append(w)
    return count


def uncrossed_cuts(n, edges):
    """Indices i such that no edge joins {0..i} to {i+1..n-1}, by checking every cut against every edge."""
    out = []
    for i in range(n - 1):
        if not any(min(a, b) <= i < max(a, b) for a, b in edges):
            out.append(i)
    return out


def degree_isolated(n, edges):
    adj = np.zeros((n, n), dtype=int)
    for a, b in edges:
        adj[a, b] = adj[b, a] = 1
    return [v for v in range(n) if adj[v].sum() == 0]


def pair_order(points):
    """All pairs in the documented draw order (exact mode): i ascending, then j ascending."""
    return list(combinations(range(len(points)), 2))


def brute_edges(points, cf, uniforms):
    """Edges kept when pair k of :func:`pair_order` receives uniforms[k]; exact mode only."""
    x, L, torus = points.positions, points.length, points.boundary.value == "torus"
    edges = []
    for k, (i, j) in enumerate(pair_order(points)):
        d = abs(x[j] - x[i])
        if torus:
            d = min(d, L - d)
        if uniforms[k] < cf(float(d)):
            edges.append((i, j))
    return edges


def random_edge_list(rng, n, p):
    return [(a, b) for a, b in combinations(range(n), 2) if rng.random() < p]
