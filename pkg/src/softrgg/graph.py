"""Soft random geometric graph realizations and their connected components."""
from __future__ import annotations

import io
import os
from dataclasses import dataclass, field

import numba
import numpy as np

from .connection import ConnectionFunction, GeneralizedExponential
from .errors import InvalidParameterError
from .point_process import EDGE_STREAM, BoundaryMode, PointSet, as_generator

DEFAULT_TAIL_EPSILON = 1e-12


@numba.njit(cache=True)
def _find(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


@numba.njit(cache=True)
def _union_find_labels(n, ei, ej):
    parent = np.arange(n)
    for k in range(ei.size):
        a = _find(parent, ei[k])
        b = _find(parent, ej[k])
        if a != b:
            # smaller index becomes the root
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
    labels = np.empty(n, np.int64)
    root_label = np.full(n, -1, np.int64)
    count = 0
    for i in range(n):
        r = _find(parent, i)
        if root_label[r] < 0:
            root_label[r] = count
            count += 1
        labels[i] = root_label[r]
    return count, labels


class DisjointSet:
    """Plain union-find with path halving, for incremental use outside the kernel."""

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if ra < rb:
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb
        return True


def connected_components(n_nodes: int, edges) -> tuple[int, np.ndarray]:
    """Component count and labels, numbered 0.. in order of each component's leftmost node."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size and (edges.min() < 0 or edges.max() >= n_nodes):
        raise InvalidParameterError("edge references a node index out of range")
    count, labels = _union_find_labels(int(n_nodes), np.ascontiguousarray(edges[:, 0]),
                                       np.ascontiguousarray(edges[:, 1]))
    return int(count), labels


@dataclass(frozen=True, eq=False)
class GraphSample:
    points: PointSet
    edges: np.ndarray = field(repr=False)
    component_label: np.ndarray = field(repr=False)
    component_count: int
    cutoff_used: float = 0.0
    seed: int | None = None

    @classmethod
    def from_edges(cls, points: PointSet, edges, cutoff_used: float = 0.0, seed: int | None = None) -> "GraphSample":
        """Assemble a sample from an explicit edge list, validating and normalizing it to i < j."""
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        n = len(points)
        if e.size:
            if e.min() < 0 or e.max() >= n:
                raise InvalidParameterError("edge references a node index out of range")
            if np.any(e[:, 0] == e[:, 1]):
                raise InvalidParameterError("self edges are not allowed")
            e = np.sort(e, axis=1)
            if np.unique(e, axis=0).shape[0] != e.shape[0]:
                raise InvalidParameterError("duplicate edges are not allowed")
        count, labels = connected_components(n, e)
        e.flags.writeable = False
        labels.flags.writeable = False
        return cls(points, e, labels, count, float(cutoff_used), seed)

    @property
    def n_nodes(self) -> int:
        return len(self.points)

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    def degrees(self) -> np.ndarray:
        n = self.n_nodes
        return np.bincount(self.edges[:, 0], minlength=n) + np.bincount(self.edges[:, 1], minlength=n)

    def __eq__(self, other):
        if not isinstance(other, GraphSample):
            return NotImplemented
        return (self.points == other.points and np.array_equal(self.edges, other.edges)
                and self.cutoff_used == other.cutoff_used and self.seed == other.seed)


def _forward_pairs(n, counts):
    """Pairs (i, i+1), ..., (i, i+counts[i]) for every i, grouped by i."""
    total = int(counts.sum())
    idx = np.arange(n, dtype=np.int64)
    i = np.repeat(idx, counts)
    # j = i + 1 + (position within the row)
    shift = np.repeat(np.cumsum(counts) - counts - idx - 1, counts)
    j = np.arange(total, dtype=np.int64) - shift
    return i, j, np.cumsum(counts)


def candidate_pairs(points: PointSet, cutoff: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Index pairs i < j within distance ``cutoff`` (inf for all pairs), i ascending then j ascending.

    Returns (i, j, distance).
    """
    x = points.positions
    n = x.size
    L = points.length
    idx = np.arange(n, dtype=np.int64)
    torus = points.boundary is BoundaryMode.TORUS
    if cutoff < 0 or n < 2:
        z = np.zeros(0, dtype=np.int64)
        return z, z, np.zeros(0)
    if not np.isfinite(cutoff) or (torus and 2.0 * cutoff >= L):
        i, j, _ = _forward_pairs(n, n - idx - 1)
    else:
        hi = np.searchsorted(x, x + cutoff, side="right")
        i, j, row_end = _forward_pairs(n, hi - idx - 1)
        if torus:
            # pairs closing around the seam: x[j] >= x[i] + L - cutoff, placed after row i's forward pairs
            wrap_lo = np.searchsorted(x, x + (L - cutoff), side="left")
            wi, wj, _ = _forward_pairs(n, n - wrap_lo)
            wj += np.repeat(wrap_lo - idx - 1, n - wrap_lo)
            if wi.size:
                at = row_end[wi]
                i = np.insert(i, at, wi)
                j = np.insert(j, at, wj)
    d = x[j] - x[i]
    if torus:
        d = np.minimum(d, L - d)
    return i, j, d


def pruning_cutoff(cf: ConnectionFunction, tail_epsilon: float) -> float:
    """Distance r(eps) beyond which pairs are skipped; inf in exact mode, -1 if no pair can connect."""
    if not 0 <= tail_epsilon < 1:
        raise InvalidParameterError(f"tail_epsilon must lie in [0, 1), got {tail_epsilon}")
    if tail_epsilon == 0:
        return np.inf
    if tail_epsilon >= cf.at_zero:
        return -1.0
    return cf.generalized_inverse(tail_epsilon)


@numba.njit(cache=True)
def _genexp_edges(x, length, torus, fwd_hi, wrap_lo, u, a, beta, eta):
    n = x.size
    ei = np.empty(u.size, np.int64)
    ej = np.empty(u.size, np.int64)
    m = 0
    k = 0
    for i in range(n):
        for seg in range(2):
            lo = i + 1 if seg == 0 else wrap_lo[i]
            hi = fwd_hi[i] if seg == 0 else n
            for j in range(lo, hi):
                d = x[j] - x[i]
                if torus:
                    d = min(d, length - d)
                t = d / a
                if eta == 2.0:
                    t = t * t
                elif eta != 1.0:
                    t = t**eta
                if u[k] < beta * np.exp(-t):
                    ei[m] = i
                    ej[m] = j
                    m += 1
                k += 1
    return ei[:m], ej[:m]


def _window_bounds(points: PointSet, cutoff: float):
    """Per-node forward window end and wrap-around window start (n when absent)."""
    x = points.positions
    n = x.size
    full = np.full(n, n, dtype=np.int64)
    if not np.isfinite(cutoff) or (points.boundary is BoundaryMode.TORUS and 2.0 * cutoff >= points.length):
        return full, full
    hi = np.searchsorted(x, x + cutoff, side="right").astype(np.int64)
    if points.boundary is BoundaryMode.TORUS:
        return hi, np.searchsorted(x, x + (points.length - cutoff), side="left").astype(np.int64)
    return hi, full


def sample_graph(points: PointSet, cf: ConnectionFunction, rng=None,
                 tail_epsilon: float = DEFAULT_TAIL_EPSILON) -> GraphSample:
    """Draw independent Bernoulli(H(r_ij)) edges over the points.

    With ``tail_epsilon > 0`` only pairs closer than ``cf.generalized_inverse(tail_epsilon)``
    are considered. One uniform is consumed per considered pair, in the order
    (i ascending, j ascending); the edge is present iff that uniform is below H.
    """
    gen, seed = as_generator(rng, EDGE_STREAM)
    cutoff = pruning_cutoff(cf, tail_epsilon)
    n = len(points)
    if isinstance(cf, GeneralizedExponential) and cutoff >= 0 and n >= 2:
        hi, wrap_lo = _window_bounds(points, cutoff)
        idx = np.arange(n)
        n_pairs = int((hi - idx - 1).sum() + (n - wrap_lo).sum())
        u = gen.random(n_pairs)
        ei, ej = _genexp_edges(points.positions, points.length, points.boundary is BoundaryMode.TORUS,
                               hi, wrap_lo, u, cf.length_scale, cf.beta, cf.eta)
        edges = np.stack([ei, ej], axis=1)
    else:
        i, j, d = candidate_pairs(points, cutoff)
        keep = gen.random(i.size) < (cf(d) if d.size else d)
        edges = np.stack([i[keep], j[keep]], axis=1)
    return _finish(points, edges, cutoff, seed)


def sample_graph_reference(points: PointSet, cf: ConnectionFunction, rng=None,
                           tail_epsilon: float = DEFAULT_TAIL_EPSILON) -> GraphSample:
    """Vectorized pair-list implementation of :func:`sample_graph` for any family (same draw order)."""
    gen, seed = as_generator(rng, EDGE_STREAM)
    cutoff = pruning_cutoff(cf, tail_epsilon)
    i, j, d = candidate_pairs(points, cutoff)
    keep = gen.random(i.size) < (cf(d) if d.size else d)
    return _finish(points, np.stack([i[keep], j[keep]], axis=1), cutoff, seed)


def _finish(points, edges, cutoff, seed):
    count, labels = connected_components(len(points), edges)
    edges.flags.writeable = False
    labels.flags.writeable = False
    used = 0.0 if not np.isfinite(cutoff) else max(cutoff, 0.0)
    return GraphSample(points, edges, labels, count, used, seed)


def dumps_graph(sample: GraphSample) -> str:
    """Line-oriented text dump: header ``L boundary seed``, then node and edge lines."""
    buf = io.StringIO()
    pts = sample.points
    seed = "-" if sample.seed is None else str(sample.seed)
    buf.write(f"{pts.length!r} {pts.boundary.value} {seed}\n")
    for k, x in enumerate(pts.positions.tolist()):
        buf.write(f"node {k} {x!r}\n")
    for a, b in sample.edges.tolist():
        buf.write(f"edge {a} {b}\n")
    return buf.getvalue()


def loads_graph(text: str) -> GraphSample:
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 3:
        raise InvalidParameterError("graph dump must start with 'L boundary seed'")
    length, boundary, seed = lines[0]
    seed = None if seed == "-" else int(seed)
    nodes, edges = [], []
    for parts in lines[1:]:
        if parts[0] == "node" and len(parts) == 3:
            if int(parts[1]) != len(nodes):
                raise InvalidParameterError("node lines must be numbered consecutively from 0")
            nodes.append(float(parts[2]))
        elif parts[0] == "edge" and len(parts) == 3:
            edges.append((int(parts[1]), int(parts[2])))
        else:
            raise InvalidParameterError(f"unrecognized dump line: {' '.join(parts)}")
    points = PointSet(float(length), np.asarray(nodes), BoundaryMode.parse(boundary), seed)
    return GraphSample.from_edges(points, edges, seed=seed)


def write_graph(sample: GraphSample, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_graph(sample))


def read_graph(path: str | os.PathLike) -> GraphSample:
    with open(path, encoding="utf-8") as fh:
        return loads_graph(fh.read())
