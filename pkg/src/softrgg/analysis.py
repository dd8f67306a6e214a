"""Disconnection modes of a graph sample: isolated nodes, uncrossed gaps, splits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ModeMismatchError
from .graph import GraphSample
from .point_process import BoundaryMode


@dataclass(frozen=True)
class DiagnosisReport:
    is_connected: bool
    n_isolated: int
    isolated_indices: tuple[int, ...]
    n_uncrossed_gaps: int
    gap_indices: tuple[int, ...]
    has_split: bool
    component_count: int
    # False on the torus, where uncrossed gaps are not defined
    gaps_applicable: bool = True


def find_isolated(sample: GraphSample) -> tuple[int, np.ndarray]:
    """Nodes with degree zero (a lone node counts as isolated)."""
    idx = np.flatnonzero(sample.degrees() == 0)
    return int(idx.size), idx


def find_uncrossed_gaps(sample: GraphSample) -> tuple[int, np.ndarray]:
    """Indices i < N-1 such that no edge (a, b) has a <= i < b.

    Single sweep: reach(i) = max(i, max{b : (a, b) edge, a <= i}); the cut
    after i is uncrossed iff reach(i) == i.
    """
    if sample.points.boundary is not BoundaryMode.LINE:
        raise ModeMismatchError("uncrossed gaps are only defined on the line")
    n = sample.n_nodes
    if n < 2:
        return 0, np.zeros(0, dtype=np.int64)
    reach = np.arange(n, dtype=np.int64)
    e = sample.edges
    if e.size:
        np.maximum.at(reach, e[:, 0], e[:, 1])
    reach = np.maximum.accumulate(reach)
    idx = np.flatnonzero(reach[:-1] == np.arange(n - 1))
    return int(idx.size), idx


def diagnose(sample: GraphSample, detect_gaps: bool = True) -> DiagnosisReport:
    """Classify a sample. Samples with at most one node count as connected."""
    n = sample.n_nodes
    connected = n <= 1 or sample.component_count == 1
    n_iso, iso = find_isolated(sample)
    applicable = detect_gaps and sample.points.boundary is BoundaryMode.LINE
    if applicable:
        n_gap, gaps = find_uncrossed_gaps(sample)
    else:
        n_gap, gaps = 0, np.zeros(0, dtype=np.int64)
    split = (not connected) and n_iso == 0 and n_gap == 0
    return DiagnosisReport(
        is_connected=bool(connected),
        n_isolated=n_iso,
        isolated_indices=tuple(iso.tolist()),
        n_uncrossed_gaps=n_gap,
        gap_indices=tuple(gaps.tolist()),
        has_split=bool(split),
        component_count=max(sample.component_count, 1),
        gaps_applicable=applicable,
    )
