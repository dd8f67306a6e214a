"""Seeded Monte Carlo trials and sweeps over mean degree, link range or scaling gamma.

Trial ``t`` at sweep point ``p`` draws everything from the seed
``derive_seed(master_seed, p, t)``; workers receive contiguous trial ranges
and results are merged in index order, so output does not depend on the
number of workers.
"""
from __future__ import annotations

import enum
import logging
import math
import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import theory
from .analysis import DiagnosisReport, diagnose
from .connection import FAMILIES, ConnectionFunction, make_connection, mean_degree, solve_rc_for_mean_degree
from .errors import InfeasibleTargetError, InvalidParameterError, SoftRGGError
from .graph import DEFAULT_TAIL_EPSILON, sample_graph
from .point_process import BoundaryMode, derive_seed, sample_ppp

log = logging.getLogger(__name__)

Z95 = 1.959963984540054
RECORD_MODES = frozenset({"isolated", "gaps", "theory"})


class SweepAxis(enum.Enum):
    MEAN_DEGREE = "mean_degree"
    LINK_RANGE = "link_range"
    GAMMA = "gamma"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower().replace("-", "_"))
        except ValueError:
            raise InvalidParameterError(f"unknown sweep axis {value!r}") from None


@dataclass(frozen=True)
class SweepConfig:
    length: float
    sweep_values: tuple[float, ...]
    boundary: BoundaryMode = BoundaryMode.LINE
    family: str = "waxman"
    beta: float = 1.0
    eta: float | None = None
    r_c: float = 1.0
    sweep_axis: SweepAxis = SweepAxis.MEAN_DEGREE
    trials_per_point: int = 1000
    master_seed: int = 0
    tail_epsilon: float = DEFAULT_TAIL_EPSILON
    record_modes: frozenset = RECORD_MODES

    def __post_init__(self):
        object.__setattr__(self, "boundary", BoundaryMode.parse(self.boundary))
        object.__setattr__(self, "sweep_axis", SweepAxis.parse(self.sweep_axis))
        object.__setattr__(self, "sweep_values", tuple(float(v) for v in self.sweep_values))
        object.__setattr__(self, "record_modes", frozenset(self.record_modes))
        object.__setattr__(self, "family", self.family.strip().lower())
        if not self.length > 0 or not math.isfinite(self.length):
            raise InvalidParameterError(f"length must be positive, got {self.length}")
        if not self.sweep_values:
            raise InvalidParameterError("sweep_values must be nonempty")
        if any(b <= a for a, b in zip(self.sweep_values, self.sweep_values[1:])):
            raise InvalidParameterError("sweep_values must be strictly ascending")
        if int(self.trials_per_point) != self.trials_per_point or self.trials_per_point < 1:
            raise InvalidParameterError("trials_per_point must be a positive integer")
        if self.family not in FAMILIES:
            raise InvalidParameterError(f"unknown family {self.family!r}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise InvalidParameterError("master_seed must be a 64-bit unsigned integer")
        if not 0 <= self.tail_epsilon < 1:
            raise InvalidParameterError("tail_epsilon must lie in [0, 1)")
        unknown = self.record_modes - RECORD_MODES
        if unknown:
            raise InvalidParameterError(f"unknown record modes {sorted(unknown)}")
        make_connection(self.family, self.r_c, self.beta, self.eta)  # validates parameters

    def to_dict(self) -> dict:
        d = asdict(self)
        d["boundary"] = self.boundary.value
        d["sweep_axis"] = self.sweep_axis.value
        d["sweep_values"] = list(self.sweep_values)
        d["record_modes"] = sorted(self.record_modes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        return cls(**d)


@dataclass(frozen=True)
class SweepPoint:
    """Everything a worker needs to run the trials of one sweep point."""

    index: int
    length: float
    boundary: BoundaryMode
    cf: ConnectionFunction
    master_seed: int
    tail_epsilon: float = DEFAULT_TAIL_EPSILON
    detect_gaps: bool = True


@dataclass(frozen=True)
class TrialOutcome:
    diagnosis: DiagnosisReport
    n_points: int
    n_edges: int
    seed: int


@dataclass
class TrialBatch:
    """Per-trial records of one sweep point, in trial-index order."""

    connected: np.ndarray
    n_isolated: np.ndarray
    n_gaps: np.ndarray
    split: np.ndarray
    n_points: np.ndarray
    n_edges: np.ndarray

    @classmethod
    def concat(cls, batches) -> "TrialBatch":
        batches = list(batches)
        return cls(*(np.concatenate([getattr(b, f) for b in batches]) for f in cls.__dataclass_fields__))

    def __len__(self):
        return self.connected.size


@dataclass(frozen=True)
class Estimate:
    p: float
    lo: float
    hi: float


@dataclass(frozen=True)
class PointResult:
    axis_value: float
    r_c: float
    mean_degree: float
    trials: int
    p_dis: Estimate
    p_iso: Estimate
    p_ucg: Estimate
    p_iso_or_ucg: Estimate
    p_split: Estimate
    mean_n_iso: float
    var_n_iso: float
    se_n_iso: float
    dis_given_n2: Estimate
    iso_given_n2: Estimate
    th_expected_iso: float = math.nan
    th_poisson_p: float = math.nan
    th_cv_bound: float = math.nan
    th_ucg_lower: float = math.nan
    error: str | None = None


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    points: tuple[PointResult, ...] = field(default=())


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or successes < 0 or successes > trials:
        raise InvalidParameterError(f"need 0 <= successes <= trials and trials >= 1, got {successes}/{trials}")
    if not z > 0:
        raise InvalidParameterError("z must be positive")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return lo, hi


def _estimate(successes: int, trials: int) -> Estimate:
    if trials == 0:
        return Estimate(math.nan, math.nan, math.nan)
    lo, hi = wilson_interval(int(successes), int(trials))
    return Estimate(successes / trials, lo, hi)


def run_trial(point: SweepPoint, trial_index: int) -> TrialOutcome:
    seed = derive_seed(point.master_seed, point.index, trial_index)
    pts = sample_ppp(point.length, point.boundary, seed)
    g = sample_graph(pts, point.cf, seed, point.tail_epsilon)
    return TrialOutcome(diagnose(g, point.detect_gaps), len(pts), g.n_edges, seed)


def run_trials(point: SweepPoint, start: int, stop: int) -> TrialBatch:
    n = stop - start
    conn = np.zeros(n, dtype=bool)
    iso = np.zeros(n, dtype=np.int64)
    gaps = np.zeros(n, dtype=np.int64)
    split = np.zeros(n, dtype=bool)
    npts = np.zeros(n, dtype=np.int64)
    nedg = np.zeros(n, dtype=np.int64)
    for k in range(n):
        out = run_trial(point, start + k)
        d = out.diagnosis
        conn[k] = d.is_connected
        iso[k] = d.n_isolated
        gaps[k] = d.n_uncrossed_gaps
        split[k] = d.has_split
        npts[k] = out.n_points
        nedg[k] = out.n_edges
    return TrialBatch(conn, iso, gaps, split, npts, nedg)


def _run_chunk(args):
    point, start, stop = args
    return run_trials(point, start, stop)


def resolve_point(config: SweepConfig, index: int) -> tuple[ConnectionFunction, float]:
    """Connection function for sweep point ``index`` and its effective link range r_c * scale."""
    value = config.sweep_values[index]
    axis = config.sweep_axis
    if axis is SweepAxis.MEAN_DEGREE:
        rc = solve_rc_for_mean_degree(value, config.length, config.boundary, config.family,
                                      config.beta, config.eta)
        cf = make_connection(config.family, rc, config.beta, config.eta)
    elif axis is SweepAxis.LINK_RANGE:
        cf = make_connection(config.family, value, config.beta, config.eta)
    else:
        eta = config.eta if config.eta is not None else (2.0 if config.family == "rayleigh" else 1.0)
        R = theory.scaling_R(theory.ScalingKind.ISOLATED_NODES, config.length, value, eta)
        cf = make_connection(config.family, config.r_c, config.beta, config.eta, scale=R)
    return cf, cf.r_c * cf.scale


def aggregate(batch: TrialBatch) -> dict:
    """Proportions with Wilson intervals and N_iso moments, computed per trial."""
    t = len(batch)
    dis = ~batch.connected
    has_iso = batch.n_isolated > 0
    has_gap = batch.n_gaps > 0
    n2 = batch.n_points >= 2
    iso_vals = batch.n_isolated.astype(float)
    var = float(np.var(iso_vals, ddof=1)) if t > 1 else math.nan
    return dict(
        trials=t,
        p_dis=_estimate(int(dis.sum()), t),
        p_iso=_estimate(int(has_iso.sum()), t),
        p_ucg=_estimate(int(has_gap.sum()), t),
        p_iso_or_ucg=_estimate(int((has_iso | has_gap).sum()), t),
        p_split=_estimate(int(batch.split.sum()), t),
        mean_n_iso=float(iso_vals.mean()),
        var_n_iso=var,
        se_n_iso=math.sqrt(var / t) if t > 1 else math.nan,
        dis_given_n2=_estimate(int((dis & n2).sum()), int(n2.sum())),
        iso_given_n2=_estimate(int((has_iso & n2).sum()), int(n2.sum())),
    )


def _theory_fields(cf, config: SweepConfig, kbar: float) -> dict:
    e_iso = theory.expected_isolated(cf, config.length)
    out = dict(th_expected_iso=e_iso, th_poisson_p=theory.poisson_approx_prob_iso(config.length, kbar))
    if "theory" in config.record_modes:
        try:
            out["th_cv_bound"] = theory.cv_squared_upper_bound(cf, config.length)
        except SoftRGGError as exc:
            log.warning("cv bound unavailable: %s", exc)
        if cf.unbounded_support:
            out["th_ucg_lower"] = theory.expected_ucg_lower_bound(cf, config.length)
    return out


def _chunks(n: int, parts: int):
    parts = max(1, min(parts, n))
    edges = np.linspace(0, n, parts + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _pool_context():
    methods = multiprocessing.get_all_start_methods()
    return multiprocessing.get_context("fork" if "fork" in methods else "spawn")


def run_sweep_batches(config: SweepConfig, parallelism: int | None = None):
    """Run every sweep point; returns a list of (cf, effective r_c, batch or error message)."""
    parallelism = parallelism or os.cpu_count() or 1
    if parallelism < 1:
        raise InvalidParameterError("parallelism must be positive")
    detect_gaps = "gaps" in config.record_modes and config.boundary is BoundaryMode.LINE
    resolved, jobs = [], []
    for idx in range(len(config.sweep_values)):
        try:
            cf, rc = resolve_point(config, idx)
        except InfeasibleTargetError as exc:
            resolved.append((None, math.nan, str(exc)))
            continue
        point = SweepPoint(idx, config.length, config.boundary, cf, int(config.master_seed),
                           config.tail_epsilon, detect_gaps)
        resolved.append((cf, rc, None))
        for start, stop in _chunks(config.trials_per_point, parallelism):
            jobs.append((idx, (point, start, stop)))

    per_point: dict[int, list[TrialBatch]] = {}
    if parallelism == 1:
        for idx, job in jobs:
            per_point.setdefault(idx, []).append(_run_chunk(job))
    else:
        with ProcessPoolExecutor(max_workers=parallelism, mp_context=_pool_context()) as pool:
            results = pool.map(_run_chunk, [job for _, job in jobs])
            for (idx, _), batch in zip(jobs, results):
                per_point.setdefault(idx, []).append(batch)

    out = []
    for idx, (cf, rc, err) in enumerate(resolved):
        out.append((cf, rc, err if err is not None else TrialBatch.concat(per_point[idx])))
    return out


def run_sweep(config: SweepConfig, parallelism: int | None = None) -> SweepResult:
    """Run all trials of every sweep point and attach theory predictions.

    Points whose mean-degree target is infeasible carry an ``error`` message
    and NaN statistics; the sweep continues.
    """
    points = []
    nan_est = Estimate(math.nan, math.nan, math.nan)
    for idx, (cf, rc, payload) in enumerate(run_sweep_batches(config, parallelism)):
        value = config.sweep_values[idx]
        if isinstance(payload, str):
            points.append(PointResult(value, math.nan, math.nan, 0, nan_est, nan_est, nan_est, nan_est, nan_est,
                                      math.nan, math.nan, math.nan, nan_est, nan_est, error=payload))
            continue
        stats = aggregate(payload)
        if not (config.boundary is BoundaryMode.LINE and "gaps" in config.record_modes):
            stats["p_ucg"] = nan_est
            stats["p_iso_or_ucg"] = nan_est
        kbar = mean_degree(cf, config.length, config.boundary)
        points.append(PointResult(value, rc, kbar, **stats, **_theory_fields(cf, config, kbar)))
    return SweepResult(config, tuple(points))


@dataclass(frozen=True)
class ComparisonRow:
    axis_value: float
    mean_degree: float
    p_iso: float
    p_iso_lo: float
    p_iso_hi: float
    poisson: float
    abs_gap: float
    covered: bool


def compare_theory(result: SweepResult) -> list[ComparisonRow]:
    """Empirical P(N_iso >= 1) next to 1 - exp(-L exp(-kbar)) at every sweep point."""
    rows = []
    L = result.config.length
    for pt in result.points:
        if pt.error is not None:
            continue
        approx = theory.poisson_approx_prob_iso(L, pt.mean_degree)
        e = pt.p_iso
        rows.append(ComparisonRow(pt.axis_value, pt.mean_degree, e.p, e.lo, e.hi, approx,
                                  abs(e.p - approx), e.lo <= approx <= e.hi))
    return rows
