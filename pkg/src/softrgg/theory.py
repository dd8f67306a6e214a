"""Numerical evaluation of the analytic isolation and uncrossed-gap quantities.

Quantities involving a system size assume the torus unless stated otherwise.
Improper integrals are truncated where the integrand's analytic envelope
(the tail integral of H) drops below 1e-14.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .connection import ConnectionFunction, GeneralizedExponential, Hard, mean_degree
from .errors import (
    AssumptionViolatedError,
    DegenerateInputError,
    InvalidParameterError,
    UnsupportedFamilyError,
    UnsupportedRegimeError,
)
from .point_process import BoundaryMode
from .special import SpecialFunctionAccuracy, incomplete_gamma_upper  # noqa: F401  (re-exported)

TAIL_TOL = 1e-14
_QUAD_LIMIT = 500


class ScalingKind(enum.Enum):
    ISOLATED_NODES = "isolated"
    UNCROSSED_GAPS = "ucg"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        v = str(value).strip().lower().replace("-", "_")
        aliases = {"isolated": cls.ISOLATED_NODES, "isolated_nodes": cls.ISOLATED_NODES,
                   "ucg": cls.UNCROSSED_GAPS, "uncrossed_gaps": cls.UNCROSSED_GAPS}
        if v not in aliases:
            raise InvalidParameterError(f"unknown scaling kind {value!r}")
        return aliases[v]


@dataclass(frozen=True)
class ScalingRegime:
    gamma: float
    R_L: float
    kind: ScalingKind


@dataclass(frozen=True)
class TheoryPrediction:
    expected_isolated: float
    mean_degree: float
    prob_iso_poisson: float
    cv_squared_upper: float
    expected_ucg_lower: float
    scaling_regime: ScalingRegime


@dataclass(frozen=True)
class LStar:
    """Crossover size in log-log form; ``value`` is None when exp(exp(loglog)) overflows."""

    loglog: float
    value: float | None


def _quad(f, a, b, rel_tol, points=None):
    if b <= a:
        return 0.0
    pts = None
    if points is not None:
        pts = sorted({p for p in points if a < p < b})
    val, _ = integrate.quad(f, a, b, epsrel=rel_tol, epsabs=0.0, limit=_QUAD_LIMIT, points=pts or None)
    return val


def _tail_cutoff(cf: ConnectionFunction, tol: float = TAIL_TOL) -> float:
    """Smallest convenient y with int_y^inf H < tol."""
    if cf.tail_integral(0.0) < tol:
        return 0.0
    y = max(cf.support_radius(1e-3), 1e-12)
    while cf.tail_integral(y) >= tol:
        y *= 2.0
    lo, hi = 0.5 * y, y
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if cf.tail_integral(mid) >= tol:
            lo = mid
        else:
            hi = mid
    return hi


def _require_unbounded(cf: ConnectionFunction):
    if isinstance(cf, Hard):
        raise AssumptionViolatedError("this bound needs a connection function with unbounded support; the hard cutoff has none")


# ---------------------------------------------------------------- isolation

def prob_isolation_at_point(cf: ConnectionFunction, length: float) -> float:
    """Probability that a node placed at a fixed location on the torus is isolated."""
    return math.exp(-mean_degree(cf, length, BoundaryMode.TORUS))


def expected_isolated(cf: ConnectionFunction, length: float) -> float:
    """E[N_iso] = L * exp(-2 int_0^{L/2} H(y) dy) on the torus."""
    return length * prob_isolation_at_point(cf, length)


def _torus_correlation(cf: ConnectionFunction, x: float, length: float, radius: float, rel_tol: float) -> float:
    """int over the torus of H(rho(0, z)) H(rho(x, z)) dz for 0 <= x <= L/2."""
    half = 0.5 * length
    if min(x, length - x) > 2.0 * radius:
        return 0.0

    def f(u):
        d = abs(x - u)
        d = min(d, length - d)
        return cf(abs(u)) * cf(d)

    a, b = max(-half, -radius), min(half, radius)
    pts = [0.0, x, x - half, x - radius, x + radius, -radius, radius, x - length + radius]
    return _quad(f, a, b, rel_tol, pts)


def cv_squared_upper_bound(cf: ConnectionFunction, length: float, rel_tol: float = 1e-8) -> float:
    """Upper bound on Var(N_iso) / E[N_iso]^2 on the torus:

        1 / E[N_iso] + (1/L) int_0^L (exp(g(x)) - 1) dx,   g(x) = int h(0, z) h(x, z) dz.

    g is symmetric about L/2, so the outer integral runs over [0, L/2].
    """
    mean = expected_isolated(cf, length)
    if mean <= 0:
        raise DegenerateInputError("expected number of isolated nodes is zero; bound undefined")
    radius = min(cf.support_radius(1e-17), 0.5 * length)
    if radius <= 0:
        return 1.0 / mean
    upper = min(0.5 * length, 2.0 * radius)
    inner_tol = max(rel_tol * 1e-2, 1e-13)

    def outer(x):
        return math.expm1(_torus_correlation(cf, x, length, radius, inner_tol))

    pts = [radius, 0.5 * radius, 1.5 * radius]
    corr = 2.0 / length * _quad(outer, 0.0, upper, rel_tol, pts)
    return 1.0 / mean + corr


def poisson_approx_prob_iso(length: float, kbar: float) -> float:
    """1 - exp(-L exp(-kbar)): probability of at least one isolated node under the Poisson approximation."""
    if not length > 0:
        raise InvalidParameterError(f"length must be positive, got {length}")
    return -math.expm1(-length * math.exp(-kbar))


def critical_gamma(cf: ConnectionFunction) -> float:
    """Threshold 1 / (2 ||H||_1) for R_L = gamma ln L, using the unit-scale profile."""
    return 1.0 / (2.0 * cf.unit().l1_norm())


def ucg_theta(eta: float) -> float:
    if not eta > 0:
        raise InvalidParameterError(f"eta must be positive, got {eta}")
    return max(1.0 / eta, 2.0 / eta - 1.0)


def scaling_R(kind, length: float, gamma: float, eta: float = 1.0) -> float:
    """Connection range scaling: gamma ln L, or gamma ln L / (ln ln L)^theta for uncrossed gaps."""
    kind = ScalingKind.parse(kind)
    if not gamma > 0 or not eta > 0:
        raise InvalidParameterError("gamma and eta must be positive")
    if not length > 1:
        raise InvalidParameterError(f"length must exceed 1, got {length}")
    lnL = math.log(length)
    if kind is ScalingKind.ISOLATED_NODES:
        return gamma * lnL
    if length <= math.e:
        raise InvalidParameterError("uncrossed-gap scaling needs L > e")
    return gamma * lnL / math.log(lnL) ** ucg_theta(eta)


def scale_from_tau(cf: ConnectionFunction, tau: float, length: float) -> float:
    """R_L = ln(tau L) / (2 ||H||_1), the scaling at which N_iso is roughly Poisson(1/tau)."""
    if not tau > 0 or not tau * length > 1:
        raise InvalidParameterError("need tau > 0 and tau * L > 1")
    return math.log(tau * length) / (2.0 * cf.unit().l1_norm())


def tau_from_mean_degree(kbar: float, length: float) -> float:
    """Inverse of the asymptotic relation kbar = ln(tau L)."""
    return math.exp(kbar) / length


# ---------------------------------------------------------- uncrossed gaps

def expected_ucg_lower_bound(cf: ConnectionFunction, length: float, rel_tol: float = 1e-10) -> float:
    """Jensen lower bound on the expected number of uncrossed gaps in [0, L]:

        L exp(-[ int_0^inf (1 - exp(-T(y))) dy + 1 - exp(-||H||_1) ]),   T(y) = int_y^inf H.
    """
    _require_unbounded(cf)
    total = cf.tail_integral(0.0)
    cut = _tail_cutoff(cf)
    pts = [cf.support_radius(p) for p in (0.5, 1e-2, 1e-5) if p <= cf.at_zero]
    crossing = _quad(lambda y: -math.expm1(-cf.tail_integral(y)), 0.0, cut, rel_tol, pts)
    return length * math.exp(-(crossing - math.expm1(-total)))


def tail_moment_bound(cf: ConnectionFunction, x: float) -> float:
    """int_x^inf z H(z) dz = (beta a^2 / eta) Gamma(2/eta, (x/a)^eta) with a = r_c * scale."""
    if not isinstance(cf, GeneralizedExponential):
        raise UnsupportedFamilyError("tail moment closed form needs the generalized exponential family")
    if not x >= 0:
        raise InvalidParameterError(f"x must be nonnegative, got {x}")
    return cf.tail_moment(x)


def chernoff_rate(alpha: float, delta: float) -> float:
    """Poisson lower-tail rate I_alpha(delta) = -delta ln(alpha/delta) + alpha - delta."""
    if not alpha > 0 or not delta > 0:
        raise InvalidParameterError("alpha and delta must be positive")
    return -delta * math.log(alpha / delta) + alpha - delta


def conditional_crossing_mean(cf: ConnectionFunction, scale_R: float, rel_tol: float = 1e-8) -> float:
    """Expected number of nodes right of an isolated origin that have a neighbour left of it:

        R int_0^inf (1 - H(y)) (1 - exp(-R int_0^inf (1 - H(z)) H(y + z) dz)) dy

    with H the unit-scale profile.
    """
    _require_unbounded(cf)
    if not scale_R > 0:
        raise InvalidParameterError(f"scale_R must be positive, got {scale_R}")
    h = cf.unit()
    radius = h.support_radius(1e-17)
    inner_tol = max(rel_tol * 1e-2, 1e-13)

    def inner(y):
        z_max = radius - y
        if z_max <= 0:
            return 0.0
        return _quad(lambda z: (1.0 - h(z)) * h(y + z), 0.0, z_max, inner_tol, [radius - y - h.support_radius(1e-3)])

    def outer(y):
        return (1.0 - h(y)) * -math.expm1(-scale_R * inner(y))

    cut = min(_tail_cutoff(h, TAIL_TOL / scale_R), radius)
    pts = [h.support_radius(p) for p in (0.5, 1e-2, 1e-5) if p <= h.at_zero]
    return scale_R * _quad(outer, 0.0, cut, rel_tol, pts)


def gamma_floor(cf: ConnectionFunction) -> float:
    """Limiting lower bound (1/2) H^{-1}(1/2) on conditional_crossing_mean / R."""
    _require_unbounded(cf)
    return 0.5 * cf.unit().generalized_inverse(0.5)


def crossover_loglog(l1: float, eta: float, C: float) -> LStar:
    """ln ln L* = (2 ||H||_1 / C)^eta, valid for eta >= 1."""
    if not eta >= 1:
        raise UnsupportedRegimeError("crossover formula holds for eta >= 1 only")
    if not C > 0 or not l1 > 0:
        raise InvalidParameterError("C and ||H||_1 must be positive")
    loglog = (2.0 * l1 / C) ** eta
    try:
        value = math.exp(math.exp(loglog))
    except OverflowError:
        value = None
    return LStar(loglog, value)


def crossover_L_star(cf: ConnectionFunction, C: float) -> LStar:
    """System size at which the isolated-node and uncrossed-gap scalings coincide.

    ``C`` is the unknown constant of the uncrossed-gap bound and must be supplied.
    """
    if not isinstance(cf, GeneralizedExponential):
        raise UnsupportedFamilyError("crossover size needs the generalized exponential family")
    return crossover_loglog(cf.unit().l1_norm(), cf.eta, C)


# ---------------------------------------------------------------- summary

def predict(cf: ConnectionFunction, length: float, boundary=BoundaryMode.TORUS,
            with_cv: bool = True) -> TheoryPrediction:
    """Bundle the theory quantities for one configuration.

    ``cf.scale`` is read as R_L, so gamma = scale / ln L.
    """
    kbar = mean_degree(cf, length, boundary)
    e_iso = expected_isolated(cf, length)
    cv = cv_squared_upper_bound(cf, length) if with_cv and e_iso > 0 else float("nan")
    ucg = float("nan") if isinstance(cf, Hard) else expected_ucg_lower_bound(cf, length)
    gamma = cf.scale / math.log(length) if length > 1 else float("nan")
    return TheoryPrediction(
        expected_isolated=e_iso,
        mean_degree=kbar,
        prob_iso_poisson=poisson_approx_prob_iso(length, kbar),
        cv_squared_upper=cv,
        expected_ucg_lower=ucg,
        scaling_regime=ScalingRegime(gamma, cf.scale, ScalingKind.ISOLATED_NODES),
    )
