"""Connection functions H(r) and the scalar quantities derived from them.

All evaluations use the scaled profile H(r / scale). Integrals are closed
form (incomplete Gamma) for the generalized exponential family and exact
piecewise formulas for the hard and tabulated families.
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InfeasibleTargetError, InvalidParameterError
from .point_process import BoundaryMode
from .special import incomplete_gamma_upper, lower_incomplete_gamma


def _check_r(r):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(np.isnan(r)):
        raise InvalidParameterError("distance must be nonnegative")
    return r


def _out(values):
    return float(values) if np.ndim(values) == 0 else values


class ConnectionFunction(ABC):
    """Monotone nonincreasing edge probability as a function of distance."""

    scale: float

    # monotone with unbounded support
    unbounded_support: bool = False

    def __call__(self, r):
        if isinstance(r, (float, int)):
            if not r >= 0:
                raise InvalidParameterError("distance must be nonnegative")
            return self._scalar(float(r))
        return _out(self._eval(_check_r(r)))

    def _scalar(self, r: float) -> float:
        return float(self._eval(np.array([r]))[0])

    @abstractmethod
    def _eval(self, r: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def partial_integral(self, c: float) -> float:
        """Integral of H over [0, c]."""

    @abstractmethod
    def partial_moment(self, c: float) -> float:
        """Integral of r H(r) over [0, c]."""

    @abstractmethod
    def tail_integral(self, y: float) -> float:
        """Integral of H over [y, inf)."""

    @abstractmethod
    def generalized_inverse(self, p: float) -> float:
        """sup{r : H(r) >= p} for p in (0, H(0)]."""

    @abstractmethod
    def l1_norm(self) -> float: ...

    @property
    def at_zero(self) -> float:
        return float(self._eval(np.zeros(1))[0])

    def with_scale(self, scale: float) -> "ConnectionFunction":
        if not scale > 0:
            raise InvalidParameterError(f"scale must be positive, got {scale}")
        return replace(self, scale=float(scale))

    def unit(self) -> "ConnectionFunction":
        return self.with_scale(1.0)

    def support_radius(self, eps: float = 1e-17) -> float:
        """Distance beyond which H < eps (0 if H(0) < eps)."""
        if eps > self.at_zero:
            return 0.0
        return self.generalized_inverse(eps)

    def _check_p(self, p):
        h0 = self.at_zero
        if not 0 < p <= h0:
            raise InvalidParameterError(f"probability must lie in (0, H(0)] = (0, {h0}], got {p}")


@dataclass(frozen=True)
class GeneralizedExponential(ConnectionFunction):
    """H(r) = beta * exp(-(r / r_c) ** eta); Waxman is eta=1, Rayleigh eta=2."""

    r_c: float = 1.0
    eta: float = 1.0
    beta: float = 1.0
    scale: float = 1.0
    unbounded_support = True

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise InvalidParameterError(f"beta must lie in (0, 1], got {self.beta}")
        if not self.r_c > 0 or not self.eta > 0 or not self.scale > 0:
            raise InvalidParameterError("r_c, eta and scale must be positive")

    @property
    def length_scale(self) -> float:
        return self.r_c * self.scale

    def _eval(self, r):
        t = r / self.length_scale
        if self.eta == 2.0:
            t = t * t
        elif self.eta != 1.0:
            t = t**self.eta
        return self.beta * np.exp(-t)

    def _scalar(self, r):
        return self.beta * math.exp(-((r / self.length_scale) ** self.eta))

    def _gamma_integral(self, order: int, c: float, upper: bool) -> float:
        # integral of r**(order-1) H(r) over [0, c] or [c, inf) via u = (r/a)**eta
        a = self.length_scale
        shape = order / self.eta
        arg = (c / a) ** self.eta
        g = incomplete_gamma_upper(shape, arg) if upper else lower_incomplete_gamma(shape, arg)
        return self.beta * a**order / self.eta * g

    def partial_integral(self, c):
        return self._gamma_integral(1, c, upper=False)

    def partial_moment(self, c):
        return self._gamma_integral(2, c, upper=False)

    def tail_integral(self, y):
        return self._gamma_integral(1, y, upper=True)

    def tail_moment(self, x: float) -> float:
        """Integral of r H(r) over [x, inf)."""
        return self._gamma_integral(2, x, upper=True)

    def l1_norm(self):
        return self.beta * self.length_scale * math.gamma(1.0 + 1.0 / self.eta)

    def generalized_inverse(self, p):
        self._check_p(p)
        return self.length_scale * math.log(self.beta / p) ** (1.0 / self.eta)


@dataclass(frozen=True)
class Hard(ConnectionFunction):
    """Gilbert disk model: H(r) = 1 for r <= r_c, else 0."""

    r_c: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.r_c > 0 or not self.scale > 0:
            raise InvalidParameterError("r_c and scale must be positive")

    @property
    def length_scale(self) -> float:
        return self.r_c * self.scale

    def _eval(self, r):
        return (r <= self.length_scale).astype(float)

    def _scalar(self, r):
        return 1.0 if r <= self.length_scale else 0.0

    def partial_integral(self, c):
        return min(c, self.length_scale)

    def partial_moment(self, c):
        return 0.5 * min(c, self.length_scale) ** 2

    def tail_integral(self, y):
        return max(self.length_scale - y, 0.0)

    def l1_norm(self):
        return self.length_scale

    def generalized_inverse(self, p):
        self._check_p(p)
        return self.length_scale


@dataclass(frozen=True)
class Tabulated(ConnectionFunction):
    """Piecewise-linear H through (r, H(r)) knots, zero beyond the last knot.

    The first knot must sit at r = 0 and values must be nonincreasing.
    """

    knots_r: tuple = field(default=(0.0, 1.0))
    knots_h: tuple = field(default=(1.0, 0.0))
    scale: float = 1.0

    def __post_init__(self):
        r = np.asarray(self.knots_r, dtype=float)
        h = np.asarray(self.knots_h, dtype=float)
        if r.ndim != 1 or r.shape != h.shape or r.size < 2:
            raise InvalidParameterError("need at least two (r, H) knots of matching length")
        if r[0] != 0 or np.any(np.diff(r) <= 0):
            raise InvalidParameterError("knot distances must start at 0 and strictly increase")
        if np.any(h < 0) or np.any(h > 1):
            raise InvalidParameterError("knot values must lie in [0, 1]")
        if np.any(np.diff(h) > 0):
            raise InvalidParameterError("tabulated connection function must be nonincreasing")
        if not self.scale > 0:
            raise InvalidParameterError("scale must be positive")
        object.__setattr__(self, "knots_r", tuple(float(v) for v in r))
        object.__setattr__(self, "knots_h", tuple(float(v) for v in h))

    @classmethod
    def from_pairs(cls, pairs, scale: float = 1.0) -> "Tabulated":
        rs, hs = zip(*pairs)
        return cls(tuple(rs), tuple(hs), scale)

    def _eval(self, r):
        return np.interp(r / self.scale, self.knots_r, self.knots_h, right=0.0)

    def _unit_moments(self, c: float) -> tuple[float, float]:
        # exact integrals of H and u*H over [0, c] at unit scale
        r = np.asarray(self.knots_r)
        h = np.asarray(self.knots_h)
        c = min(c, r[-1])
        m0 = m1 = 0.0
        for k in range(r.size - 1):
            a, b = r[k], r[k + 1]
            if a >= c:
                break
            b_cut = min(b, c)
            ha = h[k]
            hb = h[k] + (h[k + 1] - h[k]) * (b_cut - a) / (b - a)
            w = b_cut - a
            mid = 0.5 * (a + b_cut)
            m0 += 0.5 * (ha + hb) * w
            # Simpson is exact for the quadratic u*H(u)
            m1 += w / 6.0 * (a * ha + 4.0 * mid * 0.5 * (ha + hb) + b_cut * hb)
        return m0, m1

    def partial_integral(self, c):
        return self.scale * self._unit_moments(c / self.scale)[0]

    def partial_moment(self, c):
        return self.scale**2 * self._unit_moments(c / self.scale)[1]

    def tail_integral(self, y):
        return max(self.scale * self._unit_moments(math.inf)[0] - self.partial_integral(y), 0.0)

    def l1_norm(self):
        if self.knots_h[-1] > 0:
            raise InvalidParameterError("tabulated connection function does not decay to zero at its last knot")
        return self.partial_integral(math.inf)

    def generalized_inverse(self, p):
        self._check_p(p)
        r, h = self.knots_r, self.knots_h
        k = max(i for i in range(len(h)) if h[i] >= p)
        if k == len(h) - 1 or h[k] == h[k + 1]:
            return self.scale * r[k]
        frac = (h[k] - p) / (h[k] - h[k + 1])
        return self.scale * (r[k] + frac * (r[k + 1] - r[k]))


FAMILIES = ("waxman", "rayleigh", "genexp", "hard")


def make_connection(family: str, r_c: float = 1.0, beta: float = 1.0, eta: float | None = None,
                    scale: float = 1.0) -> ConnectionFunction:
    """Build a parametric connection function by family name."""
    family = family.strip().lower()
    fixed = {"waxman": 1.0, "rayleigh": 2.0}.get(family)
    if fixed is not None and eta is not None and float(eta) != fixed:
        raise InvalidParameterError(f"{family} has eta = {fixed:g}, got eta = {eta}")
    if family == "waxman":
        return GeneralizedExponential(r_c, 1.0, beta, scale)
    if family == "rayleigh":
        return GeneralizedExponential(r_c, 2.0, beta, scale)
    if family == "genexp":
        if eta is None:
            raise InvalidParameterError("genexp family needs eta")
        return GeneralizedExponential(r_c, float(eta), beta, scale)
    if family == "hard":
        return Hard(r_c, scale)
    raise InvalidParameterError(f"unknown connection family {family!r}; expected one of {FAMILIES}")


def waxman(r_c: float = 1.0, beta: float = 1.0) -> GeneralizedExponential:
    return GeneralizedExponential(r_c, 1.0, beta)


def rayleigh(r_c: float = 1.0, beta: float = 1.0) -> GeneralizedExponential:
    return GeneralizedExponential(r_c, 2.0, beta)


def evaluate(cf: ConnectionFunction, r):
    return cf(r)


def l1_norm(cf: ConnectionFunction) -> float:
    return cf.l1_norm()


def generalized_inverse(cf: ConnectionFunction, p: float) -> float:
    return cf.generalized_inverse(p)


def with_scale(cf: ConnectionFunction, scale: float) -> ConnectionFunction:
    return cf.with_scale(scale)


def mean_degree(cf: ConnectionFunction, length: float, boundary: BoundaryMode | str = BoundaryMode.TORUS) -> float:
    """Expected number of neighbours of a typical node.

    On the torus this is 2 * int_0^{L/2} H. On the line it is averaged over
    the node position: (1/L) int int H(|x-y|) dy dx = 2 int_0^L (1 - r/L) H(r) dr.
    """
    if not length > 0:
        raise InvalidParameterError(f"length must be positive, got {length}")
    boundary = BoundaryMode.parse(boundary)
    if boundary is BoundaryMode.TORUS:
        return 2.0 * cf.partial_integral(0.5 * length)
    return 2.0 * cf.partial_integral(length) - 2.0 * cf.partial_moment(length) / length


def solve_rc_for_mean_degree(target: float, length: float, boundary: BoundaryMode | str = BoundaryMode.TORUS,
                             family: str = "waxman", beta: float = 1.0, eta: float | None = None,
                             rel_tol: float = 1e-13) -> float:
    """Link range r_c giving the requested mean degree, found by bisection.

    The mean degree increases strictly with r_c up to its supremum beta * L,
    so targets at or above that are infeasible.
    """
    if not target > 0:
        raise InfeasibleTargetError(f"mean degree target must be positive, got {target}")
    boundary = BoundaryMode.parse(boundary)
    h0 = make_connection(family, 1.0, beta, eta).at_zero
    if target >= h0 * length:
        raise InfeasibleTargetError(f"mean degree {target} not reachable for L={length} (supremum {h0 * length})")

    def k(rc):
        return mean_degree(make_connection(family, rc, beta, eta), length, boundary)

    lo, hi = target / (2.0 * h0), target / (2.0 * h0)
    while k(lo) > target:
        lo *= 0.5
    while k(hi) < target:
        hi *= 2.0
        if hi > 1e300:
            raise InfeasibleTargetError(f"mean degree {target} not reachable")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if k(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rel_tol * hi:
            break
    return 0.5 * (lo + hi)
