"""Gamma-family special functions.

Regularized incomplete Gamma functions use the power series below ``a + 1``
and a modified-Lentz continued fraction above it.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass

from .errors import ConvergenceError, InvalidParameterError

_TINY = sys.float_info.min / sys.float_info.epsilon


@dataclass(frozen=True)
class SpecialFunctionAccuracy:
    rel_tol: float = 1e-10
    max_iterations: int = 2000

    def __post_init__(self):
        if not 0 < self.rel_tol < 1e-6:
            raise InvalidParameterError(f"rel_tol must lie in (0, 1e-6), got {self.rel_tol}")
        if self.max_iterations < 1:
            raise InvalidParameterError("max_iterations must be positive")


DEFAULT_ACCURACY = SpecialFunctionAccuracy()


def gamma(a: float) -> float:
    return math.gamma(a)


def _check(a, y):
    if not a > 0:
        raise InvalidParameterError(f"shape parameter must be positive, got {a}")
    if not y >= 0:
        raise InvalidParameterError(f"argument must be nonnegative, got {y}")


def _prefactor(a, y):
    # y**a * exp(-y), kept in log space to avoid overflow for large a or y
    return math.exp(a * math.log(y) - y)


def _series(a, y, acc):
    """Sum of y**n / (a (a+1) ... (a+n)), so that gamma_lower = prefactor * sum."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(acc.max_iterations):
        ap += 1.0
        term *= y / ap
        total += term
        if abs(term) < abs(total) * acc.rel_tol * 1e-3:
            return total
    raise ConvergenceError(f"incomplete gamma series did not converge (a={a}, y={y})")


def _continued_fraction(a, y, acc):
    """Lentz evaluation so that gamma_upper = prefactor * cf."""
    b = y + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, acc.max_iterations + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < acc.rel_tol * 1e-3:
            return h
    raise ConvergenceError(f"incomplete gamma continued fraction did not converge (a={a}, y={y})")


def lower_incomplete_gamma(a: float, y: float, accuracy: SpecialFunctionAccuracy = DEFAULT_ACCURACY) -> float:
    """gamma(a, y) = integral of z**(a-1) exp(-z) over [0, y]."""
    _check(a, y)
    if y == 0:
        return 0.0
    if math.isinf(y):
        return math.gamma(a)
    if y < a + 1.0:
        return _prefactor(a, y) * _series(a, y, accuracy)
    return math.gamma(a) - _prefactor(a, y) * _continued_fraction(a, y, accuracy)


def incomplete_gamma_upper(a: float, y: float, accuracy: SpecialFunctionAccuracy = DEFAULT_ACCURACY) -> float:
    """Gamma(a, y) = integral of z**(a-1) exp(-z) over [y, inf).

    Raises InvalidParameterError for ``a <= 0`` or ``y < 0``.
    """
    _check(a, y)
    if y == 0:
        return math.gamma(a)
    if math.isinf(y):
        return 0.0
    if y < a + 1.0:
        return math.gamma(a) - _prefactor(a, y) * _series(a, y, accuracy)
    return _prefactor(a, y) * _continued_fraction(a, y, accuracy)


def regularized_gamma_p(a: float, y: float, accuracy: SpecialFunctionAccuracy = DEFAULT_ACCURACY) -> float:
    return lower_incomplete_gamma(a, y, accuracy) / math.gamma(a)


def regularized_gamma_q(a: float, y: float, accuracy: SpecialFunctionAccuracy = DEFAULT_ACCURACY) -> float:
    return incomplete_gamma_upper(a, y, accuracy) / math.gamma(a)
