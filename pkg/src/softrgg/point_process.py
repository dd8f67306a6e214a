"""Homogeneous unit-intensity Poisson point processes on [0, L].

Every random quantity in the package is drawn from a Philox counter-based
generator keyed by a 64-bit seed, so a trial can be regenerated from its
seed alone, independently of which worker ran it.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError

# salts separating the streams that consume the same trial seed
PPP_STREAM = 0
EDGE_STREAM = 1


class BoundaryMode(enum.Enum):
    LINE = "line"
    TORUS = "torus"

    @classmethod
    def parse(cls, value: "BoundaryMode | str") -> "BoundaryMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidParameterError(f"unknown boundary mode {value!r} (expected 'line' or 'torus')") from None


def derive_seed(master_seed: int, *indices: int) -> int:
    """Deterministic 64-bit seed for the stream identified by ``indices``."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(i) for i in indices))
    lo, hi = ss.generate_state(2, np.uint32)
    return int(lo) | (int(hi) << 32)


def rng_stream(seed: int, salt: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(salt)])))


def as_generator(seed_or_rng, salt: int) -> tuple[np.random.Generator, int | None]:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng, None
    if seed_or_rng is None:
        raise InvalidParameterError("an explicit seed or Generator is required")
    seed = int(seed_or_rng)
    if not 0 <= seed < 2**64:
        raise InvalidParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return rng_stream(seed, salt), seed


@dataclass(frozen=True, eq=False)
class PointSet:
    """Sorted node positions on [0, L)."""

    length: float
    positions: np.ndarray = field(repr=False)
    boundary: BoundaryMode = BoundaryMode.LINE
    seed: int | None = None

    def __post_init__(self):
        if not self.length > 0:
            raise InvalidParameterError(f"length must be positive, got {self.length}")
        pos = np.array(self.positions, dtype=float).reshape(-1)
        if pos.size and (pos[0] < 0 or pos[-1] >= self.length):
            raise InvalidParameterError("positions must lie in [0, L)")
        if np.any(np.diff(pos) <= 0):
            raise InvalidParameterError("positions must be strictly ascending")
        pos.flags.writeable = False
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "boundary", BoundaryMode.parse(self.boundary))

    @classmethod
    def from_positions(cls, length, positions, boundary=BoundaryMode.LINE, seed=None) -> "PointSet":
        return cls(float(length), np.sort(np.asarray(positions, dtype=float)), boundary, seed)

    def __len__(self) -> int:
        return self.positions.size

    def __eq__(self, other):
        if not isinstance(other, PointSet):
            return NotImplemented
        return (self.length == other.length and self.boundary == other.boundary
                and self.seed == other.seed and np.array_equal(self.positions, other.positions))

    def __hash__(self):
        return hash((self.length, self.boundary, self.seed, self.positions.tobytes()))

    def reflected(self) -> "PointSet":
        """Mirror image x -> L - x (a point at 0 maps to L and is wrapped to 0)."""
        pos = self.length - self.positions[::-1]
        pos[pos >= self.length] = 0.0
        return PointSet.from_positions(self.length, pos, self.boundary, self.seed)


def sample_ppp(length: float, boundary: BoundaryMode | str = BoundaryMode.LINE, rng=None) -> PointSet:
    """Sample a unit-intensity PPP on [0, length).

    ``rng`` is either a 64-bit seed or a ``numpy.random.Generator``. The point
    count is Poisson(length); positions are sorted uniforms.
    """
    if not length > 0 or not np.isfinite(length):
        raise InvalidParameterError(f"length must be positive and finite, got {length}")
    boundary = BoundaryMode.parse(boundary)
    gen, seed = as_generator(rng, PPP_STREAM)
    n = gen.poisson(length)
    pos = gen.random(n) * length
    hit = pos >= length
    if hit.any():
        pos[hit] = 0.0 if boundary is BoundaryMode.TORUS else np.nextafter(length, 0.0)
    pos.sort()
    return PointSet(float(length), pos, boundary, seed)


def distance(x, y, length: float, boundary: BoundaryMode | str = BoundaryMode.LINE):
    """Euclidean distance on the line, wrap-around distance on the torus.

    Accepts scalars or arrays; inputs must lie in [0, length).
    """
    boundary = BoundaryMode.parse(boundary)
    if not length > 0:
        raise InvalidParameterError(f"length must be positive, got {length}")
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    for v in (xa, ya):
        if np.any(v < 0) or np.any(v >= length):
            raise InvalidParameterError("points must lie in [0, L)")
    d = np.abs(xa - ya)
    if boundary is BoundaryMode.TORUS:
        d = np.minimum(d, length - d)
    return float(d) if d.ndim == 0 else d
