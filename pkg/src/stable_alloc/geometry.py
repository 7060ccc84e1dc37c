"""Regions, points and the (optionally periodic) Euclidean metric.

Every distance in the package is evaluated with the same sequence of
floating-point operations: per-axis absolute difference, reduced to
``min(diff, L - diff)`` on a torus, squared and accumulated in axis order,
then square-rooted.  Keeping the operation order fixed makes exact ties
reproducible across the vectorized and compiled code paths.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError

TORUS = "torus"
BOX = "box"


@dataclass(frozen=True)
class Region:
    """A d-dimensional torus or box ``[0, L_0) x ... x [0, L_{d-1})``."""

    kind: str
    sides: tuple

    def __post_init__(self):
        if self.kind not in (TORUS, BOX):
            raise InvalidInputError(f"region kind must be 'torus' or 'box', got {self.kind!r}")
        sides = tuple(float(s) for s in self.sides)
        if not sides:
            raise InvalidInputError("region needs at least one side")
        if not all(math.isfinite(s) and s > 0 for s in sides):
            raise InvalidInputError(f"side lengths must be positive and finite, got {sides}")
        object.__setattr__(self, "sides", sides)

    @classmethod
    def torus(cls, *sides) -> "Region":
        return cls(TORUS, tuple(sides))

    @classmethod
    def box(cls, *sides) -> "Region":
        return cls(BOX, tuple(sides))

    @property
    def dimension(self) -> int:
        return len(self.sides)

    @property
    def periodic(self) -> bool:
        return self.kind == TORUS

    @property
    def volume(self) -> float:
        return region_volume(self)

    @property
    def diameter(self) -> float:
        s = math.sqrt(sum(L * L for L in self.sides))
        return 0.5 * s if self.periodic else s

    @property
    def side_array(self) -> np.ndarray:
        return np.asarray(self.sides, dtype=np.float64)

    def contains(self, coords) -> bool:
        c = np.asarray(coords, dtype=np.float64)
        return c.shape == (self.dimension,) and bool(np.all((c >= 0) & (c < self.side_array)))

    def reduce(self, coords) -> np.ndarray:
        """Wrap coordinates into ``[0, L_i)`` (torus only; boxes are returned as is)."""
        c = np.array(coords, dtype=np.float64)
        if self.periodic:
            L = self.side_array
            c = np.mod(c, L)
            # np.mod can round up to L for tiny negative inputs
            c = np.where(c >= L, 0.0, c)
        return c

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sides": list(self.sides)}

    @classmethod
    def from_dict(cls, data) -> "Region":
        return cls(data["kind"], tuple(data["sides"]))


@dataclass(frozen=True)
class Point:
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))

    @classmethod
    def in_region(cls, coords: Sequence[float], region: Region) -> "Point":
        c = np.asarray(coords, dtype=np.float64).ravel()
        if c.shape[0] != region.dimension:
            raise InvalidInputError(f"point has {c.shape[0]} coordinates, region has dimension {region.dimension}")
        return cls(tuple(region.reduce(c)))

    @property
    def dimension(self) -> int:
        return len(self.coords)


def region_volume(region: Region) -> float:
    v = 1.0
    for L in region.sides:
        v *= L
    return v


def _coords(p, region):
    c = np.asarray(p.coords if isinstance(p, Point) else p, dtype=np.float64)
    if c.shape[-1] != region.dimension:
        raise InvalidInputError(f"dimension mismatch: got {c.shape[-1]} coordinates for a {region.dimension}-d region")
    return c


def distance(p, q, region: Region) -> float:
    """Distance between two points of ``region``."""
    a = _coords(p, region)
    b = _coords(q, region)
    if a.ndim != 1 or b.ndim != 1:
        raise InvalidInputError("distance expects single points; use pairwise_distances for arrays")
    return float(pairwise_distances(a[None, :], b[None, :], region)[0, 0])


def pairwise_distances(a: np.ndarray, b: np.ndarray, region: Region) -> np.ndarray:
    """Distance matrix of shape ``(len(a), len(b))``."""
    a = np.asarray(a, dtype=np.float64).reshape(-1, region.dimension)
    b = np.asarray(b, dtype=np.float64).reshape(-1, region.dimension)
    acc = np.zeros((a.shape[0], b.shape[0]), dtype=np.float64)
    for axis, L in enumerate(region.sides):
        diff = np.abs(a[:, axis][:, None] - b[:, axis][None, :])
        if region.periodic:
            diff = np.minimum(diff, L - diff)
        acc = acc + diff * diff
    return np.sqrt(acc)


def distances_to(points: np.ndarray, target, region: Region) -> np.ndarray:
    """Distances from each row of ``points`` to a single ``target``."""
    return pairwise_distances(points, np.asarray(target, dtype=np.float64)[None, :], region)[:, 0]


def paired_distances(a: np.ndarray, b: np.ndarray, region: Region) -> np.ndarray:
    """Row-by-row distances between two equally shaped point arrays."""
    a = np.asarray(a, dtype=np.float64).reshape(-1, region.dimension)
    b = np.asarray(b, dtype=np.float64).reshape(-1, region.dimension)
    acc = np.zeros(a.shape[0], dtype=np.float64)
    for axis, L in enumerate(region.sides):
        diff = np.abs(a[:, axis] - b[:, axis])
        if region.periodic:
            diff = np.minimum(diff, L - diff)
        acc = acc + diff * diff
    return np.sqrt(acc)
