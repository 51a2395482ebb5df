"""Reciprocal-lattice basis and Brillouin-zone paths for the square lattice."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import SquareLattice

__all__ = ["GBasis", "KPoint", "KPath", "build_gbasis", "standard_kpath"]


@dataclass(frozen=True, eq=False)
class GBasis:
    """Plane-wave basis G = (2 pi / pitch) (m, l), |m|, |l| <= half_width.

    Index 0 is always G = 0; the remaining vectors follow in row-major (m, l)
    order.
    """

    pitch: float
    half_width: int
    indices: np.ndarray  # (count, 2) int
    vectors: np.ndarray  # (count, 2) float, 1/um

    @property
    def count(self) -> int:
        return len(self.indices)

    def __len__(self):
        return self.count

    def position(self, m: int, l: int) -> int:
        hits = np.nonzero((self.indices[:, 0] == m) & (self.indices[:, 1] == l))[0]
        if len(hits) == 0:
            raise KeyError((m, l))
        return int(hits[0])

    def inversion_permutation(self) -> np.ndarray:
        """perm[i] is the position of -G_i."""
        lookup = {(int(m), int(l)): i for i, (m, l) in enumerate(self.indices)}
        return np.array([lookup[(-int(m), -int(l))] for m, l in self.indices])


def build_gbasis(lattice: SquareLattice | float, M: int = 2) -> GBasis:
    """(2M+1)^2 reciprocal vectors of the square lattice."""
    if int(M) != M or M < 1:
        raise ValueError(f"basis half-width must be an integer >= 1, got {M}")
    M = int(M)
    pitch = lattice.pitch if isinstance(lattice, SquareLattice) else float(lattice)
    ms = np.arange(-M, M + 1)
    mm, ll = np.meshgrid(ms, ms, indexing="ij")
    idx = np.stack([mm.ravel(), ll.ravel()], axis=1)
    zero = np.nonzero((idx[:, 0] == 0) & (idx[:, 1] == 0))[0][0]
    idx = np.concatenate([idx[zero : zero + 1], np.delete(idx, zero, axis=0)])
    idx.setflags(write=False)
    vec = idx * (2.0 * math.pi / pitch)
    vec.setflags(write=False)
    return GBasis(pitch, M, idx, vec)


@dataclass(frozen=True)
class KPoint:
    kx: float
    ky: float
    label: str | None = None
    path_coordinate: float = 0.0

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.kx, self.ky])

    def same_k(self, other: "KPoint", tol: float = 1e-12) -> bool:
        return abs(self.kx - other.kx) <= tol and abs(self.ky - other.ky) <= tol


@dataclass(frozen=True)
class KPath:
    segments: tuple  # ((start KPoint, end KPoint, samples), ...)
    points: tuple  # flattened KPoints

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def index_of(self, label: str) -> int:
        """First path index carrying ``label``."""
        for i, p in enumerate(self.points):
            if p.label == label:
                return i
        raise KeyError(label)

    def labeled(self) -> list[tuple[int, KPoint]]:
        return [(i, p) for i, p in enumerate(self.points) if p.label is not None]

    @property
    def coordinates(self) -> np.ndarray:
        return np.array([p.path_coordinate for p in self.points])


def standard_kpath(lattice: SquareLattice | float, samples_per_segment: int = 20) -> KPath:
    """Delta -> Z -> T -> Delta, each leg sampled uniformly with endpoints."""
    if samples_per_segment < 2:
        raise ValueError("samples_per_segment must be >= 2")
    pitch = lattice.pitch if isinstance(lattice, SquareLattice) else float(lattice)
    b = math.pi / pitch
    corners = [("Delta", 0.0, 0.0), ("Z", b, 0.0), ("T", b, b), ("Delta", 0.0, 0.0)]
    points: list[KPoint] = []
    segments = []
    s0 = 0.0
    for (la, xa, ya), (lb, xb, yb) in zip(corners[:-1], corners[1:]):
        length = math.hypot(xb - xa, yb - ya)
        start = KPoint(xa, ya, la, s0)
        end = KPoint(xb, yb, lb, s0 + length)
        segments.append((start, end, samples_per_segment))
        n = samples_per_segment - 1
        first = 0 if not points else 1
        for j in range(first, samples_per_segment):
            t = j / n
            if j == 0:
                points.append(start)
            elif j == n:
                points.append(end)
            else:
                points.append(KPoint(xa + t * (xb - xa), ya + t * (yb - ya), None, s0 + t * length))
        s0 += length
    return KPath(tuple(segments), tuple(points))
