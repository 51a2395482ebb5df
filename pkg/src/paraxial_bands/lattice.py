"""Square-lattice geometry, complex effective potential and its lattice harmonics.

Units throughout: lengths in micrometers, energies in eV.

The effective potential of a patterned cavity array is

    U(r) = <1/n> [ i (hbar c / 2L) ln R(r) + m0c^2 (1/n(r) - <1/n>) ] + background

and is expanded as U(r) = sum_G V_G exp(-i G.r).  With a square pixel centred
in the cell, U takes one value in the pixel and another in the grid, so V_G is
known in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

HBAR_C = 0.197327  # eV um

__all__ = [
    "HBAR_C",
    "CavitySpec",
    "SquareLattice",
    "MirrorPattern",
    "IndexPattern",
    "PotentialModel",
    "ValidityReport",
    "MatrixElementCheck",
    "evaluate_potential",
    "step_fourier",
    "fourier_coefficients",
    "fourier_quadrature_oracle",
    "validity_check",
    "matrix_element_validity",
]


@dataclass(frozen=True)
class CavitySpec:
    """Vertical cavity (or waveguide) parameters.

    ``L`` is the cavity length; the one-wavelength convention fixes the
    longitudinal wavenumber to ``kz = 2*pi/L``.
    """

    n_avg: complex
    L: float
    lambda0: float
    mu: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "n_avg", complex(self.n_avg))
        if not self.L > 0:
            raise ValueError(f"cavity length must be positive, got L={self.L}")
        if not self.lambda0 > 0:
            raise ValueError(f"wavelength must be positive, got lambda0={self.lambda0}")
        if self.n_avg.real < 1:
            raise ValueError(f"Re(n_avg) must be >= 1, got {self.n_avg}")
        if not self.mu > 0:
            raise ValueError(f"permeability must be positive, got mu={self.mu}")

    @property
    def kz(self) -> float:
        return 2.0 * math.pi / self.L

    @property
    def m0c2(self) -> complex:
        """Effective rest energy of a uniform medium of index ``n_avg``."""
        return self.n_avg * HBAR_C * self.kz


@dataclass(frozen=True)
class SquareLattice:
    pitch: float
    fill_factor: float

    def __post_init__(self):
        if not self.pitch > 0:
            raise ValueError(f"lattice pitch must be positive, got {self.pitch}")
        if not 0.0 < self.fill_factor < 1.0:
            raise ValueError(f"fill factor must lie in (0, 1), got {self.fill_factor}")

    @property
    def pixel_width(self) -> float:
        return self.pitch * math.sqrt(self.fill_factor)

    @property
    def reciprocal_unit(self) -> float:
        return 2.0 * math.pi / self.pitch

    def reduce(self, x, y):
        """Fold points into the unit cell [-pitch/2, pitch/2)^2."""
        p = self.pitch
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return x - p * np.floor(x / p + 0.5), y - p * np.floor(y / p + 0.5)

    def in_pixel(self, x, y):
        xr, yr = self.reduce(x, y)
        h = 0.5 * self.pixel_width
        return (np.abs(xr) < h) & (np.abs(yr) < h)


@dataclass(frozen=True)
class MirrorPattern:
    """Reflectivity patterning of the cavity mirror.

    ``delta_lnR`` is the complex contrast d|R| + i*dphi; the grid carries
    ``lnR_grid = lnR_pixel - delta_lnR``.  Positive ``dphi`` makes the grid
    phase-advancing, which blueshifts the modes.
    """

    lnR_pixel: complex
    delta_lnR: complex
    allow_gain: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lnR_pixel", complex(self.lnR_pixel))
        object.__setattr__(self, "delta_lnR", complex(self.delta_lnR))
        if not self.allow_gain:
            if self.lnR_pixel.real > 0 or self.lnR_grid.real > 0:
                raise ValueError(
                    "Re(ln R) > 0 means net gain "
                    f"(pixel {self.lnR_pixel}, grid {self.lnR_grid}); set allow_gain=True"
                )

    @property
    def lnR_grid(self) -> complex:
        return self.lnR_pixel - self.delta_lnR

    @classmethod
    def from_reflectivities(cls, r_pixel: float, r_grid: float, dphi: float = 0.0):
        """Build from amplitude reflectivities and grid phase advance."""
        lnp = math.log(r_pixel)
        return cls(lnp, complex(lnp - math.log(r_grid), dphi))


@dataclass(frozen=True)
class IndexPattern:
    n_pixel: complex
    n_grid: complex

    def __post_init__(self):
        object.__setattr__(self, "n_pixel", complex(self.n_pixel))
        object.__setattr__(self, "n_grid", complex(self.n_grid))
        if self.n_pixel.real < 1 or self.n_grid.real < 1:
            raise ValueError(
                f"refractive indices need Re(n) >= 1, got pixel {self.n_pixel}, grid {self.n_grid}"
            )

    @property
    def delta_n(self) -> complex:
        return self.n_pixel - self.n_grid


Pattern = Union[MirrorPattern, IndexPattern]


@dataclass(frozen=True)
class PotentialModel:
    """Cavity + lattice + pattern; the complete input of the band problem.

    ``background`` is a uniform complex energy added everywhere (material
    absorption, output coupling through the second mirror).  It shifts every
    eigenvalue by the same amount.
    """

    cavity: CavitySpec
    lattice: SquareLattice
    pattern: Pattern
    background: complex = 0.0

    def __post_init__(self):
        if not isinstance(self.pattern, (MirrorPattern, IndexPattern)):
            raise TypeError(f"pattern must be MirrorPattern or IndexPattern, got {type(self.pattern)!r}")
        object.__setattr__(self, "background", complex(self.background))

    @property
    def is_mirror(self) -> bool:
        return isinstance(self.pattern, MirrorPattern)

    @property
    def inv_n_avg(self) -> complex:
        """Area-weighted cell average of 1/n."""
        if self.is_mirror:
            return 1.0 / self.cavity.n_avg
        ff = self.lattice.fill_factor
        return ff / self.pattern.n_pixel + (1.0 - ff) / self.pattern.n_grid

    @property
    def n_cell_avg(self) -> complex:
        """Area-weighted cell average of n."""
        if self.is_mirror:
            return self.cavity.n_avg
        ff = self.lattice.fill_factor
        return ff * self.pattern.n_pixel + (1.0 - ff) * self.pattern.n_grid

    @property
    def kz(self) -> float:
        return self.cavity.kz

    @property
    def m0c2(self) -> complex:
        return HBAR_C * self.kz / self.inv_n_avg

    @property
    def rest_energy(self) -> complex:
        """Band bottom of the empty lattice, m0c^2 <1/n>^2."""
        return self.m0c2 * self.inv_n_avg**2

    def region_potentials(self) -> tuple[complex, complex]:
        """(U_pixel, U_grid) in eV, background included."""
        inv = self.inv_n_avg
        if self.is_mirror:
            pref = 1j * inv * HBAR_C / (2.0 * self.cavity.L)
            up = pref * self.pattern.lnR_pixel
            ug = pref * self.pattern.lnR_grid
        else:
            pref = self.m0c2 * inv
            up = pref * (1.0 / self.pattern.n_pixel - inv)
            ug = pref * (1.0 / self.pattern.n_grid - inv)
        return up + self.background, ug + self.background

    def region_lnR(self) -> tuple[complex, complex]:
        if self.is_mirror:
            return self.pattern.lnR_pixel, self.pattern.lnR_grid
        return 0j, 0j

    def baseline_loss(self) -> float:
        """Broadening of a structure made entirely of pixel material."""
        up, _ = self.region_potentials()
        return abs((self.rest_energy + up).imag)

    def with_fill_factor(self, ff: float) -> "PotentialModel":
        return replace(self, lattice=replace(self.lattice, fill_factor=ff))


def evaluate_potential(model: PotentialModel, r) -> complex | np.ndarray:
    """Potential U at point(s) ``r`` (last axis of length 2, micrometers)."""
    r = np.asarray(r, dtype=float)
    up, ug = model.region_potentials()
    inside = model.lattice.in_pixel(r[..., 0], r[..., 1])
    out = np.where(inside, up, ug)
    return complex(out) if out.ndim == 0 else out


def _sinc(x):
    x = np.asarray(x, dtype=float)
    safe = np.where(x == 0.0, 1.0, x)
    return np.where(x == 0.0, 1.0, np.sin(safe) / safe)


def step_fourier(inside: complex, outside: complex, lattice: SquareLattice, gx, gy):
    """Lattice harmonic at (gx, gy) of a function equal to ``inside`` on the
    pixel and ``outside`` on the grid, with convention f = sum f_G exp(-iG.r)."""
    gx = np.asarray(gx, dtype=float)
    gy = np.asarray(gy, dtype=float)
    h = 0.5 * lattice.pixel_width
    shape = (inside - outside) * lattice.fill_factor * _sinc(gx * h) * _sinc(gy * h)
    return shape + np.where((gx == 0.0) & (gy == 0.0), outside, 0.0)


def fourier_coefficients(model: PotentialModel, basis) -> dict[tuple[int, int], complex]:
    """Map integer reciprocal index (m, l) -> V_G for every G of ``basis``."""
    up, ug = model.region_potentials()
    g = basis.vectors
    vals = step_fourier(up, ug, model.lattice, g[:, 0], g[:, 1])
    return {(int(m), int(l)): complex(v) for (m, l), v in zip(basis.indices, vals)}


def _gauss_nodes(a: float, b: float, n: int, panel: int = 64):
    """Composite Gauss-Legendre nodes/weights on [a, b] with about n nodes."""
    n_panels = max(1, math.ceil(n / panel))
    per = max(8, math.ceil(n / n_panels))
    x0, w0 = np.polynomial.legendre.leggauss(per)
    edges = np.linspace(a, b, n_panels + 1)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        xs.append(lo + half * (x0 + 1.0))
        ws.append(half * w0)
    return np.concatenate(xs), np.concatenate(ws)


def fourier_quadrature_oracle(model: PotentialModel, G, resolution: int = 256) -> complex:
    """Cell integral (1/pitch^2) \\int U(r) exp(iG.r) d^2r by direct quadrature.

    Test oracle for :func:`fourier_coefficients`.  The potential is sampled
    pointwise through :func:`evaluate_potential`; the cell is split at the
    pixel edges and each piece is integrated with composite Gauss-Legendre,
    ``resolution`` nodes per axis in total.
    """
    if resolution < 64:
        raise ValueError("resolution must be >= 64")
    lat = model.lattice
    p, h = lat.pitch, 0.5 * lat.pixel_width
    cuts = [-0.5 * p, -h, h, 0.5 * p]
    xs, ws = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        x, w = _gauss_nodes(lo, hi, max(8, round(resolution * (hi - lo) / p)))
        xs.append(x)
        ws.append(w)
    x = np.concatenate(xs)
    w = np.concatenate(ws)
    gx, gy = float(G[0]), float(G[1])
    X, Y = np.meshgrid(x, x, indexing="ij")
    # sample strictly inside each piece, never on an edge
    U = evaluate_potential(model, np.stack([X, Y], axis=-1))
    phase = np.exp(1j * gx * x)[:, None] * np.exp(1j * gy * x)[None, :]
    return complex(np.einsum("i,j,ij->", w, w, U * phase) / p**2)


@dataclass(frozen=True)
class ValidityReport:
    """Paraxial-validity summary.  Verdicts are ``"pass"`` or ``"warn"``."""

    xi: float
    bound_mirror: float
    bound_index: float
    contrast: float
    contrast_kind: str
    smoothness: float
    verdicts: dict = field(default_factory=dict)
    matrix_element_bounds: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(v == "pass" for v in self.verdicts.values())

    def as_dict(self) -> dict:
        return {
            "xi": self.xi,
            "bound_mirror": self.bound_mirror,
            "bound_index": self.bound_index,
            "contrast": self.contrast,
            "contrast_kind": self.contrast_kind,
            "smoothness": self.smoothness,
            "verdicts": dict(self.verdicts),
            "matrix_element_bounds": [m.as_dict() for m in self.matrix_element_bounds],
        }


def validity_check(model: PotentialModel) -> ValidityReport:
    """Check the low-contrast conditions that keep the paraxial Hamiltonian valid.

    The order parameter is xi = |<1/n>| lambda / (2 pitch).  Mirror patterning
    needs |delta lnR| <~ 4 pi xi^2 / FF (FF <= 1/2) or / (1 - FF) (FF > 1/2);
    index patterning needs |delta_n <1/n>| <~ xi / FF (resp. 1 - FF).
    """
    lat = model.lattice
    xi = abs(model.inv_n_avg) * model.cavity.lambda0 / (2.0 * lat.pitch)
    ff = lat.fill_factor
    branch = ff if ff <= 0.5 else 1.0 - ff
    bound_mirror = 4.0 * math.pi * xi**2 / branch
    bound_index = xi / branch
    if model.is_mirror:
        contrast = abs(model.pattern.delta_lnR)
        kind, bound = "mirror", bound_mirror
    else:
        contrast = abs(model.pattern.delta_n * model.inv_n_avg)
        kind, bound = "index", bound_index
    # lowest-harmonic estimate of |grad dU| / (kz dU); informational only
    smoothness = lat.reciprocal_unit / model.kz
    verdicts = {"contrast": "pass" if contrast <= bound else "warn"}
    return ValidityReport(xi, bound_mirror, bound_index, contrast, kind, smoothness, verdicts)


@dataclass(frozen=True)
class MatrixElementCheck:
    element: float
    bound: float
    gradient_element: float | None = None
    gradient_bound: float | None = None

    @property
    def verdict(self) -> str:
        ok = self.element <= self.bound
        if self.gradient_element is not None:
            ok = ok and self.gradient_element <= self.gradient_bound
        return "pass" if ok else "warn"

    def as_dict(self) -> dict:
        return {
            "element": self.element,
            "bound": self.bound,
            "gradient_element": self.gradient_element,
            "gradient_bound": self.gradient_bound,
            "verdict": self.verdict,
        }


def _difference_table(basis):
    idx = basis.indices
    return idx[None, :, :] - idx[:, None, :]  # [G', G] -> G - G'


def bilinear_step_element(coeffs, basis, lattice, inside, outside):
    """sum_{G,G'} C(G') C(G) f_{G-G'} for a pixel/grid step function f."""
    d = _difference_table(basis) * lattice.reciprocal_unit
    F = step_fourier(inside, outside, lattice, d[..., 0], d[..., 1])
    c = np.asarray(coeffs)
    return complex(c @ F @ c)


def matrix_element_validity(model: PotentialModel, eigvec, basis) -> MatrixElementCheck:
    """Intraband matrix-element form of the validity conditions.

    Uses the biorthogonal (non-conjugated) product with the band's own
    coefficients.  Mirror case: |<lnR>| against 4 pi xi^2.  Index case:
    |<dn>| / |<n>| against xi and |<grad dn>| / (kz |<n>|) against xi^2.
    """
    c = np.asarray(getattr(eigvec, "vector", eigvec), dtype=complex)
    sp = complex(c @ c)
    if abs(sp - 1.0) > 1e-6:
        raise ValueError(f"eigenvector is not biorthonormalized (sum C^2 = {sp:.3e})")
    rep = validity_check(model)
    lat = model.lattice
    if model.is_mirror:
        lp, lg = model.region_lnR()
        el = abs(bilinear_step_element(c, basis, lat, lp, lg))
        return MatrixElementCheck(el, 4.0 * math.pi * rep.xi**2)
    navg = model.n_cell_avg
    dn_p = model.pattern.n_pixel - navg
    dn_g = model.pattern.n_grid - navg
    el = abs(bilinear_step_element(c, basis, lat, dn_p, dn_g)) / abs(navg)
    d = _difference_table(basis) * lat.reciprocal_unit
    F = step_fourier(dn_p, dn_g, lat, d[..., 0], d[..., 1])
    grad = [complex(c @ (-1j * d[..., i] * F) @ c) for i in range(2)]
    gel = math.hypot(abs(grad[0]), abs(grad[1])) / (model.kz * abs(navg))
    return MatrixElementCheck(el, rep.xi, gel, rep.xi**2)
