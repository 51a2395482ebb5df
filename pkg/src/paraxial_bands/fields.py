"""Paraxial gauge between spinor wave functions and electromagnetic fields.

Every field here is a superposition of plane waves exp(i q.r) with
q = k + G, so the gradient becomes i q and the gauge operator is a closed
form 3x2 matrix per component.  With s = q^2 / (4 kz^2):

    e_perp = (1 + s) psi - q (q.psi) / (2 kz^2)
    e_z    = -(q.psi) / kz
    h      = same operator applied to z x psi

Its transverse block has eigenvalue 1 - s along q and 1 + s across q.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eigensolver import EigenPair
from .lattice import PotentialModel, bilinear_step_element, step_fourier
from .reciprocal import GBasis

__all__ = [
    "ParaxialityError",
    "SpinorPlaneWaveSet",
    "FieldState",
    "LongitudinalModulation",
    "gauge_forward",
    "gauge_inverse",
    "gauge_powers",
    "poynting_z",
    "directed_flux_factor",
    "weighted_gauge",
    "orthogonality_check",
    "longitudinal_modulation",
    "PARAXIAL_GUARD",
]

PARAXIAL_GUARD = 0.2


class ParaxialityError(ValueError):
    pass


def _as_2d(a, dtype):
    a = np.atleast_2d(np.asarray(a, dtype=dtype))
    if a.shape[-1] != 2:
        raise ValueError(f"expected 2-vectors, got shape {a.shape}")
    return a


@dataclass(frozen=True, eq=False)
class SpinorPlaneWaveSet:
    """Plane-wave components (q_j, psi0_j) of a transverse spinor field.

    ``q`` has shape (n, 2) in 1/um, ``psi0`` shape (n, 2) complex.
    """

    kz: float
    q: np.ndarray
    psi0: np.ndarray
    polarization_tag: str | None = None

    def __post_init__(self):
        q = _as_2d(self.q, float)
        psi = _as_2d(self.psi0, complex)
        if q.shape != psi.shape:
            raise ValueError(f"q and psi0 shapes differ: {q.shape} vs {psi.shape}")
        if not self.kz > 0:
            raise ValueError("kz must be positive")
        if self.polarization_tag not in (None, "x", "y"):
            raise ValueError(f"polarization tag must be 'x', 'y' or None, got {self.polarization_tag!r}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "psi0", psi)

    def __len__(self):
        return self.q.shape[0]

    @classmethod
    def from_coefficients(cls, coeffs, basis: GBasis, k, kz: float, polarization: str = "x"):
        """Scalar band coefficients C(G) times a Cartesian unit vector."""
        c = np.asarray(coeffs, dtype=complex)
        unit = np.array([1.0, 0.0]) if polarization == "x" else np.array([0.0, 1.0])
        kv = np.asarray(getattr(k, "vector", k), dtype=float)
        return cls(kz, basis.vectors + kv, c[:, None] * unit, polarization)


@dataclass(frozen=True, eq=False)
class FieldState:
    """Per-component electric ``e`` and magnetic ``h`` 3-vectors, shape (n, 3)."""

    q: np.ndarray
    e: np.ndarray
    h: np.ndarray
    kz: float

    def __len__(self):
        return self.q.shape[0]


def _s(q, kz):
    return np.einsum("ij,ij->i", q, q) / (4.0 * kz * kz)


def _apply_forward(q, psi, kz):
    s = _s(q, kz)
    qp = np.einsum("ij,ij->i", q, psi)
    out = np.empty((q.shape[0], 3), dtype=complex)
    out[:, :2] = (1.0 + s)[:, None] * psi - q * (qp / (2.0 * kz * kz))[:, None]
    out[:, 2] = -qp / kz
    return out


def _apply_inverse(q, e_perp, kz, exact):
    s = _s(q, kz)
    qe = np.einsum("ij,ij->i", q, e_perp)
    if exact:
        # invert (1 - s) along q and (1 + s) across q, without dividing by q^2
        return e_perp / (1.0 + s)[:, None] + q * (qe / (2.0 * kz * kz * (1.0 - s * s)))[:, None]
    return (1.0 - s)[:, None] * e_perp + q * (qe / (2.0 * kz * kz))[:, None]


def _zcross(v):
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def _guard(q, kz, guard):
    if guard is None:
        return
    ratio = np.sqrt(np.einsum("ij,ij->i", q, q)) / kz
    bad = np.nonzero(ratio > guard)[0]
    if bad.size:
        j = int(bad[0])
        raise ParaxialityError(
            f"component {j} (q = ({q[j, 0]:.6g}, {q[j, 1]:.6g}) 1/um) has |q|/kz = {ratio[j]:.4g} > {guard}"
        )


def gauge_forward(spinors: SpinorPlaneWaveSet, guard: float | None = PARAXIAL_GUARD) -> FieldState:
    """Fields e, h of each plane-wave component.

    Raises :class:`ParaxialityError` naming the first component with
    |q|/kz above ``guard``; pass ``guard=None`` to skip the check.
    """
    q, kz = spinors.q, spinors.kz
    _guard(q, kz, guard)
    e = _apply_forward(q, spinors.psi0, kz)
    h = _apply_forward(q, _zcross(spinors.psi0), kz)
    return FieldState(q, e, h, kz)


def gauge_inverse(fs: FieldState, kz: float | None = None, exact: bool = True) -> SpinorPlaneWaveSet:
    """Recover the spinor from the transverse electric field.

    ``exact=True`` inverts the forward operator algebraically, so the round
    trip is an identity.  ``exact=False`` applies the second-order series
    (1 - s) e + q (q.e) / (2 kz^2), whose round trip returns (1 - s^2) psi.
    """
    kz = fs.kz if kz is None else kz
    psi = _apply_inverse(fs.q, fs.e[:, :2], kz, exact)
    return SpinorPlaneWaveSet(kz, fs.q, psi)


def gauge_powers(mu: float = 1.0) -> tuple[float, float]:
    """Impedance exponents (a, b) that keep the spinor transverse."""
    if not mu > 0:
        raise ValueError(f"permeability must be positive, got {mu}")
    return (1.0 + 2.0 * mu) / (2.0 * mu), (1.0 - 2.0 * mu) / (2.0 * mu)


def directed_flux_factor(q, kz: float) -> float:
    """Ratio of total to longitudinal flux of one plane wave, 1 + q^2/(2 kz^2)."""
    q = np.asarray(q, dtype=float)
    q2 = float(q @ q) if q.ndim else float(q) ** 2
    return 1.0 + 0.5 * q2 / kz**2


def poynting_z(spinors: SpinorPlaneWaveSet, r) -> np.ndarray | float:
    """Longitudinal flux density |psi(r)|^2 in units of c/(8 pi)."""
    r = np.asarray(r, dtype=float)
    phase = np.exp(1j * (r[..., None, :] * spinors.q).sum(-1))  # [..., n]
    psi = np.einsum("...n,nc->...c", phase, spinors.psi0)
    out = np.einsum("...c,...c->...", psi, psi.conj()).real
    return float(out) if out.ndim == 0 else out


def _z_power_matrix(model: PotentialModel, basis: GBasis, p: float, conj: bool = False) -> np.ndarray | None:
    """Multiplication by Z^p in the plane-wave basis (Z = mu / n), or None if Z is uniform."""
    if model.is_mirror:
        return None
    mu = model.cavity.mu
    zp = (mu / model.pattern.n_pixel) ** p
    zg = (mu / model.pattern.n_grid) ** p
    if conj:
        zp, zg = np.conj(zp), np.conj(zg)
    d = (basis.indices[:, None, :] - basis.indices[None, :, :]) * model.lattice.reciprocal_unit
    return step_fourier(zp, zg, model.lattice, d[..., 0], d[..., 1]).astype(complex)


def weighted_gauge(model: PotentialModel, coeffs, basis: GBasis, k, polarization: str = "x", conj: bool = False):
    """Transverse (e, h) amplitudes per G for Z^a E Z^-a psi and Z^-b E Z^b (z x psi).

    For uniform impedance (mirror patterning) this is the plane-wave gauge.
    With ``conj`` the impedance is complex conjugated, as for a concomitant
    partner.  Returns two (N, 2) arrays.
    """
    a, b = gauge_powers(model.cavity.mu)
    sp = SpinorPlaneWaveSet.from_coefficients(coeffs, basis, k, model.kz, polarization)
    q, kz = sp.q, sp.kz

    def sandwich(left, right, psi):
        Tr = _z_power_matrix(model, basis, right, conj)
        if Tr is not None:
            psi = Tr @ psi
        out = _apply_forward(q, psi, kz)[:, :2]
        Tl = _z_power_matrix(model, basis, left, conj)
        if Tl is not None:
            out = Tl @ out
        return out

    return sandwich(a, -a, sp.psi0), sandwich(-b, b, _zcross(sp.psi0))


def orthogonality_check(eig_a: EigenPair, eig_b: EigenPair, basis: GBasis, kz: float | None = None, model: PotentialModel | None = None) -> complex:
    """Cell-averaged z.(h~* x e) between band a and the partner of band b.

    The concomitant partner of b carries coefficients C_b* and conjugated
    impedance; conjugating its field returns the C_b coefficients with the
    original impedance, so the overlap is a non-conjugated sum over G.
    Expected value is -1 for a = b and 0 otherwise, up to the fourth-order
    gauge term s^2.
    """
    if eig_a.k is None or eig_b.k is None or not eig_a.k.same_k(eig_b.k):
        raise ValueError("orthogonality check needs two eigenpairs from the same k-point")
    if model is None:
        if kz is None:
            raise ValueError("either kz or model is required")
        from .lattice import CavitySpec, MirrorPattern, SquareLattice

        model = PotentialModel(CavitySpec(1.0, 2.0 * math.pi / kz, 1.0), SquareLattice(basis.pitch, 0.5), MirrorPattern(0, 0))
    elif kz is not None and not math.isclose(kz, model.kz, rel_tol=1e-12):
        raise ValueError(f"kz {kz} does not match the model's {model.kz}")
    e, _ = weighted_gauge(model, eig_a.vector, basis, eig_a.k, "x")
    _, h = weighted_gauge(model, eig_b.vector, basis, eig_b.k, "x")
    return complex(np.sum(h[:, 0] * e[:, 1] - h[:, 1] * e[:, 0]))


@dataclass(frozen=True)
class LongitudinalModulation:
    """Step-plus-ramp modulation eta(z) of period 2L.

    On (-L, L): eta = i phi (theta(z) - 1/2) - i phi z / (2L), theta(0) = 1/2.
    """

    phi_qk: complex
    L: float

    def eta(self, z):
        z = np.asarray(z, dtype=float)
        zr = z - 2.0 * self.L * np.floor((z + self.L) / (2.0 * self.L))
        out = 1j * self.phi_qk * (0.5 * np.sign(zr) - zr / (2.0 * self.L))
        return complex(out) if np.ndim(out) == 0 else out

    __call__ = eta

    @property
    def jump(self) -> complex:
        return 1j * self.phi_qk

    def mean(self, nodes: int = 64) -> complex:
        """Period average by Gauss-Legendre on each smooth half."""
        x, w = np.polynomial.legendre.leggauss(nodes)
        h = 0.5 * self.L
        total = 0j
        for lo in (-self.L, 0.0):
            total += np.sum(w * h * self.eta(lo + h * (x + 1.0)))
        return complex(total / (2.0 * self.L))

    def derivative_mean(self, nodes: int = 64) -> complex:
        """Period average of d eta / dz.

        The smooth ramp is differentiated numerically at Gauss nodes and
        integrated; the step at z = 0 contributes its jump i phi (eta is
        continuous at z = +-L).
        """
        x, w = np.polynomial.legendre.leggauss(nodes)
        h = 0.5 * self.L
        eps = 0.5 * h * (1.0 - x.max())
        total = 0j
        for lo in (-self.L, 0.0):
            z = lo + h * (x + 1.0)
            d = (self.eta(z + eps) - self.eta(z - eps)) / (2.0 * eps)
            total += np.sum(w * h * d)
        return complex((total + self.jump) / (2.0 * self.L))


def longitudinal_modulation(model: PotentialModel, eig, basis: GBasis) -> LongitudinalModulation:
    """phi = -i sum C(G') C(G) lnR_{G-G'} and the resulting eta(z).

    Index patterning has no mirror term and gives phi = 0.
    """
    if not model.is_mirror:
        return LongitudinalModulation(0j, model.cavity.L)
    c = np.asarray(getattr(eig, "vector", eig), dtype=complex)
    lp, lg = model.region_lnR()
    phi = -1j * bilinear_step_element(c, basis, model.lattice, lp, lg)
    return LongitudinalModulation(phi, model.cavity.L)
