"""Dense plane-wave Hamiltonian at a fixed transverse Bloch vector.

    H(G', G) = [m0c^2 <1/n>^2 + (hbar c |k + G|)^2 / (2 m0c^2)] delta_{G'G} + V_{G-G'}
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import HBAR_C, PotentialModel, step_fourier
from .reciprocal import GBasis, KPoint

__all__ = ["HamiltonianMatrix", "potential_matrix", "kinetic_energies", "assemble", "empty_lattice_bands"]


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    entries: np.ndarray
    k: KPoint
    basis: GBasis

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def norm_fro(self) -> float:
        return float(np.linalg.norm(self.entries))


def _check_basis(model: PotentialModel, basis: GBasis):
    if not math.isclose(model.lattice.pitch, basis.pitch, rel_tol=1e-12):
        raise ValueError(f"basis built for pitch {basis.pitch} um, model pitch is {model.lattice.pitch} um")


def potential_matrix(model: PotentialModel, basis: GBasis) -> np.ndarray:
    """Matrix of V_{G-G'} (row G', column G), independent of k."""
    _check_basis(model, basis)
    M = basis.half_width
    span = np.arange(-2 * M, 2 * M + 1)
    gm, gl = np.meshgrid(span, span, indexing="ij")
    b = model.lattice.reciprocal_unit
    up, ug = model.region_potentials()
    table = step_fourier(up, ug, model.lattice, gm * b, gl * b)  # (4M+1)^2 differences
    d = basis.indices[None, :, :] - basis.indices[:, None, :]
    V = table[d[..., 0] + 2 * M, d[..., 1] + 2 * M]
    if __debug__:
        assert np.array_equal(V, V.T), "lattice harmonics lost inversion symmetry"
    return V.astype(complex)


def kinetic_energies(model: PotentialModel, basis: GBasis, k: KPoint) -> np.ndarray:
    q = basis.vectors + np.array([k.kx, k.ky])
    return (HBAR_C**2 * np.einsum("ij,ij->i", q, q)) / (2.0 * model.m0c2)


def assemble(model: PotentialModel, basis: GBasis, k: KPoint, potential: np.ndarray | None = None) -> HamiltonianMatrix:
    """Assemble H at ``k``.  ``potential`` may carry a precomputed
    :func:`potential_matrix` to skip recomputation during sweeps."""
    V = potential_matrix(model, basis) if potential is None else potential
    if V.shape != (basis.count, basis.count):
        raise ValueError(f"potential matrix shape {V.shape} does not match basis size {basis.count}")
    H = V.copy()
    H[np.diag_indices_from(H)] += model.rest_energy + kinetic_energies(model, basis, k)
    return HamiltonianMatrix(H, k, basis)


def empty_lattice_bands(model: PotentialModel, basis: GBasis, k: KPoint) -> np.ndarray:
    """Folded free-photon energies at ``k`` (no potential), ascending."""
    e = model.rest_energy + kinetic_energies(model, basis, k)
    return np.sort(np.real(e))
