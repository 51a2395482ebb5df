import math

import numpy as np
import pytest

from paraxial_bands import (
    KPoint,
    assemble,
    build_gbasis,
    eigendecompose,
    empty_lattice_bands,
    fourier_coefficients,
    potential_matrix,
)

import expected as X
from conftest import mirror_model


def test_rest_energy_on_diagonal(empty, basis):
    H = assemble(empty, basis, KPoint(0, 0))
    assert H.entries[0, 0].real == pytest.approx(X.REST, rel=1e-12)
    assert H.entries[0, 0] == pytest.approx(1.3317, abs=1e-4)


def test_zero_potential_diagonal(empty, basis, path):
    for k in path:
        H = assemble(empty, basis, k).entries
        assert np.count_nonzero(H - np.diag(np.diag(H))) == 0


def test_diagonal_formula(fig3, basis, path):
    k = path[7]
    H = assemble(fig3, basis, k).entries
    q = basis.vectors + k.vector
    v0 = fourier_coefficients(fig3, basis)[(0, 0)]
    expect = X.REST + X.HBAR_C**2 * (q**2).sum(1) / (2 * X.M0C2) + v0
    assert np.allclose(np.diag(H), expect, rtol=1e-13, atol=0)


def test_offdiagonal_is_potential(fig3, basis, path):
    H = assemble(fig3, basis, path[5]).entries
    v = fourier_coefficients(fig3, build_gbasis(fig3.lattice, 4))
    for i in range(basis.count):
        for j in range(basis.count):
            if i != j:
                d = tuple(basis.indices[j] - basis.indices[i])  # G - G'
                assert H[i, j] == v[d]


def test_complex_symmetric(fig4_black, basis, path):
    m = mirror_model(math.log(0.999), 0.01 + 0.01j, ff=0.31)
    for model in (fig4_black, m):
        H = assemble(model, basis, path[11]).entries
        assert np.array_equal(H, H.T)


def test_basis_mismatch_rejected(fig3):
    with pytest.raises(ValueError, match="pitch"):
        assemble(fig3, build_gbasis(4.0, 2), KPoint(0, 0))


def test_potential_shape_checked(fig3, basis):
    with pytest.raises(ValueError, match="shape"):
        assemble(fig3, basis, KPoint(0, 0), potential=np.zeros((3, 3)))


def test_potential_matrix_reuse(fig3, basis, path):
    V = potential_matrix(fig3, basis)
    k = path[3]
    assert np.array_equal(assemble(fig3, basis, k, V).entries, assemble(fig3, basis, k).entries)


def test_empty_lattice_delta(empty, basis):
    e = empty_lattice_bands(empty, basis, KPoint(0, 0))
    assert e[0] == pytest.approx(X.REST, rel=1e-12)
    assert np.all(np.diff(e) >= 0)


def test_empty_lattice_z(empty, basis, path):
    e = empty_lattice_bands(empty, basis, path[path.index_of("Z")])
    assert e[0] - X.REST == pytest.approx(X.Z_OFFSET, rel=1e-9)
    assert e[1] == pytest.approx(e[0], rel=1e-15)
    assert e[2] > e[1] + 1e-5


def test_empty_lattice_t(empty, basis, path):
    e = empty_lattice_bands(empty, basis, path[path.index_of("T")])
    assert e[0] - X.REST == pytest.approx(X.T_OFFSET, rel=1e-9)
    assert np.ptp(e[:4]) <= 1e-12 * e[0]
    assert e[4] > e[3] + 1e-5


def test_empty_eigenvalues_match(empty, basis, path):
    for k in path:
        w = np.sort(eigendecompose(assemble(empty, basis, k)).values.real)
        assert np.allclose(w, empty_lattice_bands(empty, basis, k), rtol=1e-12, atol=0)


def test_spectrum_inversion(fig4_black, basis):
    k = KPoint(0.21, 0.37)
    a = np.sort_complex(eigendecompose(assemble(fig4_black, basis, k)).values)
    b = np.sort_complex(eigendecompose(assemble(fig4_black, basis, KPoint(-0.21, -0.37))).values)
    assert np.allclose(a, b, rtol=1e-12, atol=0)


def test_constant_shift(basis):
    c = 3e-4 - 1e-5j
    k = KPoint(0.3, 0.1)
    a = eigendecompose(assemble(mirror_model(math.log(0.999), 0.01 + 0.01j), basis, k)).values
    b = eigendecompose(assemble(mirror_model(math.log(0.999), 0.01 + 0.01j, background=c), basis, k)).values
    assert np.allclose(b - a, c, rtol=0, atol=1e-12 * abs(a).max())
