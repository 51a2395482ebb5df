import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paraxial_bands import (
    CavitySpec,
    IndexPattern,
    MirrorPattern,
    PotentialModel,
    SquareLattice,
    build_gbasis,
    evaluate_potential,
    fourier_coefficients,
    fourier_quadrature_oracle,
    matrix_element_validity,
    validity_check,
)
from paraxial_bands.lattice import step_fourier

import expected as X
from conftest import CAVITY, mirror_model


class TestTypes:
    def test_cavity_derived(self):
        assert CAVITY.kz == pytest.approx(X.KZ, rel=1e-15)
        assert CAVITY.m0c2.real == pytest.approx(X.M0C2, rel=1e-12)

    @pytest.mark.parametrize("kw", [dict(L=0), dict(L=-1), dict(n_avg=0.9), dict(mu=0)])
    def test_cavity_rejects(self, kw):
        base = dict(n_avg=3.5, L=0.266, lambda0=0.96, mu=1.0)
        base.update(kw)
        with pytest.raises(ValueError):
            CavitySpec(**base)

    @pytest.mark.parametrize("ff", [0.0, 1.0, -0.1, 1.5])
    def test_lattice_rejects_fill_factor(self, ff):
        with pytest.raises(ValueError, match="fill factor"):
            SquareLattice(5.0, ff)

    def test_pixel_width(self):
        assert SquareLattice(5.0, 0.25).pixel_width == pytest.approx(2.5)

    def test_mirror_gain_rejected(self):
        MirrorPattern(0.0, 0.01)  # grid lnR = -0.01 is loss
        with pytest.raises(ValueError, match="gain"):
            MirrorPattern(0.0, -0.01)
        assert MirrorPattern(0.0, -0.01, allow_gain=True).lnR_grid.real > 0

    def test_mirror_gain_in_pixel(self):
        with pytest.raises(ValueError, match="gain"):
            MirrorPattern(0.01, 0.0)

    def test_index_rejects(self):
        with pytest.raises(ValueError):
            IndexPattern(0.5, 1.5)

    def test_from_reflectivities(self):
        p = MirrorPattern.from_reflectivities(0.999, 0.989, 0.0)
        assert p.lnR_grid.real == pytest.approx(math.log(0.989), rel=1e-12)

    def test_inv_n_avg(self, holey):
        assert holey.inv_n_avg == pytest.approx(0.02 + 0.98 / 1.5)
        assert mirror_model().inv_n_avg == pytest.approx(1 / 3.5)


class TestEvaluatePotential:
    def test_fig3_pixel_zero(self, fig3):
        assert evaluate_potential(fig3, (0.0, 0.0)) == 0

    def test_fig3_grid_blueshift(self, fig3):
        u = evaluate_potential(fig3, (2.4, 2.4))
        assert u.real == pytest.approx(X.U_GRID_FIG3, rel=1e-12)
        assert u.imag == 0.0

    def test_fig4_pixel_loss(self, fig4_black):
        u = evaluate_potential(fig4_black, (0.1, -0.3))
        assert u.real == 0.0
        assert u.imag == pytest.approx(-X.B0_FIG4, rel=1e-12)
        assert abs(u) == pytest.approx(1.06e-4, rel=1e-3)

    @settings(max_examples=50, deadline=None)
    @given(
        x=st.floats(-20, 20),
        y=st.floats(-20, 20),
        i=st.integers(-3, 3),
        j=st.integers(-3, 3),
    )
    def test_periodic(self, x, y, i, j):
        m = mirror_model(math.log(0.999), 0.01 + 0.01j)
        a = evaluate_potential(m, (x, y))
        b = evaluate_potential(m, (x + 5.0 * i, y + 5.0 * j))
        # points on a pixel edge may fold either way after the shift
        h = 0.5 * m.lattice.pixel_width
        xr, yr = m.lattice.reduce(x, y)
        if min(abs(abs(xr) - h), abs(abs(yr) - h)) > 1e-9:
            assert a == b

    @settings(max_examples=50, deadline=None)
    @given(x=st.floats(-2.49, 2.49), y=st.floats(-2.49, 2.49))
    def test_inversion_symmetric(self, x, y):
        m = mirror_model(math.log(0.999), 0.01 + 0.01j)
        assert evaluate_potential(m, (x, y)) == evaluate_potential(m, (-x, -y))

    def test_vectorized(self, fig3):
        r = np.array([[0.0, 0.0], [2.4, 2.4]])
        u = evaluate_potential(fig3, r)
        assert u.shape == (2,)

    def test_phase_only_is_real(self):
        m = mirror_model(0.0, 0.03j)
        up, ug = m.region_potentials()
        assert up.imag == 0 and ug.imag == 0

    def test_background_added(self):
        m = mirror_model(0.0, 0.01j, background=1e-4 - 2e-5j)
        assert evaluate_potential(m, (0, 0)) == pytest.approx(1e-4 - 2e-5j)


class TestFourier:
    def test_uniform(self, basis):
        m = mirror_model(math.log(0.99), 0.0)
        v = fourier_coefficients(m, basis)
        u, _ = m.region_potentials()
        assert v[(0, 0)] == u
        assert all(val == 0 for key, val in v.items() if key != (0, 0))

    def test_first_harmonic_half_fill(self, fig3, basis):
        v = fourier_coefficients(fig3, basis)
        up, ug = fig3.region_potentials()
        assert v[(1, 0)] / (up - ug) == pytest.approx(X.SINC_HALF, rel=1e-12)

    def test_v0_fig3(self, fig3, basis):
        assert fourier_coefficients(fig3, basis)[(0, 0)].real == pytest.approx(X.V0_FIG3, rel=1e-12)
        assert X.V0_FIG3 == pytest.approx(5.299e-4, rel=1e-3)

    def test_inversion_exact(self, basis):
        m = mirror_model(math.log(0.999), 0.01 + 0.02j, ff=0.37)
        v = fourier_coefficients(m, basis)
        for (a, b), val in v.items():
            assert v[(-a, -b)] == val

    @pytest.mark.parametrize("G", [(1, 0), (0, 2), (1, -1), (2, 1)])
    def test_against_quadrature(self, G):
        m = mirror_model(math.log(0.999), 0.01 + 0.01j, ff=0.5)
        b = build_gbasis(m.lattice, 2)
        v = fourier_coefficients(m, b)[G]
        g = np.array(G) * m.lattice.reciprocal_unit
        q = fourier_quadrature_oracle(m, g, 2048)
        assert abs(q - v) <= 1e-8 * abs(v)

    def test_quadrature_uniform_zero(self):
        m = mirror_model(math.log(0.99), 0.0)
        u, _ = m.region_potentials()
        q = fourier_quadrature_oracle(m, (2 * math.pi / 5, 0), 64)
        assert abs(q) <= 1e-12 * abs(u)

    def test_quadrature_area_weighting(self):
        m = mirror_model(math.log(0.999), 0.01 + 0.01j, ff=0.25)
        up, ug = m.region_potentials()
        q = fourier_quadrature_oracle(m, (0, 0), 256)
        assert q == pytest.approx(0.25 * up + 0.75 * ug, rel=1e-12)

    def test_quadrature_resolution_guard(self, fig3):
        with pytest.raises(ValueError):
            fourier_quadrature_oracle(fig3, (0, 0), 32)

    @staticmethod
    def _partial_sum_error(m, M, r, target):
        b = build_gbasis(m.lattice, M)
        v = np.array(list(fourier_coefficients(m, b).values()))
        return abs(np.sum(v * np.exp(-1j * (b.vectors @ np.array(r)))) - target)

    def test_reconstruction_converges_pixel_center(self):
        m = mirror_model(math.log(0.999), 0.01 + 0.01j)
        up, _ = m.region_potentials()
        e = [self._partial_sum_error(m, M, (0.0, 0.0), up) for M in (2, 5, 10)]
        assert e[0] > e[1] > e[2]

    def test_reconstruction_converges_grid_corner(self):
        # partial sums oscillate pointwise; compare error envelopes
        m = mirror_model(math.log(0.999), 0.01 + 0.01j)
        _, ug = m.region_potentials()
        e = {M: self._partial_sum_error(m, M, (2.5, 2.5), ug) for M in (2, 3, 4, 5, 6, 10, 16, 17, 18, 19, 20)}
        assert e[10] < e[2]
        assert max(e[M] for M in (16, 17, 18, 19, 20)) < max(e[M] for M in (2, 3, 4, 5, 6))

    def test_parseval(self):
        m = mirror_model(math.log(0.999), 0.01 + 0.01j)
        b = build_gbasis(m.lattice, 32)
        v = np.array(list(fourier_coefficients(m, b).values()))
        up, ug = m.region_potentials()
        ff = m.lattice.fill_factor
        exact = ff * abs(up) ** 2 + (1 - ff) * abs(ug) ** 2
        assert np.sum(np.abs(v) ** 2) == pytest.approx(exact, rel=0.02)

    def test_step_fourier_origin(self, fig3):
        assert step_fourier(2.0, 1.0, fig3.lattice, 0.0, 0.0) == pytest.approx(1.5)


class TestValidity:
    def test_fig3_pass(self, fig3):
        rep = validity_check(fig3)
        assert rep.xi == pytest.approx(X.XI, rel=1e-12)
        assert rep.bound_mirror == pytest.approx(X.BOUND_MIRROR_HALF, rel=1e-12)
        assert rep.verdicts["contrast"] == "pass" and rep.ok

    def test_symmetric_in_fill_factor(self):
        a = validity_check(mirror_model(0, 0.01j, ff=0.4))
        b = validity_check(mirror_model(0, 0.01j, ff=0.6))
        assert a.bound_mirror == pytest.approx(b.bound_mirror, rel=1e-12)
        assert a.bound_index == pytest.approx(b.bound_index, rel=1e-12)

    def test_warn_not_raise(self):
        rep = validity_check(mirror_model(0, 0.2j))
        assert rep.verdicts["contrast"] == "warn" and not rep.ok

    def test_holey_fiber(self, holey):
        rep = validity_check(holey)
        assert rep.xi == pytest.approx(X.XI_HOLEY, rel=1e-12)
        assert rep.bound_index == pytest.approx(X.XI_HOLEY / 0.02, rel=1e-12)
        assert rep.contrast_kind == "index" and rep.ok

    def test_as_dict(self, fig3):
        d = validity_check(fig3).as_dict()
        assert set(d) >= {"xi", "bound_mirror", "bound_index", "verdicts"}


class TestMatrixElement:
    def test_single_plane_wave_uniform(self, basis):
        m = mirror_model(-0.003, 0.0)
        c = np.zeros(basis.count, complex)
        c[0] = 1.0
        chk = matrix_element_validity(m, c, basis)
        assert chk.element == pytest.approx(0.003, rel=1e-12)

    def test_zero_potential(self, empty, basis):
        c = np.zeros(basis.count, complex)
        c[0] = 1.0
        assert matrix_element_validity(empty, c, basis).element == 0.0

    def test_rejects_unnormalized(self, fig3, basis):
        c = np.zeros(basis.count, complex)
        c[0] = 1.1
        with pytest.raises(ValueError, match="biorthonormal"):
            matrix_element_validity(fig3, c, basis)

    def test_fig3_lowest_band_at_T(self, fig3, basis, path):
        from paraxial_bands import assemble, biorthonormalize, eigendecompose

        k = path[path.index_of("T")]
        es = biorthonormalize(eigendecompose(assemble(fig3, basis, k)))
        chk = matrix_element_validity(fig3, es.vectors[:, 0], basis)
        # the state sits on the pixel (lnR = 0 there), so the element is
        # nonzero but below the area-weighted estimate FF |delta lnR|
        assert 0 < chk.element <= 0.5 * 0.01 < 4 * math.pi * X.XI**2
        assert chk.verdict == "pass"

    def test_index_has_gradient_term(self, holey):
        b = build_gbasis(holey.lattice, 2)
        c = np.zeros(b.count, complex)
        c[0] = 1.0
        chk = matrix_element_validity(holey, c, b)
        assert chk.gradient_element is not None and chk.gradient_bound == pytest.approx(X.XI_HOLEY**2)
