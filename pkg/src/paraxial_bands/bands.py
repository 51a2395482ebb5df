"""Band sweeps along k-paths, band tracking, gap analysis and fill-factor scans."""
from __future__ import annotations

import cmath
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .eigensolver import EigenPair, EigenSet, EigensolverError, biorthonormalize, eigendecompose
from .hamiltonian import assemble, potential_matrix
from .lattice import HBAR_C, PotentialModel, validity_check
from .reciprocal import GBasis, KPath

log = logging.getLogger(__name__)

__all__ = [
    "BandStructure",
    "GapReport",
    "FillFactorScan",
    "HeteroMaterial",
    "sweep_path",
    "track_bands",
    "gap_report",
    "fillfactor_scan",
    "hetero_match",
    "POLARIZATION_DEGENERACY",
]

POLARIZATION_DEGENERACY = 2
TRACKING_MIN_OVERLAP = 0.5


@dataclass(frozen=True, eq=False)
class BandStructure:
    """Kept bands along a path.  Arrays are indexed [k_index, band]."""

    path: KPath
    energies: np.ndarray  # complex eV
    vectors: np.ndarray  # [k, G, band]
    residuals: np.ndarray
    tracking_overlaps: np.ndarray
    tracking_flags: np.ndarray  # bool per k (step into k)
    n_bands_kept: int
    eigensets: tuple = ()
    degeneracy: int = POLARIZATION_DEGENERACY

    @property
    def broadening(self) -> np.ndarray:
        return np.abs(self.energies.imag)

    @property
    def rank_order(self) -> np.ndarray:
        """[k, r] -> tracked band holding the r-th lowest Re E at k."""
        return np.argsort(self.energies.real, axis=1, kind="stable")

    @property
    def ranked_energies(self) -> np.ndarray:
        """Energies sorted by Re at each k (band r = r-th level), ignoring tracking."""
        return np.take_along_axis(self.energies, self.rank_order, axis=1)

    @property
    def tracking_ok(self) -> bool:
        return not bool(self.tracking_flags.any())

    def band(self, k_index: int, band: int) -> EigenPair:
        v = self.vectors[k_index, :, band]
        return EigenPair(
            complex(self.energies[k_index, band]),
            v,
            complex(v @ v),
            float(self.residuals[k_index, band]),
            self.path[k_index],
            band,
        )

    @property
    def bands(self):
        """Mapping-like access: bs.bands[k, q] -> EigenPair."""
        return _BandView(self)

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max())

    @property
    def max_cross_product(self) -> float:
        return max((es.max_cross_product or 0.0) for es in self.eigensets) if self.eigensets else 0.0


class _BandView:
    def __init__(self, bs):
        self._bs = bs

    def __getitem__(self, key):
        k, q = key
        return self._bs.band(k, q)


def _solve_one(model, basis, V, k, backend):
    H = assemble(model, basis, k, potential=V)
    return biorthonormalize(eigendecompose(H, backend=backend))


def _resolve_threads(threads):
    if threads is None:
        env = os.environ.get("PARAXIAL_BANDS_THREADS")
        threads = int(env) if env else 1
    return max(1, int(threads))


def _clusters(values, tol):
    """Label array grouping consecutive (Re-sorted) values closer than tol."""
    lab = np.zeros(len(values), dtype=int)
    for i in range(1, len(values)):
        lab[i] = lab[i - 1] + (abs(values[i] - values[i - 1]) > tol)
    return lab


def _subspace_overlaps(O, lab_prev, lab_new):
    """Overlap magnitudes with degenerate clusters treated as subspaces.

    Inside a degenerate cluster the individual eigenvectors are an arbitrary
    basis, so the overlap of a band with a cluster member is replaced by the
    Frobenius norm of the whole cluster block, scaled to 1 for identical
    subspaces.
    """
    P = np.zeros_like(O)
    A = O**2
    for a in np.unique(lab_prev):
        rows = lab_prev == a
        for b in np.unique(lab_new):
            cols = lab_new == b
            blk = A[np.ix_(rows, cols)].sum()
            P[np.ix_(rows, cols)] = np.sqrt(blk / min(rows.sum(), cols.sum()))
    return P


def track_bands(
    vectors_per_k: list[np.ndarray],
    values_per_k: list[np.ndarray] | None = None,
    n_keep: int | None = None,
    degeneracy_tol: float = 1e-9,
):
    """Connect the lowest ``n_keep`` bands between consecutive k-points.

    ``vectors_per_k[i]`` holds eigenvectors (columns, sorted by Re E) at path
    point i.  Returns (perms, overlaps, flags): ``perms[i][q]`` is the column
    at point i that continues band q; the first point keeps energy order.
    Assignment is greedy on |sum_G C_q(k) C_q'(k+dk)| with a one-to-one
    constraint.  A band whose best continuation lies above the kept window
    takes the lowest free kept column and is not flagged; a flag is raised
    only for a weak match inside the window.  When ``values_per_k`` is
    given, eigenvalues within ``degeneracy_tol`` (relative) are matched as
    subspaces.
    """
    ncol = vectors_per_k[0].shape[1]
    nb = ncol if n_keep is None else min(n_keep, ncol)
    perms = [np.arange(nb)]
    overlaps = [np.ones(nb)]
    flags = [False]
    labs = None
    if values_per_k is not None:
        labs = []
        for w in values_per_k:
            tol = degeneracy_tol * max(1.0, float(np.abs(w).max()))
            labs.append(_clusters(np.asarray(w), tol))
    for i in range(1, len(vectors_per_k)):
        prev = vectors_per_k[i - 1][:, perms[-1]]
        O = np.abs(prev.T @ vectors_per_k[i])  # [band, column]
        if labs is not None:
            O = _subspace_overlaps(O, labs[i - 1][perms[-1]], labs[i])
        perm = np.full(nb, -1)
        work = O.copy()
        for _ in range(nb):
            # argmax returns the first maximum: ties go to the lowest band and column
            q, c = np.unravel_index(np.argmax(work), work.shape)
            perm[q] = c
            work[q, :] = -1.0
            work[:, c] = -1.0
        exited = perm >= nb
        free = sorted(set(range(nb)) - set(perm[~exited].tolist()))
        perm[exited] = free
        ov = O[np.arange(nb), perm]
        perms.append(perm)
        overlaps.append(ov)
        flags.append(bool((ov[~exited] < TRACKING_MIN_OVERLAP).any()))
    return perms, np.array(overlaps), np.array(flags)


def sweep_path(
    model: PotentialModel,
    basis: GBasis,
    path: KPath,
    n_bands_kept: int = 8,
    threads: int | None = None,
    backend: str = "qr",
    keep_eigensets: bool = True,
) -> BandStructure:
    """Solve at every path point and connect the lowest ``n_bands_kept`` bands."""
    rep = validity_check(model)
    if not rep.ok:
        log.warning("paraxial validity: contrast %.3g exceeds bound (xi = %.3g)", rep.contrast, rep.xi)
    n_bands_kept = min(n_bands_kept, basis.count)
    V = potential_matrix(model, basis)
    threads = _resolve_threads(threads)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            sets = list(pool.map(lambda k: _solve_one(model, basis, V, k, backend), path.points))
    else:
        sets = [_solve_one(model, basis, V, k, backend) for k in path.points]
    for es in sets:
        if es.defect_flags:
            log.warning("quasi-defective eigenvectors %s at %s", es.defect_flags, es.k)
    perms, overlaps, flags = track_bands([es.vectors for es in sets], [es.values for es in sets], n_bands_kept)
    energies = np.array([es.values[p] for es, p in zip(sets, perms)])
    vectors = np.array([es.vectors[:, p] for es, p in zip(sets, perms)])
    residuals = np.array([es.residuals[p] for es, p in zip(sets, perms)])
    if flags.any():
        log.warning("band tracking overlap below %.2f at %d path steps", TRACKING_MIN_OVERLAP, int(flags.sum()))
    return BandStructure(
        path,
        energies,
        vectors,
        residuals,
        overlaps,
        flags,
        n_bands_kept,
        tuple(sets) if keep_eigensets else (),
    )


@dataclass(frozen=True)
class GapReport:
    energy_gap: tuple | None  # (lower, upper) eV
    energy_gap_lower_state: tuple | None  # (k_index, label, band) at the lower edge
    energy_gap_upper_state: tuple | None
    loss_band_edge: float
    loss_band_edge_state: tuple  # (k_index, label, band)
    baseline_loss: float
    loss_gap: tuple | None
    tracking_ok: bool = True

    @property
    def energy_gap_width(self) -> float:
        return 0.0 if self.energy_gap is None else self.energy_gap[1] - self.energy_gap[0]

    def as_dict(self) -> dict:
        return {
            "energy_gap_eV": list(self.energy_gap) if self.energy_gap else None,
            "energy_gap_width_eV": self.energy_gap_width,
            "energy_gap_lower_state": list(self.energy_gap_lower_state) if self.energy_gap_lower_state else None,
            "energy_gap_upper_state": list(self.energy_gap_upper_state) if self.energy_gap_upper_state else None,
            "loss_band_edge_eV": self.loss_band_edge,
            "loss_band_edge_state": list(self.loss_band_edge_state),
            "baseline_loss_eV": self.baseline_loss,
            "loss_gap_eV": list(self.loss_gap) if self.loss_gap else None,
            "tracking_ok": self.tracking_ok,
        }


def gap_report(bs: BandStructure, model: PotentialModel) -> GapReport:
    """Energy gap between bands 1 and 2 and the gap in the loss domain.

    Bands here are energy levels ranked by Re E at each k, so the gap is a
    property of the spectrum and does not depend on how crossings were
    tracked.  Band numbers in the report are 1-based.
    """
    if not bs.tracking_ok:
        log.warning("gap report on a band structure with tracking flags; band identities may be ambiguous")
    ranked = bs.ranked_energies
    re = ranked.real
    i1 = int(np.argmax(re[:, 0]))
    top1 = float(re[i1, 0])
    gap = lower = upper = None
    if bs.n_bands_kept > 1:
        i2 = int(np.argmin(re[:, 1]))
        bot2 = float(re[i2, 1])
        if bot2 > top1:
            gap = (top1, bot2)
            lower = (i1, bs.path[i1].label, 1)
            upper = (i2, bs.path[i2].label, 2)
    B = np.abs(ranked.imag)
    kb, rb = np.unravel_index(int(np.argmin(B)), B.shape)
    edge = float(B[kb, rb])
    b0 = model.baseline_loss()
    loss_gap = (b0, edge) if edge > b0 else None
    return GapReport(gap, lower, upper, edge, (int(kb), bs.path[kb].label, int(rb) + 1), b0, loss_gap, bs.tracking_ok)


@dataclass(frozen=True, eq=False)
class FillFactorScan:
    ff_values: np.ndarray
    E_T5: np.ndarray
    E_Z2: np.ndarray
    B_T5: np.ndarray
    B0: np.ndarray
    double_gap_open: np.ndarray

    @property
    def loss_gap_open(self) -> np.ndarray:
        return self.B_T5 > self.B0

    def open_windows(self) -> list[tuple[float, float]]:
        """Maximal runs of consecutive grid points with the double gap open."""
        out = []
        start = None
        for i, flag in enumerate(self.double_gap_open):
            if flag and start is None:
                start = i
            if not flag and start is not None:
                out.append((float(self.ff_values[start]), float(self.ff_values[i - 1])))
                start = None
        if start is not None:
            out.append((float(self.ff_values[start]), float(self.ff_values[-1])))
        return out

    def window(self) -> tuple[float, float] | None:
        w = self.open_windows()
        if not w:
            return None
        return w[0][0], w[-1][1]

    @property
    def contiguous(self) -> bool:
        return len(self.open_windows()) <= 1

    def rows(self):
        for i in range(len(self.ff_values)):
            yield (
                float(self.ff_values[i]),
                float(self.E_T5[i]),
                float(self.E_Z2[i]),
                float(self.B_T5[i]),
                float(self.B0[i]),
                bool(self.double_gap_open[i]),
            )


def fillfactor_scan(
    model_template: PotentialModel,
    ff_grid,
    basis: GBasis,
    path: KPath,
    n_bands_kept: int = 8,
    threads: int | None = None,
    backend: str = "qr",
) -> FillFactorScan:
    """Sweep ``path`` at every fill factor and extract the T5 / Z2 band edges.

    T5 is the lowest-loss kept state at the T point, Z2 the second level
    (by Re E) at the Z point.  The double gap is open when E(Z2) > E(T5) and B(T5) > B0.
    """
    ff_grid = np.asarray(ff_grid, dtype=float)
    if np.any((ff_grid <= 0) | (ff_grid >= 1)):
        raise ValueError("fill factors must lie in (0, 1)")
    iT = path.index_of("T")
    iZ = path.index_of("Z")
    et5, ez2, bt5, b0 = [], [], [], []
    for ff in ff_grid:
        model = model_template.with_fill_factor(float(ff))
        try:
            bs = sweep_path(model, basis, path, n_bands_kept, threads, backend, keep_eigensets=False)
        except EigensolverError as exc:
            raise EigensolverError(f"FF={ff:.4f}: {exc}") from exc
        at_t = bs.energies[iT]
        q5 = int(np.argmin(np.abs(at_t.imag)))
        et5.append(at_t[q5].real)
        bt5.append(abs(at_t[q5].imag))
        ez2.append(bs.ranked_energies[iZ, 1].real)
        b0.append(model.baseline_loss())
    et5, ez2, bt5, b0 = map(np.array, (et5, ez2, bt5, b0))
    return FillFactorScan(ff_grid, et5, ez2, bt5, b0, (ez2 > et5) & (bt5 > b0))


@dataclass(frozen=True)
class HeteroMaterial:
    band_edge: complex  # eV
    effective_mass_energy: complex  # m c^2, eV

    def __post_init__(self):
        if abs(self.effective_mass_energy) == 0:
            raise ValueError("effective mass energy must be nonzero")


def hetero_match(A: HeteroMaterial, B: HeteroMaterial, kA: complex) -> complex:
    """Transverse wavenumber in B matching (E, k) of material A at an interface.

    Solves E_A + (hbar c kA)^2 / (2 mA c^2) = E_B + (hbar c kB)^2 / (2 mB c^2)
    for kB, taking the root with Im(kB) >= 0 (and Re(kB) >= 0 when real).
    """
    rhs = (A.band_edge - B.band_edge) + (HBAR_C * kA) ** 2 / (2.0 * A.effective_mass_energy)
    kB = cmath.sqrt(rhs * 2.0 * B.effective_mass_energy) / HBAR_C
    if kB.imag < 0 or (kB.imag == 0 and kB.real < 0):
        kB = -kB
    return kB
