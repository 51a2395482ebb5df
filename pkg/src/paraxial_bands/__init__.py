"""Non-Hermitian plane-wave band solver for paraxial 2D photonic lattices.

Energies are in eV, lengths in micrometers.  Typical use::

    from paraxial_bands import load_preset, build_gbasis, standard_kpath, sweep_path, gap_report

    cfg = load_preset("fig3")
    lat = cfg.model.lattice
    bs = sweep_path(cfg.model, build_gbasis(lat, 2), standard_kpath(lat, 20))
    print(gap_report(bs, cfg.model).energy_gap_width)
"""
__version__ = "0.1.0"

from ._kernels import KERNEL
from .bands import (
    BandStructure,
    FillFactorScan,
    GapReport,
    HeteroMaterial,
    fillfactor_scan,
    gap_report,
    hetero_match,
    sweep_path,
    track_bands,
)
from .config import ConfigError, RunConfig, load_config, load_preset, parse_config, preset_names
from .eigensolver import (
    EigenPair,
    EigenSet,
    EigensolverError,
    ResidualReport,
    biorthonormalize,
    degenerate_clusters,
    eigendecompose,
    verify_residuals,
)
from .fields import (
    FieldState,
    LongitudinalModulation,
    ParaxialityError,
    SpinorPlaneWaveSet,
    directed_flux_factor,
    gauge_forward,
    gauge_inverse,
    gauge_powers,
    longitudinal_modulation,
    orthogonality_check,
    poynting_z,
)
from .hamiltonian import HamiltonianMatrix, assemble, empty_lattice_bands, kinetic_energies, potential_matrix
from .lattice import (
    HBAR_C,
    CavitySpec,
    IndexPattern,
    MirrorPattern,
    PotentialModel,
    SquareLattice,
    ValidityReport,
    evaluate_potential,
    fourier_coefficients,
    fourier_quadrature_oracle,
    matrix_element_validity,
    validity_check,
)
from .reciprocal import GBasis, KPath, KPoint, build_gbasis, standard_kpath
