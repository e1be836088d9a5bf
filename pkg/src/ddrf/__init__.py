"""Density-density response functions of discretized 1D quantum models.

Builds non-interacting and exact two-fermion response functions, solves the
interacting Dyson equation in the time domain (Volterra second kind), and
locates and ranks the poles of the interacting response in the frequency
domain with three mutually checking methods (curve bisection, transition-
space eigenvalue problem, contour integration).
"""

__version__ = "0.1.0"

from . import errors
from .grid import (
    BoundaryDecayWarning,
    EigenSolution,
    Harmonic,
    OneBodyHamiltonian,
    OrbitalOccupation,
    SoftCoulombWells,
    Tabulated,
    UniformGrid,
    Well,
    assemble_hamiltonian,
    build_grid,
    diagonalize,
    ground_density,
    validate_occupation,
)
from .kernels import (
    DeltaLocal,
    KernelMatrix,
    KernelSqrt,
    SoftCoulomb,
    XcKernel,
    ZeroKernel,
    add_xc,
    alda_kernel,
    assemble_kernel_matrix,
    kernel_sqrt,
)
from .response import (
    TransitionPair,
    TransitionTable,
    build_transitions,
    chi0_freq,
    chi0_pole_table,
    chi0_time,
    transition_table_from_arrays,
)
from .dyson import (
    OperatorSeries,
    TimeGrid,
    VolterraConfig,
    chi0_series,
    dyson_residual,
    dyson_solve_march,
    dyson_solve_picard,
    fourier_transform_series,
    inverse_map,
    reduce_to_transition_space,
    write_series,
)
from .poles import (
    EigenCurveScan,
    PoleRecord,
    ScanConfig,
    ShiftReport,
    casida_matrix,
    chi_rpa_freq,
    chi_s,
    contour_locate,
    counting_bookkeeping,
    eig_curves,
    find_pole_crossings,
    forward_shift_report,
    property_checks,
    rank_at_coincident_pole,
    riesz_rank,
    rpa_pole_table,
)
from .exact import (
    DensityCoupling,
    KuboReport,
    ManyBodySpectrum,
    PerturbationSetup,
    build_mb_hamiltonian,
    density_coupling,
    exact_chi_freq,
    exact_chi_time,
    exact_pole_ranks,
    kubo_check,
    mb_spectrum,
    tdse_propagate,
    two_fermion_basis,
)
