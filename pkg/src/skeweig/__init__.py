"""Eigensolvers for real skew-symmetric matrices and the definite
Bethe-Salpeter eigenvalue problem."""
from .bse import (
    BSEDecomposition,
    BSEHamiltonian,
    BSEValidationError,
    NotDefiniteError,
    build_M,
    cholesky,
    form_W,
    random_definite_bse,
    solve_bse,
)
from .core import (
    EPS,
    BandSkewMatrix,
    ComplexPlanes,
    DenseSkewMatrix,
    ReflectorSet,
    SkewTridiagonal,
    SkewValidationError,
    apply_reflectors,
    random_skew,
    skew_matvec,
    skew_rank2_update,
    skew_rank2k_update,
)
from .driver import (
    EigenDecomposition,
    SolverOptions,
    expand_half_spectrum,
    residual_report,
    solve_skew_eigen,
)
from .mmio import MatrixFormatError, read_matrix, read_values, write_matrix, write_values
from .tridiag import tridiagonalize, tridiagonalize_onestep, tridiagonalize_twostep
from .tridiag_eigen import SymTridiagonal, bisection_eigenvalues, dc_eigen

__all__ = [
    "apply_reflectors",
    "BandSkewMatrix",
    "bisection_eigenvalues",
    "BSEDecomposition",
    "BSEHamiltonian",
    "BSEValidationError",
    "build_M",
    "cholesky",
    "ComplexPlanes",
    "dc_eigen",
    "DenseSkewMatrix",
    "EigenDecomposition",
    "EPS",
    "expand_half_spectrum",
    "form_W",
    "MatrixFormatError",
    "NotDefiniteError",
    "random_definite_bse",
    "random_skew",
    "read_matrix",
    "read_values",
    "ReflectorSet",
    "residual_report",
    "skew_matvec",
    "skew_rank2_update",
    "skew_rank2k_update",
    "SkewTridiagonal",
    "SkewValidationError",
    "solve_bse",
    "solve_skew_eigen",
    "SolverOptions",
    "SymTridiagonal",
    "tridiagonalize",
    "tridiagonalize_onestep",
    "tridiagonalize_twostep",
    "write_matrix",
    "write_values",
]

__version__ = "0.1.0"
