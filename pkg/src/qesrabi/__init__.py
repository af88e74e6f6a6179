"""Quasi-exactly solvable structure of the two-photon Rabi Hamiltonian.

Kummer-function bases, finite-dimensional sl(2)-type representations, the
determinant condition for QES couplings, a number-basis diagonalization
oracle and explicit coordinate-space eigenfunctions.
"""

from .algebra import (
    Family,
    Generators,
    OperatorMatrix,
    SubspaceSpec,
    build_generators,
    check_quadratic_relations,
    commutator_s,
    differential_action_error,
    parameter_map_r2_to_r3,
)
from .fock import FockTruncation, SpectrumResult, SupercriticalCouplingError, spectrum
from .reduction import (
    QesBranch,
    QesSolution,
    TprhParams,
    branch_parameters,
    build_l1_matrix,
    closed_form_g,
    determinant_roots,
)
from .special_functions import BasisFunction, KummerError, KummerFunction, eval_kummer
from .wavefunctions import WaveFunction, assemble_phi1, reference_case, residual

__version__ = "0.1.0"

__all__ = [
    "BasisFunction",
    "Family",
    "FockTruncation",
    "Generators",
    "KummerError",
    "KummerFunction",
    "OperatorMatrix",
    "QesBranch",
    "QesSolution",
    "SpectrumResult",
    "SubspaceSpec",
    "SupercriticalCouplingError",
    "TprhParams",
    "WaveFunction",
    "assemble_phi1",
    "branch_parameters",
    "build_generators",
    "build_l1_matrix",
    "check_quadratic_relations",
    "closed_form_g",
    "commutator_s",
    "determinant_roots",
    "differential_action_error",
    "eval_kummer",
    "parameter_map_r2_to_r3",
    "reference_case",
    "residual",
    "spectrum",
    "__version__",
]
