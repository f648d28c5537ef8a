"""Two-electron full configuration interaction on a finite-difference grid."""

from .basis import SingleParticleBasis, SolverError, discretize_h1, solve_basis
from .grid import (GAAS, Material, PotentialGrid, axes_for_box, from_electrostatic,
                   gaussian_well, gaussian_well_for, harmonic_well, polynomial_well)
from .integrals import (CapacityError, IntegralTables, default_regularization,
                        integral_tables, one_electron_integrals, symmetry_defect,
                        two_electron_integrals)
from .problem import (FciProblem, FitError, SplittingRow, SplittingTable, confinement_energy,
                      is_strongly_correlated, splitting_vs_lambda, summary, wigner_parameter,
                      write_summary)
from .solver import (DOUBLE, GROUND, SINGLE, DeterminantBasis, FciMatrix, FciResult,
                     FciSolverError, assemble_fci, build_determinant_basis, diagonalize_fci,
                     expected_counts, group_levels)

__all__ = [n for n in dir() if not n.startswith("_")]
