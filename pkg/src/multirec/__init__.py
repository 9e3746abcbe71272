"""Discrete multitime multiple linear recurrences and their Floquet theory."""

from .engine import (CoefficientSystem, CompatibilityReport, Violation, c_product,
                     check_compatibility, solve, synthesize_compatible, trajectory,
                     transition, transition_table)
from .errors import (DomainError, FloquetVerificationError, IncompatibleSystemError,
                     MultirecError, NonCommutingError, PreconditionError,
                     RootExtractionUnsupported, SchemaError, SingularMatrixError)
from .floquet import (FloquetDecomposition, MonodromySet, commuting_roots,
                      decompose_multi, decompose_periodic, floquet_multipliers, lift,
                      monodromy_multi, monodromy_periodic, reduce, reduced_solution,
                      root_2x2_jordan)
from .hicks import (HicksConstantParams, HicksPeriodicParams, HicksState,
                    hicks_A, hicks_Cp, hicks_matrix_constant, hicks_monodromy,
                    hicks_multipliers, hicks_solve, hicks_solve_constant, hicks_system,
                    power_closed_form)
from .lattice import PeriodVector, leq, total, unit

__version__ = "0.1.0"
