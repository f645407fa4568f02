"""Strong integrators for linear Stratonovich SDEs.

Neumann and Magnus flow-map schemes of orders 1/2, 1 and 3/2, conditional
expectation quadrature of multiple Stratonovich integrals on a Wiener
lattice, shuffle-algebra reductions and a Monte Carlo error/effort harness.
"""
from .harness import ErrorReport, ExperimentSpec, run_experiment
from .integrals import (IntegralTable, beta, bridge_polynomial, conditional_expectation,
                        critical_stepsize, effort_exponent, expected_value, quadrature_rate)
from .integrators import (LinearSDESystem, Scheme, compile_scheme, integrate, integrate_rk32,
                          local_error_gap)
from .linalg import FlopTally, commutator, expm
from .shuffle import WordPoly, parts_reduce, shuffle_product, solve_shuffle_system
from .wiener import WienerGrid, coarsen, generate, generate_paths

__version__ = "0.1.0"

__all__ = [
    "ErrorReport", "ExperimentSpec", "run_experiment",
    "IntegralTable", "beta", "bridge_polynomial", "conditional_expectation",
    "critical_stepsize", "effort_exponent", "expected_value", "quadrature_rate",
    "LinearSDESystem", "Scheme", "compile_scheme", "integrate", "integrate_rk32",
    "local_error_gap", "FlopTally", "commutator", "expm", "WordPoly", "parts_reduce",
    "shuffle_product", "solve_shuffle_system", "WienerGrid", "coarsen", "generate",
    "generate_paths",
]
