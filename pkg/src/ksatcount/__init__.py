"""Counting near-satisfying assignments of random k-SAT formulas.

The toolkit estimates the log-partition function of the Boltzmann
distribution over assignments (energy = number of violated clauses) with
a deterministic algorithm: belief propagation supplies the mean energy at
each point of an inverse-temperature grid, and summing the grid closes a
telescoping identity for log Z.  Evaluating the estimate at a
temperature tied to the violation budget counts "good" assignments.

Supporting instruments: an exact brute-force oracle for desk-scale
cross-validation, the random tree ensemble with worst-case-boundary
interval propagation (correlation decay and its thresholds), and
population dynamics for the distributional fixed point behind the limit
free energy density.
"""

from . import bp, cli, de, formula, interpolate, oracle, trees
from .bp import (
    BPParams,
    MessageSet,
    bp_step,
    clause_energy_bp,
    clause_kernel,
    marginal_bp,
    run_bp,
    total_energy_bp,
)
from .de import (
    FixedPointResult,
    clause_update,
    fixed_point,
    free_energy_density,
    free_energy_derivative_check,
    variable_update,
)
from .errors import (
    DimacsParseError,
    InstanceTooLarge,
    InvalidAssignment,
    InvalidParameters,
    KsatError,
    UndefinedConditional,
    UnsupportedFormula,
)
from .formula import (
    Clause,
    FactorGraph,
    Formula,
    Literal,
    build_factor_graph,
    diameter,
    energy,
    generate_random,
    parse_dimacs,
    write_dimacs,
)
from .interpolate import (
    InterpolationPlan,
    InterpolationResult,
    estimate_good_count,
    estimate_log_partition,
    make_plan,
)
from .oracle import (
    ExactGibbs,
    ExactSummary,
    clause_energy_exact,
    conditional_marginal_table,
    count_good,
    count_good_strict,
    enumerate_exact,
    gibbs_expectations,
    marginal_exact,
)
from .trees import (
    DecayStats,
    MessageInterval,
    TreeFormula,
    contraction_rate,
    contraction_threshold,
    decay_experiment,
    forcing_recursion,
    forcing_threshold,
    propagate_intervals,
    sample_tree,
    tree_to_formula,
)

__version__ = "0.1.0"
