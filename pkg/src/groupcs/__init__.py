"""Group-sparse signal recovery from linear measurements.

Exact model projection (treewidth dynamic programming, Benders-style
cutting planes), greedy head / LP-rounding tail approximations, and the
Model-IHT, MEIHT, AM-IHT and AM-EIHT recovery loops, plus a benchmark
harness for measurement sweeps.
"""

from .model import (
    GroupModel,
    InstanceFormatError,
    InstanceTooLargeError,
    ProjectionResult,
    WeightVector,
    apply_support,
    brute_force_projection,
    frequency,
    load_instance,
    parse_instance,
    save_instance,
    weights_from_signal,
)
from .graphs import (
    IncidenceGraph,
    IntersectionGraph,
    NiceTreeDecomposition,
    TreeDecomposition,
    build_graphs,
    compute_decomposition,
    lift_intersection_to_incidence,
    load_decomposition,
    save_decomposition,
    to_nice,
    validate_decomposition,
)
from .project_dp import WidthGuardError, dp_project, projection_decomposition
from .project_benders import DualVertex, OptimalityCut, benders_project, master_solve, subproblem_closed_form
from .approx import HeadResult, LPSolution, TailResult, head_greedy, lp_solve, tail_lp_round
from .sensing import (
    ExpanderMatrix,
    apply_adjoint,
    apply_matrix,
    gen_expander,
    gen_gaussian,
    load_matrix,
    median_op,
    save_matrix,
    trial_rng,
)
from .recovery import RecoveryConfig, RecoveryResult, check_amiht_condition, recover, relative_error
from .bench import BlockModelSpec, SweepReport, expander_degree, gen_block_model, gen_instance, sweep

__version__ = "0.1.0"
