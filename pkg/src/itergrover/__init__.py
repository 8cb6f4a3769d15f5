"""Simulator and analysis toolkit for nested-oracle (iterated) Grover search.

The problem: k oracles f_1..f_k over growing prefixes of a partitioned input,
each with a unique solution.  All circuits built from per-level phase oracles
and per-register diffusion stay inside a 2^k-dimensional symmetric subspace,
which this package simulates exactly with small orthogonal matrices and
verifies against a brute-force statevector simulation at small sizes.
"""

from .reduced import (
    ProblemParams,
    ReducedOperator,
    apply,
    enumerate_labels,
    grover_iteration_count,
    initial_state,
    label_from_index,
    label_index,
    local_edge_op,
    operator_power,
    reduced_grover_register,
    reduced_iam_register,
    reduced_oracle,
    weight_of_label,
)
from .graph import (
    EdgeOp,
    OperatorGraph,
    approximate_graph,
    build_pg_graph,
    build_sg_graph,
    cubic_iam_operator,
    emit_dot,
    full_cubic_operator,
    graph_from_json,
    graph_to_json,
    graph_to_operator,
)
from .closed_form import (
    PG2_FULL_TRANSFER_COEFF,
    Quaternion,
    pg2_amplitudes,
    quaternion_multiply,
    quaternion_of,
    quaternion_to_rotation,
)
from .schedules import (
    PAPER_K3_CONSTANTS,
    K3Constants,
    Phase,
    Schedule,
    Trajectory,
    k3_paper_schedule,
    mk_generalization,
    named_schedule,
    optimize_k3_constants,
    pg2_target_split,
    pg2_then_grover_schedule,
    pg_sole_schedule,
    phase_operator,
    run_schedule,
    schedule_from_json,
    schedule_to_json,
    sequential_grover_schedule,
)
from .statevector import (
    Statevector,
    apply_cnot_layer,
    apply_diffusion_register,
    apply_oracle_full,
    apply_pg2_parallel_circuit,
    apply_pg2_sequential_circuit,
    apply_stage_full,
    init_uniform,
    project_to_reduced,
)
from .analysis import (
    LowerBoundModel,
    SweepResult,
    fit_loglog_slope,
    lower_bound_constant,
    perturbation_power_check,
    ptilde_crossing_time,
    sole_pg_failure_sweep,
    speedup_table,
)

__version__ = "0.1.0"
