"""Penalty-based movable-antenna position optimization.

Core pieces: exact separation-projection geometry, a field-response channel
model, the penalty alternating-optimization engine, three case studies
(capacity, edge-offloading latency, RZF precoding), baseline schemes, and a
seeded Monte-Carlo harness with a CLI.
"""

from .geometry import (CandidateSet, CandidateSetEmpty, NoFeasibleGridPoint,
                       Panel, Position2D, SeparationConstraint, TooFewPoints,
                       brute_force_projection_oracle, build_conflict_set,
                       circle_circle_intersections, conservative_capacity,
                       count_feasible_components, line_circle_intersections,
                       min_pairwise_distance, solve_separation_projection)
from .channel import (ChannelRealization, PathAngles, assemble_channel,
                      field_response_vector, sample_geometric_channel)
from .penalty import (CasePlugin, IterationTrace, NonFiniteGradient,
                      PenaltyResult, PenaltySchedule, PositionBlock, StopRule,
                      finite_difference_gradient, projected_gradient_descent,
                      run_penalty_ao)
from .capacity import (CapacityProblem, ZeroChannel, capacity_objective,
                       capacity_position_gradient, run_capacity_case,
                       water_filling)
from .mec import (MecProblem, RankDeficient, mec_position_gradient,
                  offload_decision, run_mec_case, server_frequency_allocation,
                  total_latency, user_rate, zf_combiner)
from .rzf import (RzfProblem, ZeroPrecoder, rzf_closed_form, rzf_objective,
                  rzf_position_gradient, run_rzf_case, sum_rate)
from .baselines import (PsoConfig, antenna_selection, fpa_layout,
                        pso_optimize)
from .harness import (ConfigError, RunConfig, TrialRecord, child_seed,
                      diagnose_connectivity, emit_results, run_monte_carlo,
                      run_sweep)

__version__ = "0.1.0"
