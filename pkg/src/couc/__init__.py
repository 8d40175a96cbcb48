"""Cost-oriented adaptive temporal resolution for day-ahead unit commitment."""

from .errors import ConfigError, ParseError, SolverFailure, ValidationError
from .model import (
    CapCrossing,
    Fleet,
    NetLoadSeries,
    RampSpike,
    ScenarioSet,
    SynthProfile,
    UnitSpec,
    aggregate_demand,
    load_fleet,
    load_netload_csv,
    synth_netload,
    write_fleet_csv,
    write_netload_csv,
)
from .partition import (
    AdaptiveRange,
    TimePartition,
    adaptive_range,
    adjacent_ward_merge,
    apply_point_updates,
    converged,
    uniform_partition,
    ward_dissimilarity,
)
from .milp import (
    Constraint,
    CostBreakdown,
    ProblemInstance,
    Schedule,
    Variable,
    build_da_uc,
    build_da_uc_stochastic,
    build_rt_ed,
    cost_breakdown,
    da_to_rt_index_map,
    extract_da_schedule,
    extract_rt_schedule,
    interval_costs,
)
from .solver import Solution, SolveStatus, brute_force, max_violation, solve_lp, solve_milp
from .coordinator import (
    AdamHyper,
    AdamState,
    BaselineResult,
    EvalContext,
    Evaluator,
    OptimizeResult,
    PartitionEval,
    TraceEntry,
    adam_optimize,
    adam_point_gradient,
    adam_point_step,
    baseline_ch,
    baseline_na,
    baseline_ta,
    evaluate_partition,
    greedy_optimize,
    greedy_point_search,
    online_refine,
    warm_start_offline,
)

__version__ = "0.1.0"
