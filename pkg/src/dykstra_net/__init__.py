"""Dykstra's algorithm for decentralized consensus optimization on graphs."""

from .apg import ApgState, init_apg, run_apg
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .dual_ascent import (AllocationState, ascend_subset, check_smooth_overlap, detect_stuck,
                          init_allocation, run_allocation)
from .dykstra import (DykstraState, begin_cycle, dual_objective, gap_certificate,
                      gap_lower_bound, init_state, primal_objective, run, solve_block,
                      transform_weighted)
from .funcs import (L1, Affine, ConvexFunction, IndicatorBall, IndicatorBox, IndicatorPoint,
                    Quadratic, Zero, parse_function)
from .graph import Graph, complete_graph, path_graph, random_connected_graph, star_graph
from .oracles import oracle_allocation, oracle_dykstra
from .schedules import Block, CycleSchedule, batch_disjoint, full_cycle, star_cycle, tree_cycle
from .trace import Trace, TraceRow, from_csv, to_csv

__all__ = [
    "ApgState", "init_apg", "run_apg",
    "ConfigError", "ExperimentConfig", "load_config", "parse_config",
    "AllocationState", "ascend_subset", "check_smooth_overlap", "detect_stuck",
    "init_allocation", "run_allocation",
    "DykstraState", "begin_cycle", "dual_objective", "gap_certificate", "gap_lower_bound",
    "init_state", "primal_objective", "run", "solve_block", "transform_weighted",
    "L1", "Affine", "ConvexFunction", "IndicatorBall", "IndicatorBox", "IndicatorPoint",
    "Quadratic", "Zero", "parse_function",
    "Graph", "complete_graph", "path_graph", "random_connected_graph", "star_graph",
    "oracle_allocation", "oracle_dykstra",
    "Block", "CycleSchedule", "batch_disjoint", "full_cycle", "star_cycle", "tree_cycle",
    "Trace", "TraceRow", "from_csv", "to_csv",
]
