"""Joint order batching and picker routing toolkit.

Warehouse graphs, integer programming formulations with lazy connectivity
families, integral separation, exact desk-scale oracles, serpentine route
evaluation and batching heuristics.
"""

from .errors import (EncodingError, OracleSizeError, PickoptError,
                     SeparationError, UnsupportedFamilyError, ValidationError,
                     VariantMismatchError)
from .layout import (SINGLE_BLOCK, TWO_BLOCK, AuxEdge, AuxiliaryGraph,
                     PickingGraph, Subaisle, WarehouseLayout,
                     build_auxiliary_graph, build_graph, shortest_distance)
from .instance import (Instance, Order, Pick, generate_instance,
                       instance_graph, load_instance, save_instance)
from .model import (BINARY, CONTINUOUS, INTEGER, Constraint, FeasibilityReport,
                    LinearModel, Variable, VariableAssignment, check_feasible,
                    export_model, write_lp, write_model_json, write_mps)
from .formulations import (ALL_KINDS, ModelOptions, build_basic, build_model,
                           build_no_reversal, build_PA, build_PF, build_PG,
                           build_PU1, build_PU2, build_single_traversing,
                           build_strengthened_cuts, build_subaisle_cuts,
                           build_symmetry_breaking,
                           build_artificial_vertex_reversal, validate_options)
from .separation import (CutRequest, OrderComponents, cut_to_row,
                         order_components, separate_connectivity)
from .exact import (MAX_EXACT_ORDERS, MAX_ORACLE_EDGES, Solution, Walk,
                    WalkSpace, batching_to_solution, bin_pack_exact,
                    capacity_feasible_partitions, evaluate_s_shape,
                    first_fit_decreasing, load_solution, route_oracle,
                    s_shape_candidates, save_solution, solve_exact,
                    solve_no_reversal_exact, validate_solution, walk_space)
from .sshape import R_S1, R_S2, SShapeRoute
from .encoding import (encode_route_PU2, encode_walk_PF, encode_walk_PG,
                       eq75_value, orient_walk)
from .heuristics import (Batching, cw2_batching, make_oracle_estimator,
                         make_s_shape_estimator, s_shape_estimate,
                         seed_batching, validate_batching)

__version__ = "0.1.0"
