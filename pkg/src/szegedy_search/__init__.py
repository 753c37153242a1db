"""Szegedy quantum walks with marked-vertex queries: simulation and closed-form checks."""

from .analytic import (
    pm_closed_form,
    project_to_invariant_basis,
    reduced_eigensystem,
    reduced_operator,
    t_f,
    t_max,
)
from .graphs import (
    Graph,
    MarkedSet,
    SrgParams,
    TransitionMatrix,
    absorbing_transition,
    complete_graph,
    graph_from_edge_list,
    named_srg,
    parse_graph_spec,
    srg_parameters,
    torus_lattice,
    transition_matrix,
)
from .operators import OperatorId, WalkContext, dense_operator, evolve, iterate, step
from .srg import build_srg_states, srg_decompose, verify_reflection_relations, verify_u3_equivalence
from .state import EdgeState, ProbabilitySeries, initial_state, inner_product, marked_probability

__all__ = [
    "pm_closed_form",
    "project_to_invariant_basis",
    "reduced_eigensystem",
    "reduced_operator",
    "t_f",
    "t_max",
    "Graph",
    "MarkedSet",
    "SrgParams",
    "TransitionMatrix",
    "absorbing_transition",
    "complete_graph",
    "graph_from_edge_list",
    "named_srg",
    "parse_graph_spec",
    "srg_parameters",
    "torus_lattice",
    "transition_matrix",
    "OperatorId",
    "WalkContext",
    "dense_operator",
    "evolve",
    "iterate",
    "step",
    "build_srg_states",
    "srg_decompose",
    "verify_reflection_relations",
    "verify_u3_equivalence",
    "EdgeState",
    "ProbabilitySeries",
    "initial_state",
    "inner_product",
    "marked_probability",
]

__version__ = "0.1.0"
