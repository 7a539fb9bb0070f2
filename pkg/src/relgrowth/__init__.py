"""Relative growth of normal subgroups with free abelian quotient in groups
given by strongly Markov automata."""

from .automaton import (
    Automaton,
    AutomatonError,
    ComponentAnalysis,
    build_cj,
    decompose,
    load_automaton,
    parse_automaton,
    validate,
)
from .counting import CountTable, EdgeWeighting, count_by_weight, edge_weighting, relative_growth
from .groups import FreeGroupSpec, build_free_group_automaton, oracle_counts

__version__ = "0.1.0"
