"""Optimal decision trees over proper splitting rules."""

__version__ = "0.1.0"

from .core import (OBJECTIVES, SQUARED, ZERO_ONE, Dataset, Leaf, Node, Objective, evaluate,
                   leaf_label, load_dataset)
from .rules import (AncestryMatrix, Rule, ancestry_matrix, gen_splits_axis, gen_splits_mixed,
                    gen_splits_surface, make_rulegen, splits)
from .solvers import SearchConfig, SolveResult, odt_depth, odt_size, sodt_rec

__all__ = [
    "OBJECTIVES", "SQUARED", "ZERO_ONE", "Dataset", "Leaf", "Node", "Objective", "evaluate",
    "leaf_label", "load_dataset", "AncestryMatrix", "Rule", "ancestry_matrix", "gen_splits_axis",
    "gen_splits_mixed", "gen_splits_surface", "make_rulegen", "splits", "SearchConfig",
    "SolveResult", "odt_depth", "odt_size", "sodt_rec",
]
