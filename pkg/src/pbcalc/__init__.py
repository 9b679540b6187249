"""Approximation calculus for positive bounded and infinitary formulas over finite normed structures."""
from .approx import approximate, weak_negation
from .evaluator import FiniteNormedStructure, eval_ap_prefix, eval_la_prefix, evaluate
from .grammar import parse_formula, print_formula
from .la import branch_approx, decode_almost, search_uniform_index

__all__ = [
    "FiniteNormedStructure", "approximate", "branch_approx", "decode_almost", "eval_ap_prefix",
    "eval_la_prefix", "evaluate", "parse_formula", "print_formula", "search_uniform_index",
    "weak_negation",
]
