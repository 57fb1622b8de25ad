"""Chain-permutations of the positive integers in the divisor graph.

Builds, streams and checks a bijection f of the positive integers in which
consecutive values divide one another and f(n) = O(n (log n)^2).
"""

from .arith import big_f, dense_squarefree_set, divisors, is_squarefree, is_y_dense, p_minus, p_plus
from .chain import FiniteChain, concat, lcm_pair, make_d, validate
from .gamma import GammaChain, GammaStore, build_gamma, gamma_contains
from .permutation import FStream, Schedule, generate, position_of, resolve_schedule, segment_for

__all__ = [
    "FStream",
    "FiniteChain",
    "GammaChain",
    "GammaStore",
    "Schedule",
    "big_f",
    "build_gamma",
    "concat",
    "dense_squarefree_set",
    "divisors",
    "gamma_contains",
    "generate",
    "is_squarefree",
    "is_y_dense",
    "lcm_pair",
    "make_d",
    "p_minus",
    "p_plus",
    "position_of",
    "resolve_schedule",
    "segment_for",
    "validate",
]

__version__ = "0.1.0"
