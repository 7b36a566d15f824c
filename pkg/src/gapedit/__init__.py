"""
Gap edit distance with precision-sampled recursion trees.

Decides whether ``ED(X, Y) <= k`` or ``ED(X, Y) >= kappa * k`` after
preprocessing Y (one-sided) or both strings (two-sided), reading few
characters of X at query time.
"""

from .config import GapConfig, Resolved
from .engine import CLOSE, FAR, GapVerdict, QueryStats, baseline_eq1, baseline_recursive
from .estimator import GapEditDistance
from .index import (IncompatibleIndex, XIndex, YIndex, gap_query, preprocess_x,
                    preprocess_y)
from .strings import (Text, edit_distance, edit_distance_banded, edit_distance_fast,
                      hamming, optimal_alignment)

exact_ed = edit_distance_fast

__all__ = [
    "CLOSE", "FAR", "GapConfig", "GapEditDistance", "GapVerdict", "IncompatibleIndex",
    "QueryStats", "Resolved", "Text", "XIndex", "YIndex", "baseline_eq1", "baseline_recursive",
    "edit_distance", "edit_distance_banded", "edit_distance_fast", "exact_ed", "gap_query",
    "hamming", "optimal_alignment", "preprocess_x", "preprocess_y",
]
__version__ = "0.1.0"
