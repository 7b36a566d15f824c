"""
Scikit-learn style front end.

``fit`` preprocesses the reference string Y; ``predict`` decides every query
string against it. The estimator holds only hyperparameters until fitted, so
it clones, pickles and grid-searches like any other estimator.
"""

from __future__ import annotations

import numbers
from dataclasses import replace

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import config as C
from .config import GapConfig
from .engine import CLOSE
from .index import SIDE_BOTH, SIDE_Y, gap_query, preprocess_x, preprocess_y
from .strings import coerce_text


class GapEditDistance(BaseEstimator):
    """Decide ``ED(X, Y) <= k`` versus ``ED(X, Y) >= kappa * k`` for many X.

    Parameters
    ----------
    k : int
        Closeness bound.
    kappa : float
        Threshold factor, ``theta = kappa * k``.
    seed : int, str or bytes
        Master seed of all public randomness.
    branching : int, optional
        Tree arity override.
    c_lambda : float
        Precision rate constant.
    c1, c2 : float
        Recover constants.
    reps : int, optional
        Repetitions; default ``c_r * ceil(log2 n)``.
    budget : int, optional
        Per-repetition operation budget; ``None`` uses the analytic default,
        ``0`` disables it.
    alphabet : {"bytes", "unicode"}
    two_sided : bool
        Preprocess each query string too and answer from tables only.
    pad_to : int, optional
        Tree sizing length (see :class:`GapConfig`).

    Attributes
    ----------
    index_ : YIndex
    config_ : Resolved
    n_reference_ : int
    last_stats_ : list of QueryStats
        Aggregated counters of the last ``predict`` call, one per query.
    """

    def __init__(self, k=4, kappa=C.KAPPA, seed=0, branching=None, c_lambda=C.C_LAMBDA,
                 c1=C.C1, c2=C.C2, reps=None, budget=None, alphabet="bytes",
                 two_sided=False, pad_to=None):
        self.k = k
        self.kappa = kappa
        self.seed = seed
        self.branching = branching
        self.c_lambda = c_lambda
        self.c1 = c1
        self.c2 = c2
        self.reps = reps
        self.budget = budget
        self.alphabet = alphabet
        self.two_sided = two_sided
        self.pad_to = pad_to

    # -- validation --------------------------------------------------------
    def _validate_params(self):
        if not isinstance(self.k, numbers.Integral) or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        for name in ("kappa", "c_lambda", "c1", "c2"):
            v = getattr(self, name)
            if not isinstance(v, numbers.Real) or v <= 0:
                raise ValueError(f"{name} must be a positive number, got {v!r}")
        if self.reps is not None and (not isinstance(self.reps, numbers.Integral) or self.reps < 1):
            raise ValueError(f"reps must be a positive integer, got {self.reps!r}")
        if self.alphabet not in C.ALPHABET_SIZES:
            raise ValueError(f"alphabet must be one of {sorted(C.ALPHABET_SIZES)}")

    def _gap_config(self) -> GapConfig:
        return GapConfig(k=int(self.k), seed=self.seed, branching=self.branching,
                         c_lambda=float(self.c_lambda), kappa=float(self.kappa),
                         c1=float(self.c1), c2=float(self.c2), reps=self.reps,
                         budget=self.budget, alphabet=self.alphabet, pad_to=self.pad_to)

    @staticmethod
    def _queries(X):
        if isinstance(X, (str, bytes)):
            raise TypeError("predict expects a collection of query strings, not a single string")
        return list(X)

    # -- estimator API -----------------------------------------------------
    def fit(self, Y, y=None):
        """Preprocess the reference string ``Y``; ``y`` is ignored."""
        self._validate_params()
        side = SIDE_BOTH if self.two_sided else SIDE_Y
        self.index_ = preprocess_y(Y, self._gap_config(), materialize=self.two_sided, side=side)
        self.config_ = self.index_.config
        self.n_reference_ = self.config_.n
        return self

    def query(self, x):
        """Full verdict and aggregated counters for one query string."""
        check_is_fitted(self, "index_")
        source = x
        if self.two_sided:
            text = coerce_text(x, self.alphabet)
            # lengths the rule rejects need no X index
            if abs(len(text) - self.n_reference_) <= self.config_.threshold:
                source = preprocess_x(text, replace(self._gap_config(),
                                                    pad_to=self.config_.n_padded))
        verdict, stats, _ = gap_query(source, self.index_)
        return verdict, stats

    def decision_function(self, X) -> np.ndarray:
        """Median root estimate minus the threshold; negative means CLOSE."""
        check_is_fitted(self, "index_")
        out = []
        for x in self._queries(X):
            verdict, _ = self.query(x)
            out.append(verdict.estimate - verdict.threshold)
        return np.asarray(out, dtype=np.float64)

    def predict(self, X) -> np.ndarray:
        """1 for CLOSE, 0 for FAR, one entry per query string."""
        check_is_fitted(self, "index_")
        labels, stats = [], []
        for x in self._queries(X):
            verdict, st = self.query(x)
            labels.append(1 if verdict.decision == CLOSE else 0)
            stats.append(st)
        self.last_stats_ = stats
        return np.asarray(labels, dtype=np.int64)

    def score(self, X, y) -> float:
        """Fraction of queries whose verdict matches ``y`` (1 CLOSE, 0 FAR)."""
        return float(np.mean(self.predict(X) == np.asarray(y)))
