"""
Configuration shared by preprocessing, querying and the index header.

:class:`GapConfig` holds the user-facing knobs. :meth:`GapConfig.resolve`
fixes everything that depends on the input length and returns a
:class:`Resolved` record, which is what the index header serializes and what
two independently built indexes must agree on.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

from . import randomness as rnd
from .layout import choose_prime
from .psl import C1_DEFAULT, C2_DEFAULT
from .strings import BYTES, UNICODE
from .tree import choose_branching, shift_universe

# Calibrated defaults (see ``gap-edit calibrate``).
C_LAMBDA = 0.25
C_H = 4.0
KAPPA = 136.0
C1 = C1_DEFAULT
C2 = C2_DEFAULT
C_R = 3
BUDGET_FACTOR = 4.0

ALPHABET_SIZES = {BYTES: 256, UNICODE: 0x110000}


@dataclass(frozen=True)
class GapConfig:
    """User-facing parameters of the gap decision.

    Parameters
    ----------
    k : int
        Closeness bound of the gap problem.
    seed : bytes, int or str
        Master seed; both sides of a two-sided setup must use the same one.
    branching : int, optional
        Override for B. The default is the depth-preserving minimum of the
        desk-scale formula.
    c_lambda : float
        ``lambda = c_lambda * ln n_padded``.
    u_min : float, optional
        Rejection threshold for the precisions, default ``n_padded ** -3``.
    c_h : float
        Sampling constant of the matching index.
    kappa : float
        Threshold ``theta = kappa * k``.
    c1, c2 : float
        Recover constants.
    reps : int, optional
        Number of repetitions, default ``c_r * ceil(log2 n_padded)``.
    budget : int, optional
        Per-repetition operation budget. ``None`` uses the analytic default,
        ``0`` disables it.
    alphabet : str
        ``"bytes"`` or ``"unicode"``; symbols are coded by value.
    pad_to : int, optional
        Length the tree is sized for instead of the input length. Separately
        preprocessed X and Y must share the tree: passing Y's ``n_padded``
        when preprocessing X reproduces Y's tree. X beyond the padded length
        is truncated and its tail charged at query time.
    """

    k: int
    seed: object = 0
    branching: int | None = None
    c_lambda: float = C_LAMBDA
    u_min: float | None = None
    c_h: float = C_H
    kappa: float = KAPPA
    c1: float = C1
    c2: float = C2
    reps: int | None = None
    c_r: int = C_R
    budget: int | None = None
    budget_factor: float = BUDGET_FACTOR
    shift_base: float = 3.0
    alphabet: str = BYTES
    pad_to: int | None = None

    def resolve(self, n: int) -> "Resolved":
        """Fix the length-dependent parameters for an input of length ``n``."""
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.alphabet not in ALPHABET_SIZES:
            raise ValueError(f"unknown alphabet {self.alphabet!r}")
        size = max(int(self.pad_to) if self.pad_to is not None else int(n), 1)
        B, depth = choose_branching(size, self.branching)
        n_padded = B ** depth
        S = shift_universe(self.k, n_padded, B, self.shift_base)
        u_min = self.u_min if self.u_min is not None else float(n_padded) ** -3.0
        reps = self.reps if self.reps is not None else self.c_r * max(1, math.ceil(math.log2(max(n_padded, 2))))
        asize = ALPHABET_SIZES[self.alphabet]
        return Resolved(
            n=int(n), n_padded=n_padded, branching=B, depth=depth, k=int(self.k),
            c_lambda=float(self.c_lambda), u_min=float(u_min), c_h=float(self.c_h),
            kappa=float(self.kappa), c1=float(self.c1), c2=float(self.c2),
            master_seed=rnd.normalize_seed(self.seed).hex(), reps=int(reps),
            budget=-1 if self.budget is None else int(self.budget),
            budget_factor=float(self.budget_factor), shift_base=float(self.shift_base),
            alphabet=self.alphabet, alphabet_size=asize,
            prime=choose_prime(n_padded, asize), shift_bound=int(S.hi))


@dataclass(frozen=True)
class Resolved:
    """Length-resolved configuration, as stored in index headers."""

    n: int
    n_padded: int
    branching: int
    depth: int
    k: int
    c_lambda: float
    u_min: float
    c_h: float
    kappa: float
    c1: float
    c2: float
    master_seed: str
    reps: int
    budget: int
    budget_factor: float
    shift_base: float
    alphabet: str
    alphabet_size: int
    prime: int
    shift_bound: int

    # fields two indexes must share to be queried together
    COMPAT = ("master_seed", "n_padded", "branching", "k", "c_lambda", "u_min", "c_h",
              "kappa", "c1", "c2", "reps", "shift_base", "alphabet", "prime")

    @property
    def threshold(self) -> float:
        return self.kappa * self.k

    @property
    def seed_bytes(self) -> bytes:
        return bytes.fromhex(self.master_seed)

    @property
    def lam(self) -> float:
        return self.c_lambda * math.log(max(self.n_padded, 4))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Resolved":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})

    def mismatch(self, other: "Resolved") -> str | None:
        """Name of the first compatibility field that differs, if any."""
        for name in self.COMPAT:
            if getattr(self, name) != getattr(other, name):
                return name
        return None

    def with_n(self, n: int) -> "Resolved":
        return replace(self, n=int(n))
