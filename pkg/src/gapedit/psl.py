"""
Precision-sampling recombination and its contract harness.

``recover`` turns B per-child estimates, each allowed an additive error of
``beta * u_i`` with ``u_i ~ Exp(lambda)``, into an estimate of their sum with
additive error ``beta``::

    R = sum_i max(0, a_i - c1 beta u_i) + c2 (beta / lambda) #{i : a_i > c1 beta u_i}

The clipped sum keeps large terms, losing at most ``c1 beta u_i`` each. The
count term puts back, in expectation, the mass hidden below the per-child
noise floor: a term of size ``a`` clears the floor with probability about
``lambda a / (c1 beta)``.

The contract is only verified empirically. :func:`recover_contract_harness`
runs the adversarial families and reports per-cell violation frequencies.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

C1_DEFAULT = 2.25
C2_DEFAULT = 2.25


@dataclass(frozen=True)
class RecoverInput:
    estimates: np.ndarray
    precisions: np.ndarray
    lam: float
    beta: float

    def __post_init__(self):
        est = np.asarray(self.estimates, dtype=np.float64)
        u = np.asarray(self.precisions, dtype=np.float64)
        if est.ndim != 1 or est.size < 1 or est.shape != u.shape:
            raise ValueError("estimates and precisions must be equal-length, non-empty vectors")
        if np.any(u <= 0):
            raise ValueError("precisions must be positive")
        if self.lam <= 0 or self.beta < 0:
            raise ValueError("need lam > 0 and beta >= 0")
        object.__setattr__(self, "estimates", est)
        object.__setattr__(self, "precisions", u)


def recover(inp: RecoverInput, c1: float = C1_DEFAULT, c2: float = C2_DEFAULT) -> float:
    """Sum estimate from noisy per-child estimates."""
    thr = c1 * inp.beta * inp.precisions
    over = inp.estimates > thr
    return float(np.sum(np.where(over, inp.estimates - thr, 0.0))
                 + c2 * inp.beta / inp.lam * np.count_nonzero(over))


def recover_matrix(A: np.ndarray, u: np.ndarray, lam: float, beta: float,
                   c1: float = C1_DEFAULT, c2: float = C2_DEFAULT) -> np.ndarray:
    """Column-wise :func:`recover` for an ``(B, m)`` matrix of estimates.

    Row i of ``A`` belongs to child i with precision ``u[i]``; the result has
    one value per column (per shift).
    """
    thr = (c1 * beta) * np.asarray(u, dtype=np.float64)[:, None]
    over = A > thr
    return np.where(over, A - thr + c2 * beta / lam, 0.0).sum(axis=0)


# ---------------------------------------------------------------------------
# Contract harness
# ---------------------------------------------------------------------------

FAMILIES = ("spread", "heavy", "geometric", "midsize", "tiny")
ADVERSARIES = ("exact", "max_up", "max_down", "hide_small")


def family_vector(name: str, B: int, lam: float, beta: float, mass: float | None = None) -> np.ndarray:
    """True vector ``a`` of a harness family.

    Spread is ``a_i = 1`` and tiny is ``a_i = beta / lam``. Heavy hitter,
    geometric decay and the mid-size cluster carry the same total mass as the
    spread family (``B``) unless ``mass`` overrides it; ``mass`` also rescales
    the spread family.
    """
    total = float(B) if mass is None else float(mass)
    a = np.zeros(B)
    if name == "spread":
        a[:] = total / B
    elif name == "heavy":
        a[0] = total
    elif name == "geometric":
        w = 0.5 ** np.arange(B)
        a = total * w / w.sum()
    elif name == "midsize":
        m = min(B, math.ceil(lam / 10))
        a[:m] = total / m
    elif name == "tiny":
        a[:] = beta / lam
    else:
        raise ValueError(f"unknown family {name}")
    return a


def adversary_estimates(name: str, a: np.ndarray, u: np.ndarray, alpha: float,
                        beta: float) -> np.ndarray:
    """Estimates ``a~`` (trials x B) consistent with both contract hypotheses."""
    if name == "exact":
        return np.broadcast_to(a, u.shape).copy()
    if name == "max_up":
        return alpha * a + beta * u
    if name == "max_down":
        return np.maximum(0.0, a / alpha - beta * u)
    if name == "hide_small":
        return np.where(a <= alpha * beta * u, 0.0, a)
    raise ValueError(f"unknown adversary {name}")


def violations(est: np.ndarray, a: np.ndarray, u: np.ndarray, lam: float, beta: float,
               alpha: float, c1: float, c2: float) -> np.ndarray:
    """Per-trial flag: either contract bullet fails."""
    thr = c1 * beta * u
    over = est > thr
    R = np.where(over, est - thr + c2 * beta / lam, 0.0).sum(axis=1)
    total = a.sum()
    low = R < total / (2 * alpha) - beta - 1e-9 * max(total, 1.0)
    high = R > 2 * alpha * total + beta + 1e-9 * max(total, 1.0)
    return low | high


@dataclass
class HarnessReport:
    c1: float
    c2: float
    trials: int
    delta_target: float
    cells: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def worst(self) -> float:
        return max((c["violation_rate"] for c in self.cells), default=0.0)

    @property
    def passed(self) -> bool:
        return self.worst <= self.delta_target

    def to_json(self) -> str:
        d = asdict(self)
        d["worst"] = self.worst
        d["passed"] = self.passed
        return json.dumps(d, indent=2)


def recover_contract_harness(families=FAMILIES, adversaries=ADVERSARIES, trials: int = 10_000,
                             Bs=(8, 32, 256), lams=(8.0, 16.0), alphas=(1.0, 2.0),
                             betas=(0.0, 1.0, 10.0), c1: float = C1_DEFAULT,
                             c2: float = C2_DEFAULT, delta_target: float = 0.01,
                             seed: int = 0, mass: float | None = None) -> HarnessReport:
    """Monte-Carlo check of the Recover contract.

    Each cell is a (B, lambda, alpha, beta, family, adversary) combination run
    with ``trials`` independent draws of the precisions. ``mass`` rescales the
    families (see :func:`family_vector`); the acceptance gate uses the
    default.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    rep = HarnessReport(c1, c2, trials, delta_target)
    for B, lam, alpha, beta in itertools.product(Bs, lams, alphas, betas):
        for fam in families:
            a = family_vector(fam, B, lam, beta, mass)
            u = rng.exponential(1.0 / lam, size=(trials, B))
            for adv in adversaries:
                est = adversary_estimates(adv, a, u, alpha, beta)
                rate = float(violations(est, a, u, lam, beta, alpha, c1, c2).mean())
                rep.cells.append(dict(B=B, lam=lam, alpha=alpha, beta=beta, family=fam,
                                      adversary=adv, violation_rate=rate))
    rep.seconds = time.perf_counter() - t0
    return rep


def mass_sweep(masses_over_beta=(0.25, 1.0, 4.0, 16.0, 64.0), beta: float = 1.0, **kw) -> dict:
    """Worst violation rate per total mass (in units of beta); diagnostic only."""
    out = {}
    for f in masses_over_beta:
        r = recover_contract_harness(betas=(beta,), mass=f * beta, **kw)
        out[f] = r.worst
    return out
