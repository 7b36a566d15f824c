"""
Instance generators with oracle-verified labels.

Every generator is a pure function of its :class:`InstanceSpec`. Manifests
record the exact edit distance (bit-parallel oracle) whenever ``n`` is at or
below :data:`ORACLE_CAP`, so tests never assert against unverified labels.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .strings import edit_distance_fast
from .tree import choose_branching

ORACLE_CAP = 1 << 17
KINDS = ("random", "planted", "periodic", "adversarial-boundary")


@dataclass(frozen=True)
class InstanceSpec:
    """Parameters of one generated pair.

    Parameters
    ----------
    kind : {"random", "planted", "periodic", "adversarial-boundary"}
    n : int
        Length of Y.
    sigma : int
        Alphabet size; symbols are ``0 .. sigma-1``.
    seed : int
    d : int
        Number of character edits applied to Y to obtain X (all kinds but
        ``random``).
    period : int
        Period of Y for ``periodic``.
    block : int, optional
        Block length whose boundaries ``adversarial-boundary`` edits straddle;
        defaults to the leaf-parent span of the default tree.
    """

    kind: str
    n: int
    sigma: int = 4
    seed: int = 0
    d: int = 0
    period: int = 7
    block: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown instance kind {self.kind!r}")
        if self.n < 1 or self.sigma < 2 or self.d < 0 or self.period < 1:
            raise ValueError("need n >= 1, sigma >= 2, d >= 0, period >= 1")


@dataclass
class Instance:
    spec: InstanceSpec
    x: np.ndarray
    y: np.ndarray
    ed: int | None = None
    edits: list = field(default_factory=list)

    def manifest(self) -> dict:
        return dict(spec=asdict(self.spec), len_x=int(self.x.size), len_y=int(self.y.size),
                    ed=self.ed, ed_verified=self.ed is not None, edits=self.edits)


def _apply_edits(y: np.ndarray, d: int, sigma: int, rng, positions=None):
    """Apply exactly ``d`` character edits; substitutions always change the symbol."""
    x = list(int(c) for c in y)
    log = []
    for e in range(d):
        op = ("sub", "ins", "del")[int(rng.integers(3))]
        if not x:
            op = "ins"
        if positions is not None:
            i = int(positions[e % len(positions)])
        else:
            i = int(rng.integers(len(x) + (op == "ins")))
        i = min(i, len(x) if op == "ins" else len(x) - 1)
        if op == "sub":
            c = int(rng.integers(sigma - 1))
            x[i] = c + (c >= x[i])
        elif op == "ins":
            x.insert(i, int(rng.integers(sigma)))
        else:
            del x[i]
        log.append([op, i])
    return np.asarray(x, dtype=np.int64), log


def generate(spec: InstanceSpec, verify: bool = True) -> Instance:
    """Build the pair described by ``spec``."""
    rng = np.random.default_rng([spec.seed, KINDS.index(spec.kind), spec.n, spec.d])
    if spec.kind == "random":
        y = rng.integers(0, spec.sigma, spec.n)
        x = rng.integers(0, spec.sigma, spec.n)
        edits = []
    else:
        if spec.kind == "periodic":
            pattern = rng.integers(0, spec.sigma, spec.period)
            y = np.resize(pattern, spec.n)
        else:
            y = rng.integers(0, spec.sigma, spec.n)
        positions = None
        if spec.kind == "adversarial-boundary":
            block = spec.block or _default_block(spec.n)
            bounds = np.arange(block, spec.n, block)
            if bounds.size:
                positions = rng.permutation(bounds) - rng.integers(0, 2, bounds.size)
        x, edits = _apply_edits(y, spec.d, spec.sigma, rng, positions)
    ed = None
    if verify and max(x.size, y.size) <= ORACLE_CAP:
        ed = edit_distance_fast(x, y)
    return Instance(spec, np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int64), ed, edits)


def _default_block(n: int) -> int:
    B, depth = choose_branching(n)
    return B ** max(depth - 1, 0)


def far_instance(n: int, min_ed: int, sigma: int = 256, seed: int = 0,
                 attempts: int = 20) -> Instance | None:
    """Random pair over ``sigma`` symbols with verified ``ED >= min_ed``.

    Returns ``None`` when no attempt reaches ``min_ed`` (in particular
    whenever ``min_ed > n``, which no pair of length-``n`` strings can).
    """
    if min_ed > n:
        return None
    for a in range(attempts):
        inst = generate(InstanceSpec("random", n, sigma, seed=seed * 1000 + a))
        if inst.ed is None:
            inst.ed = edit_distance_fast(inst.x, inst.y)
        if inst.ed >= min_ed:
            return inst
    return None


def _write_atomic(path: str, data: bytes):
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, path)


def save_instance(inst: Instance, out_dir: str, prefix: str = "") -> dict:
    """Write ``X``, ``Y`` (one byte per symbol) and ``manifest.json``."""
    if inst.spec.sigma > 256:
        raise ValueError("file output supports sigma <= 256")
    os.makedirs(out_dir, exist_ok=True)
    names = dict(x=f"{prefix}X.bin", y=f"{prefix}Y.bin")
    _write_atomic(os.path.join(out_dir, names["x"]), inst.x.astype(np.uint8).tobytes())
    _write_atomic(os.path.join(out_dir, names["y"]), inst.y.astype(np.uint8).tobytes())
    man = inst.manifest()
    man["files"] = names
    _write_atomic(os.path.join(out_dir, f"{prefix}manifest.json"),
                  json.dumps(man, indent=2).encode())
    return man
