"""
Public randomness derived from a master seed.

Every random choice of the data structures is a pure function of
``(master_seed, repetition, node_id, purpose_tag, counter)``, so two processes
that preprocess X and Y separately agree on trees, samples and hash
coefficients without communicating.

The keyed function is SipHash-2-4. The 128-bit key of a repetition is the
BLAKE2b-128 digest of ``master_seed || repetition`` (little-endian u64), and
the message is the three little-endian words ``(node_id, purpose_tag,
counter)``.
"""

from __future__ import annotations

import hashlib
import secrets
import struct

import numpy as np

from . import _kernels

# purpose tags
PRECISION = 1
SAMPLE = 2
COEF = 3

_MASK = (1 << 64) - 1
_TWO_M53 = 2.0 ** -53


def new_seed() -> bytes:
    """Fresh 256-bit master seed."""
    return secrets.token_bytes(32)


def normalize_seed(seed) -> bytes:
    """Accept bytes, a hex string, or an int and return 32 bytes.

    Integers and short inputs are stretched with BLAKE2b so every accepted
    value maps to a full-width seed deterministically.
    """
    if isinstance(seed, (bytes, bytearray)):
        raw = bytes(seed)
        if len(raw) == 32:
            return raw
        return hashlib.blake2b(raw, digest_size=32).digest()
    if isinstance(seed, str):
        try:
            raw = bytes.fromhex(seed)
        except ValueError:
            raw = seed.encode()
        return normalize_seed(raw)
    if isinstance(seed, (int, np.integer)):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        return hashlib.blake2b(b"int-seed" + int(seed).to_bytes(32, "little"),
                               digest_size=32).digest()
    raise TypeError(f"unsupported seed type {type(seed).__name__}")


def repetition_key(seed: bytes, repetition: int) -> tuple[int, int]:
    d = hashlib.blake2b(normalize_seed(seed) + struct.pack("<Q", repetition),
                        digest_size=16).digest()
    return struct.unpack("<QQ", d)


def siphash24(key: bytes, message: bytes) -> int:
    """Reference SipHash-2-4 over arbitrary bytes (pure Python)."""
    k0, k1 = struct.unpack("<QQ", key)
    v = [k0 ^ 0x736F6D6570736575, k1 ^ 0x646F72616E646F6D,
         k0 ^ 0x6C7967656E657261, k1 ^ 0x7465646279746573]

    def rotl(x, b):
        return ((x << b) | (x >> (64 - b))) & _MASK

    def rnd():
        v[0] = (v[0] + v[1]) & _MASK
        v[1] = rotl(v[1], 13) ^ v[0]
        v[0] = rotl(v[0], 32)
        v[2] = (v[2] + v[3]) & _MASK
        v[3] = rotl(v[3], 16) ^ v[2]
        v[0] = (v[0] + v[3]) & _MASK
        v[3] = rotl(v[3], 21) ^ v[0]
        v[2] = (v[2] + v[1]) & _MASK
        v[1] = rotl(v[1], 17) ^ v[2]
        v[2] = rotl(v[2], 32)

    n = len(message)
    full = n - n % 8
    for off in range(0, full, 8):
        (m,) = struct.unpack_from("<Q", message, off)
        v[3] ^= m
        rnd()
        rnd()
        v[0] ^= m
    tail = message[full:] + bytes(7 - n % 8)
    b = ((n & 0xFF) << 56) | int.from_bytes(tail, "little")
    v[3] ^= b
    rnd()
    rnd()
    v[0] ^= b
    v[2] ^= 0xFF
    for _ in range(4):
        rnd()
    return v[0] ^ v[1] ^ v[2] ^ v[3]


class RandomSource:
    """Keyed pseudorandom function for one repetition.

    Parameters
    ----------
    seed : bytes
        Master seed (32 bytes).
    repetition : int
        Repetition index; distinct repetitions use independent keys.
    """

    def __init__(self, seed, repetition: int = 0):
        self.seed = normalize_seed(seed)
        self.repetition = int(repetition)
        k0, k1 = repetition_key(self.seed, self.repetition)
        self._k0 = np.uint64(k0)
        self._k1 = np.uint64(k1)

    def words(self, node_ids, purpose: int, counters) -> np.ndarray:
        """64-bit outputs for broadcast arrays of node ids and counters."""
        nid, ctr = np.broadcast_arrays(np.asarray(node_ids, dtype=np.uint64),
                                       np.asarray(counters, dtype=np.uint64))
        shape = nid.shape
        w0 = np.ascontiguousarray(nid.reshape(-1))
        w2 = np.ascontiguousarray(ctr.reshape(-1))
        w1 = np.full(w0.shape, purpose, dtype=np.uint64)
        return _kernels.siphash_words(self._k0, self._k1, w0, w1, w2).reshape(shape)

    def uniform(self, node_ids, purpose: int, counters) -> np.ndarray:
        """Uniform doubles in (0, 1] from the top 53 bits."""
        w = self.words(node_ids, purpose, counters)
        return ((w >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO_M53


def derive_randomness(seed, node_id: int, purpose_tag: int, counter: int,
                      repetition: int = 0) -> int:
    """Single 64-bit value of the stream for ``(node_id, purpose_tag, counter)``."""
    src = RandomSource(seed, repetition)
    return int(src.words(np.array([node_id]), purpose_tag, np.array([counter]))[0])


def sample_exponential(lam: float, u_min: float, source: RandomSource,
                       node_ids, purpose: int = PRECISION,
                       max_rounds: int = 10_000) -> np.ndarray:
    """Exp(lam) draws conditioned on ``u >= u_min``, one per node id.

    Each node consumes counters 0, 1, 2, ... and keeps the first draw that
    clears ``u_min``. Rejection (rather than clamping) reproduces the
    conditional law exactly.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    ids = np.asarray(node_ids, dtype=np.uint64).reshape(-1)
    out = np.empty(ids.shape[0], dtype=np.float64)
    pending = np.arange(ids.shape[0])
    counter = 0
    while pending.size:
        if counter >= max_rounds:
            raise RuntimeError("u_min rejects nearly all draws; lower u_min")
        U = source.uniform(ids[pending], purpose, np.uint64(counter))
        u = -np.log(U) / lam
        ok = u >= u_min
        out[pending[ok]] = u[ok]
        pending = pending[~ok]
        counter += 1
    return out
