import struct

import numpy as np
import pytest

from gapedit import _kernels
from gapedit import randomness as rnd


def test_siphash_reference_vectors():
    key = bytes(range(16))
    assert rnd.siphash24(key, b"") == 0x726FDB47DD0E0E31
    assert rnd.siphash24(key, bytes(range(15))) == 0xA129CA6149BE45E5


def test_compiled_siphash_matches_reference():
    key = bytes(range(16))
    k0, k1 = struct.unpack("<QQ", key)
    words = np.array([3, 7, 2**63 + 5], dtype=np.uint64)
    got = _kernels.siphash_words(np.uint64(k0), np.uint64(k1), words, words + np.uint64(1),
                                 words * np.uint64(3))
    for w, g in zip(words, got):
        msg = struct.pack("<QQQ", int(w), int(w) + 1, (int(w) * 3) % 2**64)
        assert int(g) == rnd.siphash24(key, msg)


def test_derive_randomness_is_deterministic_and_separated():
    a = rnd.derive_randomness(b"s", 5, rnd.PRECISION, 0)
    assert a == rnd.derive_randomness(b"s", 5, rnd.PRECISION, 0)
    assert a != rnd.derive_randomness(b"s", 5, rnd.SAMPLE, 0)
    assert a != rnd.derive_randomness(b"s", 5, rnd.PRECISION, 0, repetition=1)
    assert a != rnd.derive_randomness(b"t", 5, rnd.PRECISION, 0)


def test_seed_normalization():
    assert len(rnd.normalize_seed(7)) == 32
    assert rnd.normalize_seed("00" * 32) == bytes(32)
    with pytest.raises(ValueError):
        rnd.normalize_seed(-1)
    with pytest.raises(TypeError):
        rnd.normalize_seed(1.5)


def test_uniform_range_and_mean():
    src = rnd.RandomSource(b"u")
    u = src.uniform(np.arange(20000), rnd.SAMPLE, 0)
    assert u.min() > 0 and u.max() <= 1
    assert abs(u.mean() - 0.5) < 0.01


def test_exponential_respects_floor_and_mean():
    src = rnd.RandomSource(b"e")
    lam = 3.0
    u = rnd.sample_exponential(lam, 1e-3, src, np.arange(1, 40001))
    assert u.min() >= 1e-3
    # conditional law: Exp shifted by the floor
    assert abs(u.mean() - (1e-3 + 1 / lam)) < 0.01


def test_exponential_rejects_bad_lambda():
    with pytest.raises(ValueError):
        rnd.sample_exponential(0.0, 1e-3, rnd.RandomSource(b"x"), [1])
