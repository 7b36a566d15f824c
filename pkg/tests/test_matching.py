import numpy as np
import pytest

from gapedit.index import preprocess_x
from gapedit.layout import hash_codes
from gapedit.matching import build_table, fingerprint, matching_query, preprocess_matching_x
from gapedit.strings import hamming

from helpers import reader, small_index


@pytest.fixture(scope="module")
def idx():
    rng = np.random.default_rng(3)
    return small_index(rng.integers(0, 4, 256), k=4, reps=2)


def _window(idx, v, s):
    tree = idx.reps[0].tree
    start, m = tree.node_range(v)
    y = idx.y
    return y.sym[y.margin + start + s: y.margin + start + s + m]


def test_x_equals_y_matches_with_small_hamming(idx):
    rep = idx.reps[0]
    tree = rep.tree
    x = reader(idx.y.core, idx)
    for v in range(tree.n_nodes):
        s = matching_query(rep.matching, v, x)
        assert s is not None
        start, m = tree.node_range(v)
        assert hamming(idx.y.core[start:start + m], _window(idx, v, s)) <= tree.t[v] / 2


def test_completeness_for_planted_shift(idx):
    rep = idx.reps[0]
    tree = rep.tree
    S = tree.S
    for v in (1, 3, 7):
        start, m = tree.node_range(v)
        s = 3 if 3 in S else 1
        x = idx.y.core.copy()
        x[start:start + m] = _window(idx, v, s)
        assert matching_query(rep.matching, v, reader(x, idx)) is not None


def test_one_sided_reads_exactly_the_sample(idx):
    rep = idx.reps[0]
    x = reader(idx.y.core, idx)
    for v in (0, 1, 2):
        before = x.reads
        matching_query(rep.matching, v, x)
        d, j = rep.tree.node_index(v)
        assert x.reads - before == rep.samples.levels[d].sizes()[j]


def test_two_sided_fingerprints_match_shift_zero(idx):
    rep = idx.reps[0]
    fps = preprocess_matching_x(idx.y.core, rep.tree, rep.samples, idx.y.alphabet_size)
    assert fps.size == rep.tree.n_nodes
    for v in range(rep.tree.n_nodes):
        assert matching_query(rep.matching, v, fps) is not None


def test_fingerprint_basics():
    p = 101
    assert fingerprint([1, 2, 3], [], [], p, 4) == 0
    a = fingerprint([1, 2, 3], [0, 2], [5, 7], p, 4)
    assert a == fingerprint([1, 0, 3], [0, 2], [5, 7], p, 4)
    assert a == (5 * 1 + 7 * 3) % p


def test_reserved_hash_codes():
    h = hash_codes(np.array([-1, 4, 2]), 4, 101)
    assert list(h) == [100, 99, 2]


def test_collisions_keep_smallest_shift_negative_first():
    fp = np.array([[9, 9, 9, 9, 9]])
    shifts = np.array([-2, -1, 0, 1, 2])
    keys, reps = build_table(fp, shifts, 101)
    assert list(reps) == [0]
    fp = np.array([[9, 9, 1, 9, 9]])
    keys, reps = build_table(fp, shifts, 101)
    assert sorted(zip(keys.tolist(), reps.tolist())) == [(1, 0), (9, -1)]


def test_tables_are_deterministic():
    rng = np.random.default_rng(8)
    y = rng.integers(0, 4, 128)
    a, b = small_index(y, reps=1), small_index(y, reps=1)
    for (ka, sa), (kb, sb) in zip(a.reps[0].matching.tables, b.reps[0].matching.tables):
        assert ka.tobytes() == kb.tobytes() and sa.tobytes() == sb.tobytes()


def test_entries_attempted_counts_internal_nodes_times_shifts(idx):
    m = idx.reps[0].matching
    tree = idx.reps[0].tree
    assert m.entries_attempted() == (tree.level_offset[tree.depth]) * len(tree.S)


def test_random_x_is_far_at_root():
    rng = np.random.default_rng(4)
    idx = small_index(rng.integers(0, 256, 256), k=4, reps=1)
    rep = idx.reps[0]
    far = 0
    for t in range(50):
        x = rng.integers(0, 256, 256)
        far += matching_query(rep.matching, 0, reader(x, idx)) is None
    assert far == 50


def test_preprocess_x_is_independent_of_y(idx):
    from gapedit.config import GapConfig
    xi = preprocess_x(idx.y.core[:idx.config.n], GapConfig(k=4, seed=1, reps=2))
    assert len(xi.fingerprints) == 2
    assert np.array_equal(xi.fingerprints[0], preprocess_matching_x(
        idx.y.core, idx.reps[0].tree, idx.reps[0].samples, idx.y.alphabet_size))
