import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gapedit.tree import (PrecisionTree, ShiftSet, TreeConfig, choose_branching,
                          shift_universe, shifts_for_step)


@pytest.mark.parametrize("n,B", [(4096, 64), (1024, 32), (65536, 256), (16, 4)])
def test_branching_shrinks_to_minimum_of_same_depth(n, B):
    assert choose_branching(n)[0] == B


@given(st.integers(1, 200_000))
def test_padded_length_is_a_fixpoint(n):
    B, d = choose_branching(n)
    assert B ** d >= n
    assert choose_branching(B ** d) == (B, d)


def test_explicit_branching_is_verbatim():
    assert choose_branching(1000, 10) == (10, 3)
    with pytest.raises(ValueError):
        choose_branching(1000, 1)


def test_tree_tolerances_follow_parent_rule():
    cfg = TreeConfig(n_padded=1024, branching=32, k=8, master_seed=b"t")
    tree = PrecisionTree(cfg)
    assert tree.t[0] == 8 and math.isnan(tree.u[0])
    for v in (1, 5, 40, 1000):
        p = tree.parent(v)
        assert np.isclose(tree.t[v], tree.t[p] * tree.u[v] / 3)
    assert (tree.u[1:] >= cfg.u_floor).all()


def test_tree_structure():
    tree = PrecisionTree(TreeConfig(n_padded=64, branching=4, k=2, master_seed=1))
    assert tree.depth == 3 and tree.n_nodes == 1 + 4 + 16 + 64
    assert list(tree.children(0)) == [1, 2, 3, 4]
    assert tree.node_range(2) == (16, 16)
    assert tree.is_leaf(tree.n_nodes - 1) and not tree.is_leaf(0)
    assert tree.parent(0) == -1


def test_tree_is_deterministic_per_repetition():
    a = PrecisionTree(TreeConfig(n_padded=256, branching=16, k=4, master_seed=9))
    b = PrecisionTree(TreeConfig(n_padded=256, branching=16, k=4, master_seed=9))
    c = PrecisionTree(TreeConfig(n_padded=256, branching=16, k=4, master_seed=9, repetition=1))
    assert a.tolerance_bytes() == b.tolerance_bytes() != c.tolerance_bytes()


def test_shift_universe_scales_with_depth():
    S = shift_universe(4, 4096, 64)
    assert (S.lo, S.hi, S.step) == (-36, 36, 1)


def test_shiftset_rounding_ties():
    S = ShiftSet(-6, 6, 2)
    assert S.round(1) == 0 and S.round(-1) == 0
    assert S.round(3) == 2 and S.round(-3) == -2
    assert S.round(100) == 6 and S.round(-100) == -6
    T = ShiftSet(-9, 9, 3)
    assert T.round(0) == 0


@given(st.integers(1, 20), st.integers(-300, 300))
def test_rounding_returns_nearest_member(step, s):
    S = shifts_for_step(step, ShiftSet(-100, 100, 1))
    r = S.round(s)
    arr = S.array()
    assert r in S
    assert abs(r - s) == np.abs(arr - s).min()


def test_shifts_for_step_stays_inside_universe():
    S = shift_universe(3, 81, 3)
    Sv = shifts_for_step(4, S)
    assert Sv.hi <= S.hi and Sv.lo >= S.lo and Sv.step == 4 and 0 in Sv
