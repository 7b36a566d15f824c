import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gapedit import psl


def test_recover_clips_and_counts():
    inp = psl.RecoverInput(np.array([10.0, 0.1]), np.array([1.0, 1.0]), lam=2.0, beta=1.0)
    # only the first term clears c1 * beta * u = 2
    assert psl.recover(inp, c1=2.0, c2=2.0) == pytest.approx((10 - 2) + 2 * 1 / 2)


def test_recover_beta_zero_is_plain_sum_of_positive_terms():
    inp = psl.RecoverInput(np.array([3.0, 0.0, 2.0]), np.ones(3), lam=4.0, beta=0.0)
    assert psl.recover(inp) == 5.0


def test_recover_input_validation():
    with pytest.raises(ValueError):
        psl.RecoverInput(np.array([1.0]), np.array([0.0]), 1.0, 1.0)
    with pytest.raises(ValueError):
        psl.RecoverInput(np.array([1.0, 2.0]), np.array([1.0]), 1.0, 1.0)
    with pytest.raises(ValueError):
        psl.RecoverInput(np.array([1.0]), np.array([1.0]), 0.0, 1.0)


@given(st.lists(st.floats(0, 50), min_size=1, max_size=12), st.floats(0.1, 5),
       st.floats(0, 10), st.integers(0, 1000))
def test_matrix_form_matches_scalar(a, lam, beta, seed):
    rng = np.random.default_rng(seed)
    a = np.asarray(a)
    u = rng.exponential(1 / lam, a.size) + 1e-9
    A = np.stack([a, a * 0.5], axis=1)
    got = psl.recover_matrix(A, u, lam, beta)
    assert got[0] == pytest.approx(psl.recover(psl.RecoverInput(a, u, lam, beta)))
    assert got[1] == pytest.approx(psl.recover(psl.RecoverInput(a * 0.5, u, lam, beta)))


def test_family_vectors():
    assert psl.family_vector("spread", 8, 8.0, 1.0).tolist() == [1.0] * 8
    assert psl.family_vector("heavy", 8, 8.0, 1.0).sum() == pytest.approx(8)
    assert psl.family_vector("tiny", 4, 8.0, 2.0).tolist() == [0.25] * 4
    with pytest.raises(ValueError):
        psl.family_vector("nope", 4, 8.0, 1.0)


def test_adversaries_respect_hypotheses():
    rng = np.random.default_rng(0)
    a = psl.family_vector("geometric", 32, 8.0, 1.0)
    u = rng.exponential(1 / 8, (100, 32))
    up = psl.adversary_estimates("max_up", a, u, 2.0, 1.0)
    down = psl.adversary_estimates("max_down", a, u, 2.0, 1.0)
    assert (up <= 2 * a + u + 1e-12).all()
    assert (down >= a / 2 - u - 1e-12).all()


def test_small_harness_runs_and_reports():
    rep = psl.recover_contract_harness(trials=200, Bs=(8,), lams=(8.0,), alphas=(1.0,),
                                       betas=(1.0,))
    assert len(rep.cells) == len(psl.FAMILIES) * len(psl.ADVERSARIES)
    assert 0.0 <= rep.worst <= 1.0
    assert '"passed"' in rep.to_json()


@given(st.lists(st.floats(0, 40), min_size=1, max_size=10), st.integers(0, 10_000),
       st.floats(0.01, 10), st.floats(0.1, 20))
def test_monotone_scale_covariant_and_zero(a, seed, beta, c):
    rng = np.random.default_rng(seed)
    a = np.asarray(a)
    u = rng.exponential(1 / 8, a.size) + 1e-9
    base = psl.recover(psl.RecoverInput(a, u, 8.0, beta))
    i = int(rng.integers(a.size))
    bumped = a.copy()
    bumped[i] += float(rng.uniform(0, 5))
    assert psl.recover(psl.RecoverInput(bumped, u, 8.0, beta)) >= base
    scaled = psl.recover(psl.RecoverInput(c * a, u, 8.0, c * beta))
    assert scaled == pytest.approx(c * base, rel=1e-9, abs=1e-9)
    assert psl.recover(psl.RecoverInput(np.zeros(a.size), u, 8.0, beta)) == 0


def test_contract_examples():
    u = np.full(1, 0.3)
    assert psl.recover(psl.RecoverInput(np.zeros(1), u, 8.0, 0.0)) == 0
    r = psl.recover(psl.RecoverInput(np.ones(8), np.full(8, 0.1), 8.0, 0.0))
    assert 4 <= r <= 16
