import pickle

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from gapedit import GapEditDistance


@pytest.fixture(scope="module")
def data():
    rng = np.random.default_rng(6)
    y = rng.integers(0, 4, 400)
    close = y.copy()
    close[[30, 300]] = (close[[30, 300]] + 1) % 4
    far = rng.integers(0, 4, 400)
    return y, close, far


def test_params_round_trip_and_clone():
    est = GapEditDistance(k=3, kappa=5.0, seed=7)
    assert est.get_params()["k"] == 3
    c = clone(est.set_params(reps=5))
    assert c.get_params() == est.get_params()


def test_unfitted_raises(data):
    with pytest.raises(NotFittedError):
        GapEditDistance().predict([data[0]])


@pytest.mark.parametrize("bad", [dict(k=0), dict(k=2.5), dict(kappa=-1.0), dict(reps=0),
                                 dict(alphabet="dna")])
def test_bad_params_rejected(data, bad):
    with pytest.raises(ValueError):
        GapEditDistance(**bad).fit(data[0])


def test_single_string_rejected(data):
    est = GapEditDistance(k=4, kappa=8.0, reps=3).fit(data[0])
    with pytest.raises(TypeError):
        est.predict("abc")


@pytest.mark.parametrize("two_sided", [False, True])
def test_fit_predict_score(data, two_sided):
    y, close, far = data
    est = GapEditDistance(k=4, kappa=8.0, seed=1, reps=3, two_sided=two_sided).fit(y)
    assert est.n_reference_ == 400
    pred = est.predict([close, far])
    assert pred.tolist() == [1, 0]
    assert est.score([close, far], [1, 0]) == 1.0
    df = est.decision_function([close])
    assert df[0] < 0
    if two_sided:
        assert all(s.x_reads == 0 and s.y_reads == 0 for s in est.last_stats_)


def test_pickle_fitted(data):
    y, close, _ = data
    est = GapEditDistance(k=4, kappa=8.0, seed=1, reps=3).fit(y)
    back = pickle.loads(pickle.dumps(est))
    assert back.predict([close]).tolist() == est.predict([close]).tolist()
