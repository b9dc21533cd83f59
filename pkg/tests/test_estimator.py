import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from hungalign.estimator import HungarianParaphraseClassifier


def _xy(examples):
    return [(ex.source, ex.target) for ex in examples], [ex.label for ex in examples]


def test_params_round_trip(synthetic_corpus):
    _, table = synthetic_corpus
    est = HungarianParaphraseClassifier(embeddings=table, hidden_size=7, patience=2)
    params = est.get_params()
    assert params["hidden_size"] == 7 and params["patience"] == 2 and params["rho"] == 0.6
    twin = clone(est)
    assert twin.get_params()["hidden_size"] == 7
    assert twin.set_params(batch_size=3).batch_size == 3


def test_unfitted_raises():
    with pytest.raises(NotFittedError):
        HungarianParaphraseClassifier().predict([("a b", "c d")])


def test_fit_requires_embeddings():
    with pytest.raises(ValueError):
        HungarianParaphraseClassifier().fit([("a", "b"), ("c", "d")], [0, 1])


def test_fitted_attributes(fitted_estimator, synthetic_corpus):
    examples, _ = synthetic_corpus
    X, y = _xy(examples)
    est = fitted_estimator
    assert 1 <= len(est.history_) <= 3
    assert 1 <= est.best_epoch_ <= len(est.history_)
    np.testing.assert_array_equal(est.classes_, [0, 1])
    scores = est.decision_function(X)
    assert scores.shape == (len(X),) and np.all(np.abs(scores) <= 1 + 1e-12)
    np.testing.assert_array_equal(est.predict(X), (scores >= est.threshold_.cut).astype(int))
    assert est.score(X, y) == pytest.approx(np.mean(est.predict(X) == np.array(y)))


def test_raw_strings_and_tokens_agree(fitted_estimator):
    a = fitted_estimator.decision_function([("Happy GLAD big", "glad joyful huge")])
    b = fitted_estimator.decision_function([(["happy", "glad", "big"], ("glad", "joyful", "huge"))])
    np.testing.assert_array_equal(a, b)


def test_calibrate_changes_only_threshold(fitted_estimator, synthetic_corpus):
    from copy import deepcopy

    examples, _ = synthetic_corpus
    X, y = _xy(examples)
    est = deepcopy(fitted_estimator)
    before = est.decision_function(X)
    est.calibrate(X, y)
    np.testing.assert_array_equal(est.decision_function(X), before)
    assert est.threshold_.dev_accuracy == pytest.approx(est.score(X, y))


def test_eval_set(synthetic_corpus):
    examples, table = synthetic_corpus
    X, y = _xy(examples)
    seen = []
    est = HungarianParaphraseClassifier(embeddings=table, hidden_size=3, max_epochs=2, patience=2)
    est.fit(X[:30], y[:30], eval_set=(X[30:], y[30:]), on_epoch=seen.append)
    assert [r.epoch for r in seen] == [1, 2]


@pytest.mark.parametrize(
    "X,y",
    [
        ("just a string", [1]),
        ([("a", "")], [1]),
        ([("a",)], [1]),
        ([], []),
        ([("a", "b"), ("c", "d")], [1]),
        ([("a", "b"), ("c", "d")], [1, 2]),
    ],
)
def test_input_validation(synthetic_corpus, X, y):
    _, table = synthetic_corpus
    with pytest.raises((ValueError, TypeError)):
        HungarianParaphraseClassifier(embeddings=table).fit(X, y)


def test_holdout_needs_both_classes(synthetic_corpus):
    _, table = synthetic_corpus
    with pytest.raises(ValueError, match="too few"):
        HungarianParaphraseClassifier(embeddings=table).fit([("a", "b"), ("c", "d")], [1, 0])
