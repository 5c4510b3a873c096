import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from affgrass import fixtures
from affgrass.estimators import (
    DriftVerifier,
    LimitLawEstimator,
    LyapunovEstimator,
    RecurrenceClassifier,
)
from affgrass.exceptions import ValidationError


def test_params_and_clone():
    est = LyapunovEstimator(n_steps=123, random_state=4)
    assert est.get_params()["n_steps"] == 123
    twin = clone(est).set_params(n_replicas=8)
    assert twin.n_replicas == 8 and twin.random_state == 4


def test_lyapunov_estimator():
    est = LyapunovEstimator(n_steps=2000, n_replicas=16).fit(fixtures.diagonal_ensemble())
    assert est.exponents_.shape == (3,)
    assert np.all(np.diff(est.exponents_) <= 0)


def test_classifier_predict():
    clf = RecurrenceClassifier(n_steps=3000).fit(fixtures.saff2())
    assert list(clf.predict([0, 1])) == ["transient", "recurrent"]
    z = clf.decision_function([0, 1])
    assert z[0] > 3 and z[1] < -3
    with pytest.raises(ValidationError):
        clf.predict([2])


def test_not_fitted():
    with pytest.raises(NotFittedError):
        RecurrenceClassifier().predict([0])
    with pytest.raises(NotFittedError):
        DriftVerifier().score()


def test_fit_validates_input():
    with pytest.raises(ValidationError):
        LyapunovEstimator().fit(np.eye(2))


def test_limit_law_and_drift():
    law = LimitLawEstimator(n_steps=2000, n_replicas=16, lil_n_max=1000, lil_words=4)
    law.fit(fixtures.scalar_two_atom())
    assert law.phi_.shape == (1, 1) and law.report_.containment_ratio is not None
    drift = DriftVerifier(k=1, samples=300).fit(fixtures.saff2())
    assert 0 < drift.score() < 1
