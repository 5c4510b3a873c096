"""scikit-learn style wrappers around the functional estimators.

``fit`` takes a :class:`~affgrass.group.MeasureSpec` in place of a data matrix;
the hyperparameters are plain keyword arguments so ``get_params``/``set_params``
and ``sklearn.base.clone`` work as usual.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import check_degree, check_measure
from .drift import drift_verify
from .limit_laws import lil_diagnostic, lyapunov_spectrum, sigma_and_phi
from .walks import classify


def _require(est, attr):
    if not hasattr(est, attr):
        raise NotFittedError(f"{type(est).__name__} is not fitted yet; call fit(mu) first")


class LyapunovEstimator(BaseEstimator):
    """QR estimate of the Lyapunov spectrum of the linear parts."""

    def __init__(self, n_steps=10_000, n_replicas=64, random_state=0, n_jobs=None):
        self.n_steps = n_steps
        self.n_replicas = n_replicas
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, mu, y=None):
        self.spectrum_ = lyapunov_spectrum(
            check_measure(mu), self.n_steps, self.n_replicas, self.random_state, self.n_jobs
        )
        self.exponents_ = self.spectrum_.exponents
        self.stderr_ = self.spectrum_.stderr
        return self


class RecurrenceClassifier(BaseEstimator):
    """Predicts recurrent / transient for each k from the sign of lambda_{k+1}."""

    def __init__(self, n_steps=10_000, n_replicas=64, z_threshold=3.0, use_symmetry=True,
                 random_state=0, n_jobs=None):
        self.n_steps = n_steps
        self.n_replicas = n_replicas
        self.z_threshold = z_threshold
        self.use_symmetry = use_symmetry
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, mu, y=None):
        self.mu_ = check_measure(mu)
        self.spectrum_ = lyapunov_spectrum(
            mu, self.n_steps, self.n_replicas, self.random_state, self.n_jobs
        )
        self.classes_ = np.array(["recurrent", "transient", "inconclusive"])
        return self

    def _classify(self, ks):
        _require(self, "spectrum_")
        ks = np.atleast_1d(ks)
        return [
            classify(self.mu_, check_degree(int(k), self.mu_.d), self.spectrum_,
                     self.z_threshold, self.use_symmetry)
            for k in ks
        ]

    def predict(self, ks):
        return np.array([c.verdict for c in self._classify(ks)])

    def decision_function(self, ks):
        """Signed z-score of lambda_{k+1}; positive means transient."""
        return np.array([c.z_score for c in self._classify(ks)])


class LimitLawEstimator(BaseEstimator):
    """Lyapunov vector, covariance and the LIL containment diagnostic."""

    def __init__(self, n_steps=10_000, n_replicas=64, lil_n_max=None, lil_words=32,
                 random_state=0, n_jobs=None):
        self.n_steps = n_steps
        self.n_replicas = n_replicas
        self.lil_n_max = lil_n_max
        self.lil_words = lil_words
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, mu, y=None):
        check_measure(mu)
        law = sigma_and_phi(mu, self.n_steps, self.n_replicas, self.random_state, self.n_jobs)
        if self.lil_n_max:
            law = lil_diagnostic(mu, self.lil_n_max, self.lil_words, self.random_state,
                                 law=law, n_jobs=self.n_jobs)
        self.report_ = law
        self.sigma_ = law.sigma_hat
        self.phi_ = law.phi_hat
        return self


class DriftVerifier(BaseEstimator):
    """Runs the drift recipe for a fixed k; ``score`` returns ``1 - a_hat``."""

    def __init__(self, k=0, delta=None, n0=None, c=None, samples=2000, random_state=0):
        self.k = k
        self.delta = delta
        self.n0 = n0
        self.c = c
        self.samples = samples
        self.random_state = random_state

    def fit(self, mu, y=None):
        self.report_ = drift_verify(check_measure(mu), self.k, self.delta, self.n0, self.c,
                                    self.samples, self.random_state)
        self.a_hat_ = self.report_.a_hat
        self.b_hat_ = self.report_.b_hat
        return self

    def score(self, mu=None, y=None):
        _require(self, "report_")
        return 1.0 - self.a_hat_
