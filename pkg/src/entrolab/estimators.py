"""scikit-learn style wrappers over the function API.

The wrappers only fit loosely.  Every estimator needs the dynamics
(a :class:`~entrolab.dynamics.MapSpec`) as a hyperparameter, and ``X`` is
a set of phase-space points instead of a feature matrix.  Targets are
ignored.  Fitted values live in attributes with a trailing underscore.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import entropy as _entropy
from . import hyperbolicity as _hyp
from . import metric_entropy as _me
from ._validation import check_map, check_points, check_window


class TopologicalEntropyEstimator(BaseEstimator):
    """Separated-set entropy of ``dynamics`` restricted to the sample ``X``.

    Parameters
    ----------
    dynamics : MapSpec
    epsilon_schedule : tuple of float
    n_max : int
    mesh : float, optional
        Spacing of ``X`` when it is a grid; enables the resolution guard.
    workers : int
    """

    def __init__(self, dynamics=None, epsilon_schedule=(0.04, 0.02), n_max=16, n_min=2,
                 saturation=0.1, mesh=None, workers=1):
        self.dynamics = dynamics
        self.epsilon_schedule = epsilon_schedule
        self.n_max = n_max
        self.n_min = n_min
        self.saturation = saturation
        self.mesh = mesh
        self.workers = workers

    def fit(self, X, y=None):
        m = check_map(self.dynamics)
        X = check_points(X, m)
        prov = {"kind": "explicit"} if self.mesh is None else {"kind": "grid", "mesh": self.mesh}
        est = _entropy.entropy_estimate(m, _entropy.PointCloud(X, prov), self.epsilon_schedule,
                                        self.n_max, n_min=self.n_min,
                                        saturation=self.saturation, workers=self.workers)
        self.estimate_ = est
        self.entropy_ = est.value
        self.n_features_in_ = X.shape[1]
        return self


class MetricEntropyEstimator(BaseEstimator):
    """Metric entropy of the uniform empirical measure on ``X`` for a box partition."""

    def __init__(self, dynamics=None, cells_per_axis=16, n_window=(4, 10),
                 estimator="chao_shen"):
        self.dynamics = dynamics
        self.cells_per_axis = cells_per_axis
        self.n_window = n_window
        self.estimator = estimator

    def fit(self, X, y=None):
        m = check_map(self.dynamics)
        X = check_points(X, m)
        xi = _me.BoxPartition.uniform(m, self.cells_per_axis)
        est = _me.metric_entropy_estimate(m, _me.EmpiricalMeasure(X), xi,
                                          check_window(self.n_window), self.estimator)
        self.estimate_ = est
        self.entropy_ = est.value
        self.n_features_in_ = X.shape[1]
        return self


class LyapunovTransformer(TransformerMixin, BaseEstimator):
    """Map each initial point to its descending finite-time exponents."""

    def __init__(self, dynamics=None, n_blocks=50, block_length=1, transient=16):
        self.dynamics = dynamics
        self.n_blocks = n_blocks
        self.block_length = block_length
        self.transient = transient

    def fit(self, X, y=None):
        m = check_map(self.dynamics)
        self.n_features_in_ = check_points(X, m).shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        m = self.dynamics
        X = check_points(X, m)
        return np.array([_hyp.finite_time_exponents(m, x, self.n_blocks, self.block_length,
                                                    self.transient) for x in X]).reshape(-1, m.dim)


class TailEntropyTransformer(TransformerMixin, BaseEstimator):
    """Tail entropy at each query point, with ``fit`` supplying the reference cloud."""

    def __init__(self, dynamics=None, epsilon=0.1, horizon=20, beta=None):
        self.dynamics = dynamics
        self.epsilon = epsilon
        self.horizon = horizon
        self.beta = beta

    def fit(self, X, y=None):
        m = check_map(self.dynamics)
        X = check_points(X, m)
        self.reference_ = _entropy.PointCloud(X, {"kind": "explicit"})
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "reference_")
        m = self.dynamics
        X = check_points(X, m)
        beta = self.epsilon / 4 if self.beta is None else self.beta
        return np.array([[_entropy.tail_entropy(m, x, self.epsilon, self.horizon, beta,
                                                self.reference_)] for x in X])
