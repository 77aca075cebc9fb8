"""scikit-learn compatible front end for the fuzzy weight system."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .fuzzy import (
    DEFAULT_RESOLUTION,
    FuzzySystem,
    InputDomainError,
    RuleBase,
    default_rule_base,
    default_variables,
    load_membership,
    load_rules,
    raw_table_variables,
)


class FuzzyWeightRegressor(RegressorMixin, BaseEstimator):
    """Map rows of ``[soc, stay]`` (both normalized to [0, 1]) to weights.

    Nothing is learned: ``fit`` only validates the configuration and builds
    the inference system, so the estimator can sit inside a ``Pipeline`` or be
    cloned by ``GridSearchCV`` over its rule base or resolution.

    Parameters
    ----------
    rules : RuleBase, path or None
        Rule base or a rule file; ``None`` uses the default matrix.
    membership : {"corrected", "raw"} or path
        Membership parameter set. ``"raw"`` reproduces the published table
        verbatim, typos included.
    resolution : int
        Number of grid points used for centroid defuzzification.
    """

    def __init__(self, rules=None, membership="corrected", resolution=DEFAULT_RESOLUTION):
        self.rules = rules
        self.membership = membership
        self.resolution = resolution

    def _build(self) -> FuzzySystem:
        if self.membership == "corrected":
            soc, stay, weight = default_variables()
        elif self.membership == "raw":
            soc, stay, weight = raw_table_variables()
        else:
            loaded = load_membership(self.membership)
            soc, stay, weight = default_variables()
            soc = loaded.get("soc", soc)
            stay = loaded.get("stay_time", stay)
            weight = loaded.get("weight", weight)
        if self.rules is None:
            rules = default_rule_base()
        elif isinstance(self.rules, RuleBase):
            rules = self.rules
        else:
            rules = load_rules(self.rules)
        if int(self.resolution) < 100:
            raise ValueError(f"resolution must be >= 100, got {self.resolution}")
        return FuzzySystem(soc, stay, weight, rules, int(self.resolution))

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        self._check_features(X)
        self.n_features_in_ = 2
        self.fis_ = self._build()
        return self

    def _check_features(self, X):
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 columns [soc, stay], got {X.shape[1]}")
        if X.size and (X.min() < 0.0 or X.max() > 1.0):
            raise InputDomainError("inputs must lie in [0, 1]")

    def predict(self, X):
        check_is_fitted(self, "fis_")
        X = check_array(X, dtype=float)
        self._check_features(X)
        return np.array([self.fis_.compute_weight(s, t) for s, t in X])

    def transform(self, X):
        """Weights as a single-column matrix, for use as a pipeline step."""
        return self.predict(X).reshape(-1, 1)

    def fit_transform(self, X, y=None):
        return self.fit(X, y).transform(X)
