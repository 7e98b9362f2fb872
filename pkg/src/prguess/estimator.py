"""scikit-learn style wrapper: maps a column of noise values v to (G, H, H/n)."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .guessprob import cached_guessing_probability, default_mode
from .nosig import ScenarioKind
from .numeric import Mode
from .validation import check_noise, check_rounds


class GuessingProbabilityTransformer(TransformerMixin, BaseEstimator):
    """Transformer over noise values.

    Nothing is learned from data; ``fit`` only validates the parameters.
    ``transform`` accepts a 1-D sequence or an (k, 1) array of v values and
    returns a float array of shape (k, 3) with columns G, H and H / n.  The
    exact results of the last call are kept in ``results_``.
    """

    def __init__(self, n=1, scenario="tons", mode=None, formulation="reduced"):
        self.n = n
        self.scenario = scenario
        self.mode = mode
        self.formulation = formulation

    def fit(self, X=None, y=None):
        self.n_ = check_rounds(self.n)
        self.scenario_ = ScenarioKind.coerce(self.scenario)
        self.mode_ = default_mode(self.n_) if self.mode is None else Mode.coerce(self.mode)
        if self.formulation not in ("reduced", "full"):
            raise ValueError(f"unknown formulation {self.formulation!r}")
        return self

    def _values(self, X):
        arr = np.asarray(X, dtype=object)
        if arr.ndim == 2 and arr.shape[1] == 1:
            arr = arr[:, 0]
        if arr.ndim != 1:
            raise ValueError(f"expected a column of v values, got shape {arr.shape}")
        return [check_noise(v, self.mode_, low=0, high=1) for v in arr]

    def transform(self, X):
        check_is_fitted(self, "n_")
        self.results_ = [
            cached_guessing_probability(self.n_, self.scenario_, v, self.mode_, self.formulation)
            for v in self._values(X)
        ]
        return np.array([[float(r.G), r.H, r.H_per_round] for r in self.results_]).reshape(-1, 3)

    def get_feature_names_out(self, input_features=None):
        return np.array(["G", "H", "H_per_round"], dtype=object)
