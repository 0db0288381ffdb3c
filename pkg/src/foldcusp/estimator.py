"""scikit-learn style front end for case classification."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .bifurcation import L1NotFoundError, all_labels, classify_case, equivalence_class, find_L1

UNRESOLVED = "boundary-unresolved"


class FoldCuspCaseClassifier(ClassifierMixin, BaseEstimator):
    """Assigns case labels to rows ``(lambda, beta, mu)``.

    Nothing is learned: ``fit`` validates the parameter rows, fixes the label
    set of the chosen family and warms the ``L1`` cache for every distinct
    ``(beta, mu)`` pair.  ``predict`` returns label strings such as ``"11_1"``;
    points where two boundaries coincide within tolerance get
    ``"boundary-unresolved"``.

    Parameters
    ----------
    family : {"invisible", "visible"}
    window : float or None
        Analysis half-width; ``None`` uses the per-point default.
    branch : {None, "0", "-", "+"}
        Forces the label family of the invisible unfolding (useful for
        ``beta <= 0`` rows of a fixed-sign ``mu`` slice).
    """

    def __init__(self, family="invisible", window=None, branch=None):
        self.family = family
        self.window = window
        self.branch = branch

    def _rows(self, X):
        X = check_array(X, dtype=float)
        if X.shape[1] == 2:
            X = np.column_stack([X, np.zeros(len(X))])
        if X.shape[1] != 3:
            raise ValueError(f"expected rows (lambda, beta[, mu]); got {X.shape[1]} columns")
        return X

    def fit(self, X, y=None):
        X = self._rows(X)
        if self.family not in ("invisible", "visible"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "visible":
            labels = all_labels("TB")
        else:
            labels = all_labels("T1") + all_labels("T2") + all_labels("T3")
        self.classes_ = np.array(sorted(str(l) for l in labels) + [UNRESOLVED])
        self.L1_ = {}
        if self.family == "invisible":
            for beta, mu in np.unique(X[:, 1:], axis=0):
                beta, mu = float(beta), float(mu)
                if beta > 0:
                    try:
                        self.L1_[(beta, mu)] = find_L1(beta, mu)
                    except L1NotFoundError:
                        self.L1_[(beta, mu)] = np.nan
        self.n_features_in_ = 3
        return self

    def predict(self, X):
        check_is_fitted(self, "classes_")
        X = self._rows(X)
        out = [classify_case((lam, beta, mu), self.family, self.window, self.branch).text for lam, beta, mu in X]
        return np.array(out, dtype=object)

    def predict_class(self, X):
        """Phase-portrait equivalence class of each row."""
        return np.array([UNRESOLVED if l == UNRESOLVED else equivalence_class(l) for l in self.predict(X)], dtype=object)
