"""scikit-learn style wrappers.

``NESSEstimator.fit()`` builds the steady state for one parameter point;
``transform``/``predict`` map local observables to their expectation values.
There is no training data: ``fit`` ignores ``X`` and ``y`` and exists so the
estimator composes with ``get_params``/``set_params``/``clone``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_chain_length, check_local_operator, check_mode, check_real

__all__ = ["NESSEstimator", "ScalingFit"]


class NESSEstimator(BaseEstimator):
    """Steady state of the boundary-driven chain at ``(n, eps, mu)``.

    Parameters
    ----------
    n : int
        Number of sites.
    eps : float or None
        Coupling; ``None`` with ``mode="exact"`` keeps it formal.
    mu : float
        Hole chemical potential.
    mode : {"numeric", "exact"}
    sector : int or None
        Project onto one hole-number sector instead of the grand-canonical mix.
    physical : bool
        Also materialize the Cholesky factor and density on the ``3**n``
        space.  Without it only the doubled-space transfer data is built.
    """

    def __init__(self, n=3, eps=1.0, mu=0.0, mode="numeric", sector=None, physical=True):
        self.n = n
        self.eps = eps
        self.mu = mu
        self.mode = mode
        self.sector = sector
        self.physical = physical

    def _validate(self):
        check_mode(self.mode)
        n = check_chain_length(self.n)
        if self.mode == "numeric":
            check_real(self.eps, "eps")
        check_real(self.mu, "mu")
        return n

    def fit(self, X=None, y=None):
        from .mpo import contract_cholesky, default_params, grand_canonical_cholesky, project_sector
        from .observables import partition_function

        n = self._validate()
        eps = None if self.mode == "exact" else float(self.eps)
        if self.physical:
            if self.mode == "exact":
                S = contract_cholesky(n, default_params(n))
            else:
                S = grand_canonical_cholesky(n, eps, float(self.mu))
            if self.sector is not None:
                S = project_sector(S, self.sector)
            self.cholesky_ = S
            self.density_ = S @ S.dagger()
            if self.mode == "exact":
                tr = sum((v for (r, c), v in self.density_.data.items() if r == c),
                         start=self.density_.data[(0, 0)] * 0)
                self.partition_function_ = tr
            else:
                self.partition_function_ = float(self.density_.tosparse().diagonal().sum().real)
        else:
            if self.sector is not None or self.mode == "exact":
                raise ValueError("doubled-space route is numeric and grand-canonical only")
            self.partition_function_ = partition_function(n, eps, float(self.mu))
        self.n_sites_ = n
        return self

    def transform(self, X):
        """Expectation values of local observables.

        ``X`` is a list of ``(matrix, x)`` pairs (``matrix`` of size
        ``3**l``, first site ``x``); returns a complex array.
        """
        check_is_fitted(self, "partition_function_")
        from .observables import local_expectation
        from .physical import local_operator

        out = []
        for M, x in X:
            M = check_local_operator(M)
            if self.physical and self.mode == "numeric":
                rho = self.density_.tosparse()
                val = (local_operator(M, int(x), self.n_sites_) @ rho).diagonal().sum() / self.partition_function_
            elif self.physical:
                raise ValueError("evaluate an exact estimator at a numeric eps before transforming")
            else:
                val = local_expectation(M, int(x), self.n_sites_, float(self.eps), float(self.mu))
            out.append(complex(val))
        return np.asarray(out)

    def predict(self, X):
        return self.transform(X).real


class ScalingFit(RegressorMixin, BaseEstimator):
    """Least squares ``log Z_n ~ alpha n + beta1 n log n (+ c)``."""

    def __init__(self, intercept=True):
        self.intercept = intercept

    def _design(self, n):
        n = np.asarray(n, dtype=float).reshape(-1)
        cols = [n, n * np.log(n)]
        if self.intercept:
            cols.append(np.ones_like(n))
        return np.column_stack(cols)

    def fit(self, n, log_z):
        n = check_array(np.asarray(n, dtype=float).reshape(-1, 1)).ravel()
        log_z = np.asarray(log_z, dtype=float).reshape(-1)
        if len(n) != len(log_z):
            raise ValueError("n and log_z differ in length")
        if len(n) < 4:
            raise ValueError("scaling fit needs at least 4 chain lengths")
        if np.any(n < 1):
            raise ValueError("chain lengths must be >= 1")
        A = self._design(n)
        coef, *_ = np.linalg.lstsq(A, log_z, rcond=None)
        self.alpha_, self.beta1_ = float(coef[0]), float(coef[1])
        self.intercept_ = float(coef[2]) if self.intercept else 0.0
        self.residuals_ = log_z - A @ coef
        self.n_range_ = (int(n.min()), int(n.max()))
        return self

    def predict(self, n):
        check_is_fitted(self, "alpha_")
        coef = [self.alpha_, self.beta1_] + ([self.intercept_] if self.intercept else [])
        return self._design(n) @ np.asarray(coef)
