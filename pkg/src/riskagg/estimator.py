"""Scikit-learn style estimator wrapping the compound-model likelihood fit."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import collective
from .collective import FAMILIES, compound_atom0, compound_logpdf
from .inference import fit_mle, log_likelihood
from .validation import check_amounts


class CompoundLossModel(BaseEstimator):
    """Maximum-likelihood density estimator for per-policy aggregate losses.

    Parameters
    ----------
    family : str, default="poisson-pareto"
        Count/claim pair, one of :data:`riskagg.collective.FAMILIES`.
    n_restarts : int, default=4
        Perturbed optimizer restarts beyond the moment-based seed.
    hessian_step : float, default=1e-4
        Finite-difference step for standard errors (free parameter scale).
    random_state : int, Generator or None, default=0
        Seeds the restart perturbations.

    Attributes
    ----------
    params_ : dict
        Fitted parameters.
    std_errors_ : dict
        Standard errors (``None`` entries when the information matrix is singular).
    model_ : CompoundModel
    fit_result_ : FitResult
    loglik_, aic_, caic_ : float
    converged_ : bool
    n_features_in_ : int
        Always 1.

    Examples
    --------
    >>> import numpy as np
    >>> from riskagg import CompoundLossModel
    >>> x = np.r_[np.zeros(90), np.linspace(0.5, 5.0, 10)]
    >>> est = CompoundLossModel(family="geometric-exponential").fit(x)
    >>> round(est.params_["p"], 2)
    0.9
    """

    def __init__(self, family="poisson-pareto", n_restarts=4, hessian_step=1e-4, random_state=0):
        self.family = family
        self.n_restarts = n_restarts
        self.hessian_step = hessian_step
        self.random_state = random_state

    def fit(self, X, y=None):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        x = check_amounts(X)
        res = fit_mle(
            self.family,
            x,
            n_restarts=self.n_restarts,
            random_state=self.random_state,
            hessian_step=self.hessian_step,
        )
        self.fit_result_ = res
        self.params_ = dict(res.estimates)
        self.std_errors_ = dict(res.std_errors)
        self.model_ = res.model
        self.loglik_ = res.loglik
        self.aic_ = res.aic
        self.caic_ = res.caic
        self.converged_ = res.converged
        self.n_features_in_ = 1
        return self

    def score_samples(self, X):
        """Per-observation log-likelihood: ``log P(N=0)`` at zero, log density otherwise."""
        check_is_fitted(self, "model_")
        x = check_amounts(X)
        out = np.empty_like(x)
        zero = x == 0
        atom = compound_atom0(self.model_)
        out[zero] = np.log(atom) if atom > 0 else -np.inf
        if np.any(~zero):
            out[~zero] = compound_logpdf(self.model_, x[~zero])
        return out

    def score(self, X, y=None):
        """Total log-likelihood of ``X``."""
        check_is_fitted(self, "model_")
        return log_likelihood(self.model_, check_amounts(X))

    def sample(self, n_samples=1, random_state=None):
        check_is_fitted(self, "model_")
        rng = np.random.default_rng(random_state)
        return np.atleast_1d(collective.sample_compound(self.model_, rng, n_samples))

    def sf(self, x):
        check_is_fitted(self, "model_")
        return collective.compound_sf(self.model_, x)

    def cdf(self, x):
        check_is_fitted(self, "model_")
        return collective.compound_cdf(self.model_, x)
