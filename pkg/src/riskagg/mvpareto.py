"""Dependent multivariate Pareto vector built on a shared gamma divisor.

Each claim is ``X_i = beta * Y_i / Y_alpha`` with ``Y_i ~ Ga(1)`` independent
and a single ``Y_alpha ~ Ga(alpha)`` common to all coordinates. Marginals are
``Pareto(alpha, beta)`` and the joint law is Arnold's multivariate Pareto II.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import specfun
from .exceptions import DomainError, MomentDoesNotExistError
from .univariate import GammaShape, _positive, sample_gamma


@dataclass(frozen=True)
class MvParetoModel:
    alpha: float
    beta: float
    n: int

    def __post_init__(self):
        _positive("alpha", self.alpha)
        _positive("beta", self.beta)
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")


def sample_vector(model: MvParetoModel, rng: np.random.Generator, size=None):
    """Draw dependent claim vectors.

    Returns shape ``(n,)`` when ``size`` is None, else ``(size, n)``.
    """
    shape = (model.n,) if size is None else (size, model.n)
    y = sample_gamma(GammaShape(1.0), rng, shape)
    y_alpha = sample_gamma(GammaShape(model.alpha), rng, None if size is None else size)
    if size is not None:
        y_alpha = np.asarray(y_alpha)[:, None]
    return model.beta * y / y_alpha


def _check_dim(x, model):
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (model.n,):
        raise ValueError(f"expected last dimension {model.n}, got shape {x.shape}")
    return x


def joint_logpdf(x, model: MvParetoModel):
    x = _check_dim(x, model)
    a, b, n = model.alpha, model.beta, model.n
    s = np.sum(np.maximum(x, 0.0), axis=-1)
    logf = (
        specfun.log_gamma(a + n) - specfun.log_gamma(a) - n * np.log(b)
        - (a + n) * np.log1p(s / b)
    )
    out = np.where(np.any(x < 0, axis=-1), -np.inf, logf)
    return float(out) if np.ndim(out) == 0 else out


def joint_pdf(x, model: MvParetoModel):
    """``Γ(alpha+n) / (Γ(alpha) beta^n) * (1 + Σx_i/beta)^-(alpha+n)``."""
    out = np.exp(joint_logpdf(x, model))
    return float(out) if np.ndim(out) == 0 else out


def joint_survival(x, model: MvParetoModel):
    """``P(X_1 > x_1, ..., X_n > x_n) = (1 + Σx_i/beta)^-alpha``."""
    x = _check_dim(x, model)
    if np.any(x < 0):
        raise DomainError("joint_survival requires nonnegative coordinates")
    out = np.exp(-model.alpha * np.log1p(np.sum(x, axis=-1) / model.beta))
    return float(out) if np.ndim(out) == 0 else out


def clayton_copula(u, alpha: float):
    """Survival copula of the vector: ``(Σ u_i^(-1/alpha) - n + 1)^-alpha``."""
    _positive("alpha", alpha)
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u <= 1))):
        raise DomainError("copula arguments must lie in (0, 1]")
    n = u.shape[-1]
    s = np.sum(np.power(u, -1.0 / alpha), axis=-1) - n + 1.0
    out = np.power(s, -alpha)
    return float(out) if np.ndim(out) == 0 else out


def cross_moment(r, model: MvParetoModel):
    """``E[Π X_i^r_i] = Γ(alpha - A)/Γ(alpha) Π beta^r_i Γ(1 + r_i)``, ``A = Σ r_i``."""
    r = np.asarray(r, dtype=float)
    if r.shape != (model.n,):
        raise ValueError(f"expected {model.n} exponents, got shape {r.shape}")
    if np.any(r < 0):
        raise DomainError("exponents must be nonnegative")
    total = float(r.sum())
    if not total < model.alpha:
        raise MomentDoesNotExistError(
            f"cross moment of total order {total} needs alpha > {total}"
        )
    log_m = (
        specfun.log_gamma(model.alpha - total) - specfun.log_gamma(model.alpha)
        + total * np.log(model.beta) + float(np.sum(specfun.log_gamma(1.0 + r)))
    )
    return float(np.exp(log_m))


def _require_alpha_above_two(alpha):
    if not alpha > 2:
        raise MomentDoesNotExistError(f"second moments need alpha > 2, got {alpha}")


def marginal_mean(alpha: float, beta: float) -> float:
    if not alpha > 1:
        raise MomentDoesNotExistError(f"the mean needs alpha > 1, got {alpha}")
    return beta / (alpha - 1.0)


def marginal_variance(alpha: float, beta: float) -> float:
    _require_alpha_above_two(alpha)
    return alpha * beta**2 / ((alpha - 1.0) ** 2 * (alpha - 2.0))


def pair_covariance(model: MvParetoModel) -> float:
    """``cov(X_i, X_j) = beta^2 / ((alpha-1)^2 (alpha-2))`` for ``i != j``."""
    _require_alpha_above_two(model.alpha)
    a = model.alpha
    return model.beta**2 / ((a - 1.0) ** 2 * (a - 2.0))


def pair_correlation(model: MvParetoModel) -> float:
    _require_alpha_above_two(model.alpha)
    return 1.0 / model.alpha
