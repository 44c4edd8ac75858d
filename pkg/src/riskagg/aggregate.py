"""Individual risk model: the sum of ``n`` dependent Pareto claims.

``S_n = X_1 + ... + X_n = beta * Ga(n) / Ga(alpha)`` is second-kind beta
``B2(n, alpha, beta)``, so distribution functions and risk measures reduce to
incomplete beta computations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import specfun, univariate
from .exceptions import DomainError, MomentDoesNotExistError
from .mvpareto import MvParetoModel, sample_vector
from .univariate import Beta2Params, _positive

# Above this level the beta quantile is too close to 1 to map back reliably.
MAX_LEVEL = 1.0 - 1e-12


@dataclass(frozen=True)
class AggregateModel:
    n: int
    alpha: float
    beta: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        _positive("alpha", self.alpha)
        _positive("beta", self.beta)


def aggregate_distribution(model: AggregateModel) -> Beta2Params:
    return Beta2Params(p=float(model.n), q=model.alpha, beta=model.beta)


def pdf(x, model: AggregateModel):
    return univariate.beta2_pdf(x, aggregate_distribution(model))


def cdf(x, model: AggregateModel):
    return univariate.beta2_cdf(x, aggregate_distribution(model))


def sf(x, model: AggregateModel):
    return univariate.beta2_sf(x, aggregate_distribution(model))


def _check_level(u):
    u = np.asarray(u, dtype=float)
    if np.any(~(u > 0)) or np.any(~(u < 1)):
        raise DomainError("level u must lie in (0, 1)")
    if np.any(u > MAX_LEVEL):
        raise DomainError(f"level u > {MAX_LEVEL!r} is numerically out of range")
    return u


def value_at_risk(model: AggregateModel, u):
    """``VaR(u) = beta * w / (1 - w)`` where ``w = I^{-1}(u; n, alpha)``."""
    u = _check_level(u)
    return univariate.beta2_quantile(u, aggregate_distribution(model))


def conditional_tail_moment(model: AggregateModel, r: float, u):
    """``E[S^r | S > VaR(u)]``.

    Uses the incomplete-moment identity for the second-kind beta law,
    ``E[X^r; X > x] = E[X^r] * (1 - I_z(p + r, q - r))`` with
    ``z = x / (beta + x)``, where ``I`` is the *regularized* incomplete beta.
    """
    if not r < model.alpha:
        raise MomentDoesNotExistError(
            f"tail moment of order {r} needs alpha > {r}, got {model.alpha}"
        )
    u = _check_level(u)
    law = aggregate_distribution(model)
    if not r > -law.p:
        raise MomentDoesNotExistError(f"tail moment of order {r} needs r > -n")
    x_u = np.asarray(value_at_risk(model, u))
    z = x_u / (model.beta + x_u)
    upper = np.asarray(specfun.reg_inc_beta_complement(z, law.p + r, law.q - r))
    out = univariate.beta2_raw_moment(r, law) * upper / (1.0 - u)
    return float(out) if np.ndim(out) == 0 else out


def tail_value_at_risk(model: AggregateModel, u):
    """Expected loss beyond the VaR at level ``u``; requires ``alpha > 1``."""
    if not model.alpha > 1:
        raise MomentDoesNotExistError(f"TVaR needs alpha > 1, got {model.alpha}")
    return conditional_tail_moment(model, 1.0, u)


def sample_sum(model: AggregateModel, rng: np.random.Generator, size=None):
    """Monte Carlo draws of ``S_n`` by summing dependent claim vectors."""
    x = sample_vector(MvParetoModel(model.alpha, model.beta, model.n), rng, size)
    return np.sum(x, axis=-1)
