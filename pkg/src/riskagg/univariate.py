"""Pareto (Lomax), unit-scale gamma and second-kind beta laws.

The second-kind beta ``B2(p, q, beta)`` is the law of ``beta * U_p / U_q``
for independent gammas; it reduces to ``Pareto(q, beta)`` at ``p = 1`` and
is the law of a sum of dependent Pareto claims (see :mod:`riskagg.aggregate`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import specfun
from .exceptions import DomainError, MomentDoesNotExistError


def _positive(name, value):
    if not (np.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class ParetoParams:
    """Pareto type II with survival ``(1 + x/beta)^-alpha``."""

    alpha: float
    beta: float

    def __post_init__(self):
        _positive("alpha", self.alpha)
        _positive("beta", self.beta)


@dataclass(frozen=True)
class GammaShape:
    """Gamma law with unit scale and shape ``alpha``."""

    alpha: float

    def __post_init__(self):
        _positive("alpha", self.alpha)


@dataclass(frozen=True)
class Beta2Params:
    """Second-kind beta (Pearson VI) law with shapes ``p, q`` and scale ``beta``."""

    p: float
    q: float
    beta: float

    def __post_init__(self):
        _positive("p", self.p)
        _positive("q", self.q)
        _positive("beta", self.beta)


def _out(arr):
    arr = np.asarray(arr, dtype=float)
    return float(arr) if arr.ndim == 0 else arr


def _check_level(u):
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise DomainError("probability level must lie in (0, 1)")
    return u


# -- Pareto -----------------------------------------------------------------

def pareto_pdf(x, params: ParetoParams):
    """Density ``alpha / (beta (1 + x/beta)^(alpha+1))``; right limit at 0."""
    x = np.asarray(x, dtype=float)
    a, b = params.alpha, params.beta
    with np.errstate(invalid="ignore"):
        dens = a / (b * np.power(1.0 + np.maximum(x, 0.0) / b, a + 1.0))
    return _out(np.where(x < 0, 0.0, dens))


def pareto_cdf(x, params: ParetoParams):
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    return _out(-np.expm1(-params.alpha * np.log1p(x / params.beta)))


def pareto_sf(x, params: ParetoParams):
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    return _out(np.exp(-params.alpha * np.log1p(x / params.beta)))


def pareto_quantile(u, params: ParetoParams):
    u = _check_level(u)
    return _out(params.beta * np.expm1(-np.log1p(-u) / params.alpha))


# -- second-kind beta ---------------------------------------------------------

def beta2_logpdf(x, params: Beta2Params):
    x = np.asarray(x, dtype=float)
    p, q, b = params.p, params.q, params.beta
    xp = np.where(x > 0, x, 1.0)
    logf = (
        (p - 1.0) * np.log(xp) - p * np.log(b) - specfun.log_beta(p, q)
        - (p + q) * np.log1p(xp / b)
    )
    if p > 1:
        at_zero = -np.inf
    elif p == 1:
        at_zero = np.log(q / b)
    else:
        at_zero = np.inf
    logf = np.where(x > 0, logf, np.where(x == 0, at_zero, -np.inf))
    return _out(logf)


def beta2_pdf(x, params: Beta2Params):
    """Density ``x^(p-1) / (beta^p B(p,q) (1 + x/beta)^(p+q))``.

    At ``x = 0`` the right limit is returned: 0 for ``p > 1``, ``q/beta`` for
    ``p = 1`` and ``+inf`` for ``p < 1``.
    """
    return _out(np.exp(beta2_logpdf(x, params)))


def _ratio_arg(x, beta):
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    return x / (beta + x)


def beta2_cdf(x, params: Beta2Params):
    return specfun.reg_inc_beta(_ratio_arg(x, params.beta), params.p, params.q)


def beta2_sf(x, params: Beta2Params):
    return specfun.reg_inc_beta_complement(_ratio_arg(x, params.beta), params.p, params.q)


def beta2_quantile(u, params: Beta2Params):
    """``beta * w / (1 - w)`` with ``w`` the Beta(p, q) quantile of ``u``."""
    u = _check_level(u)
    w = np.asarray(specfun.inv_reg_inc_beta(u, params.p, params.q))
    return _out(params.beta * w / (1.0 - w))


def beta2_raw_moment(r, params: Beta2Params):
    """``E[X^r] = beta^r Γ(p+r) Γ(q-r) / (Γ(p) Γ(q))`` for ``-p < r < q``."""
    p, q, b = params.p, params.q, params.beta
    if not r < q:
        raise MomentDoesNotExistError(f"E[X^{r}] is infinite when r >= q = {q}")
    if not r > -p:
        raise MomentDoesNotExistError(f"E[X^{r}] is infinite when r <= -p = {-p}")
    return float(np.exp(
        r * np.log(b) + specfun.log_gamma(p + r) + specfun.log_gamma(q - r)
        - specfun.log_gamma(p) - specfun.log_gamma(q)
    ))


# -- sampling -----------------------------------------------------------------

def sample_gamma(shape: GammaShape, rng: np.random.Generator, size=None):
    """Unit-scale gamma draws from ``rng`` (Marsaglia-Tsang in NumPy)."""
    return rng.standard_gamma(shape.alpha, size=size)


def sample_pareto(params: ParetoParams, rng: np.random.Generator, size=None):
    """Pareto draws as the gamma ratio ``beta * U_1 / U_alpha``.

    The numerator is drawn before the denominator; this order is part of the
    reproducibility contract for a given seed.
    """
    u1 = sample_gamma(GammaShape(1.0), rng, size)
    ua = sample_gamma(GammaShape(params.alpha), rng, size)
    return params.beta * u1 / ua
