"""Collective risk model with dependent claims.

``S_N = X_1 + ... + X_N`` where the claim count ``N`` (primary law) is
independent of the claims, and the claims are either the dependent Pareto
vector of :mod:`riskagg.mvpareto` or independent exponentials. ``S_N`` has an
atom ``P(N = 0)`` at zero plus a density on ``(0, inf)``.

Every distribution function has a generic path summing
``Σ_n P(N = n) F^{(n)}(x)`` over the law of the n-claim sum (second-kind beta
for dependent Pareto, gamma for exponential), and the densities additionally
have closed forms for the seven supported primary/secondary pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Union

import numpy as np
from scipy import special

from . import specfun
from .exceptions import DomainError, MomentDoesNotExistError
from .mvpareto import marginal_mean, marginal_variance
from .specfun import SeriesPolicy
from .univariate import _positive

# Pareto-Poisson/-NB arguments approach 1 for small p or large lambda; allow
# long (early-exiting) sums there.
HYPERGEOMETRIC_POLICY = SeriesPolicy(max_terms=20_000)

SERIES_TOL = 1e-12
MAX_SERIES_TERMS = 100_000


def _unit_interval(name, value):
    if not (0 < value < 1):
        raise DomainError(f"{name} must lie in (0, 1), got {value!r}")


# -- primary laws -----------------------------------------------------------

@dataclass(frozen=True)
class Poisson:
    lam: float
    name = "poisson"

    def __post_init__(self):
        _positive("lam", self.lam)

    def logpmf(self, n):
        n = np.asarray(n, dtype=float)
        return n * np.log(self.lam) - self.lam - special.gammaln(n + 1)

    def mean(self):
        return self.lam

    def variance(self):
        return self.lam

    def factorial_moment2(self):
        return self.lam**2

    def sample(self, rng, size=None):
        return rng.poisson(self.lam, size)


@dataclass(frozen=True)
class NegBinomial:
    """``P(N = n) = Γ(n+r)/(Γ(n+1)Γ(r)) p^r (1-p)^n``, ``n >= 0``."""

    r: float
    p: float
    name = "negbin"

    def __post_init__(self):
        _positive("r", self.r)
        _unit_interval("p", self.p)

    def logpmf(self, n):
        n = np.asarray(n, dtype=float)
        r, p = self.r, self.p
        return (
            special.gammaln(n + r) - special.gammaln(n + 1) - special.gammaln(r)
            + r * np.log(p) + n * np.log1p(-p)
        )

    def mean(self):
        return self.r * (1 - self.p) / self.p

    def variance(self):
        return self.r * (1 - self.p) / self.p**2

    def factorial_moment2(self):
        return self.r * (self.r + 1) * (1 - self.p) ** 2 / self.p**2

    def sample(self, rng, size=None):
        return rng.negative_binomial(self.r, self.p, size)


@dataclass(frozen=True)
class Geometric:
    """``P(N = n) = p (1-p)^n``, ``n >= 0``."""

    p: float
    name = "geometric"

    def __post_init__(self):
        _unit_interval("p", self.p)

    def logpmf(self, n):
        n = np.asarray(n, dtype=float)
        return np.log(self.p) + n * np.log1p(-self.p)

    def mean(self):
        return (1 - self.p) / self.p

    def variance(self):
        return (1 - self.p) / self.p**2

    def factorial_moment2(self):
        return 2 * (1 - self.p) ** 2 / self.p**2

    def sample(self, rng, size=None):
        return rng.geometric(self.p, size) - 1


@dataclass(frozen=True)
class Logarithmic:
    """``P(N = n) = -θ^n / (n log(1-θ))``, ``n >= 1``."""

    theta: float
    name = "logarithmic"

    def __post_init__(self):
        _unit_interval("theta", self.theta)

    @property
    def a(self):
        return -1.0 / math.log1p(-self.theta)

    def logpmf(self, n):
        n = np.asarray(n, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.log(self.a) + n * np.log(self.theta) - np.log(n)
        return np.where(n >= 1, out, -np.inf)

    def mean(self):
        return self.a * self.theta / (1 - self.theta)

    def variance(self):
        a, t = self.a, self.theta
        return a * t * (1 - a * t) / (1 - t) ** 2

    def factorial_moment2(self):
        return self.a * self.theta**2 / (1 - self.theta) ** 2

    def sample(self, rng, size=None):
        return rng.logseries(self.theta, size)


PrimaryLaw = Union[Poisson, NegBinomial, Geometric, Logarithmic]


# -- secondary laws ---------------------------------------------------------

@dataclass(frozen=True)
class DependentPareto:
    """Pareto claims sharing one gamma divisor; n-claim sums are B2(n, alpha, beta)."""

    alpha: float
    beta: float
    name = "pareto"

    def __post_init__(self):
        _positive("alpha", self.alpha)
        _positive("beta", self.beta)

    def conv_logpdf(self, n, x):
        a, b = self.alpha, self.beta
        return (
            (n - 1) * np.log(x) - n * np.log(b)
            - (special.gammaln(n) + special.gammaln(a) - special.gammaln(n + a))
            - (n + a) * np.log1p(x / b)
        )

    def conv_cdf(self, n, x):
        return special.betainc(n, self.alpha, x / (self.beta + x))

    def conv_sf(self, n, x):
        # 1 - I_z(n, a) == I_{1-z}(a, n); 1 - z = beta / (beta + x)
        return special.betainc(self.alpha, n, self.beta / (self.beta + x))

    def mean(self):
        return marginal_mean(self.alpha, self.beta)

    def variance(self):
        return marginal_variance(self.alpha, self.beta)

    def covariance(self):
        return self.beta**2 / ((self.alpha - 1) ** 2 * (self.alpha - 2))

    def sample_sums(self, counts, rng):
        """One dependent claim vector per entry of ``counts``, summed."""
        counts = np.asarray(counts, dtype=np.int64)
        claims = rng.standard_exponential(int(counts.sum()))
        divisor = rng.standard_gamma(self.alpha, counts.shape)
        return self.beta * _group_sums(claims, counts) / divisor


@dataclass(frozen=True)
class Exponential:
    """Independent exponential claims with rate ``alpha``."""

    alpha: float
    name = "exponential"

    def __post_init__(self):
        _positive("alpha", self.alpha)

    def conv_logpdf(self, n, x):
        a = self.alpha
        return n * np.log(a) + (n - 1) * np.log(x) - a * x - special.gammaln(n)

    def conv_cdf(self, n, x):
        return special.gammainc(n, self.alpha * x)

    def conv_sf(self, n, x):
        return special.gammaincc(n, self.alpha * x)

    def mean(self):
        return 1.0 / self.alpha

    def variance(self):
        return 1.0 / self.alpha**2

    def covariance(self):
        return 0.0

    def sample_sums(self, counts, rng):
        counts = np.asarray(counts, dtype=np.int64)
        claims = rng.standard_exponential(int(counts.sum()))
        return _group_sums(claims, counts) / self.alpha


SecondaryLaw = Union[DependentPareto, Exponential]


def _group_sums(values, counts):
    flat = counts.ravel()
    out = np.zeros(flat.shape, dtype=float)
    nz = flat > 0
    if nz.any():
        starts = np.concatenate(([0], np.cumsum(flat[nz])[:-1]))
        out[nz] = np.add.reduceat(values, starts)
    return out.reshape(counts.shape)


@dataclass(frozen=True)
class CompoundModel:
    primary: PrimaryLaw
    secondary: SecondaryLaw

    @property
    def family(self) -> str:
        return f"{self.primary.name}-{self.secondary.name}"

    def params(self) -> dict:
        out = {}
        for law in (self.primary, self.secondary):
            out.update({f.name: getattr(law, f.name) for f in fields(law)})
        return out


PRIMARY_LAWS = {cls.name: cls for cls in (Poisson, NegBinomial, Geometric, Logarithmic)}
SECONDARY_LAWS = {cls.name: cls for cls in (DependentPareto, Exponential)}

CLOSED_FORM_FAMILIES = (
    "poisson-pareto",
    "negbin-pareto",
    "geometric-pareto",
    "logarithmic-pareto",
    "poisson-exponential",
    "negbin-exponential",
    "geometric-exponential",
)
FAMILIES = CLOSED_FORM_FAMILIES + ("logarithmic-exponential",)


def family_param_names(family: str) -> tuple:
    prim, sec = _split_family(family)
    return tuple(f.name for f in fields(PRIMARY_LAWS[prim])) + tuple(
        f.name for f in fields(SECONDARY_LAWS[sec])
    )


def _split_family(family):
    try:
        prim, sec = family.split("-")
        PRIMARY_LAWS[prim], SECONDARY_LAWS[sec]
    except (ValueError, KeyError):
        raise ValueError(f"unknown model family {family!r}; choose from {FAMILIES}") from None
    return prim, sec


def make_model(family: str, params: dict) -> CompoundModel:
    """Build a :class:`CompoundModel` from a family name and a parameter map."""
    prim, sec = _split_family(family)
    names = family_param_names(family)
    missing = set(names) - set(params)
    extra = set(params) - set(names)
    if missing or extra:
        raise ValueError(
            f"{family} takes parameters {names}; missing {sorted(missing)}, "
            f"unexpected {sorted(extra)}"
        )
    pcls, scls = PRIMARY_LAWS[prim], SECONDARY_LAWS[sec]
    primary = pcls(**{f.name: float(params[f.name]) for f in fields(pcls)})
    secondary = scls(**{f.name: float(params[f.name]) for f in fields(scls)})
    return CompoundModel(primary, secondary)


# -- counting-law helpers -----------------------------------------------------

def primary_pmf(law: PrimaryLaw, n):
    """Probability ``P(N = n)``."""
    n = np.asarray(n)
    if np.any(n < 0) or np.any(n != np.floor(n)):
        raise DomainError("n must be a nonnegative integer")
    out = np.exp(law.logpmf(n))
    return float(out) if out.ndim == 0 else out


def truncation_point(law: PrimaryLaw, tol: float = SERIES_TOL, cap: int = MAX_SERIES_TERMS) -> int:
    """Smallest ``N*`` with ``P(N <= N*) >= 1 - tol`` (at most ``cap``)."""
    total = 0.0
    start = 0
    block = 64
    while start <= cap:
        n = np.arange(start, min(start + block, cap + 1))
        cum = total + np.cumsum(np.exp(law.logpmf(n)))
        hit = np.nonzero(cum >= 1.0 - tol)[0]
        if hit.size:
            return int(n[hit[0]])
        total = float(cum[-1])
        start = int(n[-1]) + 1
        block *= 2
    return cap


def compound_atom0(model: CompoundModel) -> float:
    """Mass of ``S_N`` at zero, ``P(N = 0)``."""
    return float(np.exp(model.primary.logpmf(0)))


# -- generic convolution series ---------------------------------------------

_CHUNK = 65_536


def _positive_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("density is defined for x > 0; use compound_atom0 for the mass at 0")
    return x


# Stop once the newest term is this small relative to the running sum.
_TERM_RTOL = 1e-17


def _series_blocks(model, tol):
    """Yield ``(n, log_weight)`` blocks, starting with all ``n <= N*``."""
    start = 1
    block = max(truncation_point(model.primary, tol), 16)
    while start <= MAX_SERIES_TERMS:
        stop = min(start + block, MAX_SERIES_TERMS + 1)
        n = np.arange(start, stop, dtype=float)[:, None]
        yield n, model.primary.logpmf(n)
        start = stop
        block *= 2


def _log_series(model, x, log_component, tol):
    """``log Σ_{n>=1} P(N=n) c_n(x)`` for a log-space component ``c_n``.

    All ``n`` up to the pmf truncation point are always included; further
    blocks are added while the terms are still increasing or non-negligible
    for some ``x``.
    """
    flat = x.ravel()
    out = np.empty(flat.shape)
    for s in range(0, flat.size, _CHUNK):
        xs = flat[s:s + _CHUNK][None, :]
        running = np.full(xs.shape[1], -np.inf)
        for n, log_w in _series_blocks(model, tol):
            terms = log_w + log_component(n, xs)
            running = np.logaddexp(running, special.logsumexp(terms, axis=0))
            last = terms[-1]
            prev = terms[-2] if len(terms) > 1 else terms[-1]
            with np.errstate(invalid="ignore"):
                small = (last <= running + np.log(_TERM_RTOL)) | (last == -np.inf)
            if np.all(small & ((last <= prev) | (last == -np.inf))):
                break
        out[s:s + _CHUNK] = running
    return out.reshape(x.shape)


def compound_logpdf_series(model: CompoundModel, x, tol: float = SERIES_TOL):
    """``log Σ_{n>=1} P(N=n) f^{(n)}(x)`` with terms combined in log space."""
    x = _positive_x(x)
    out = _log_series(model, x, model.secondary.conv_logpdf, tol)
    return float(out) if out.ndim == 0 else out


def compound_pdf_series(model: CompoundModel, x, tol: float = SERIES_TOL):
    out = np.exp(compound_logpdf_series(model, x, tol))
    return float(out) if np.ndim(out) == 0 else out


def _log_conv_sf(secondary):
    def log_sf(n, x):
        with np.errstate(divide="ignore"):
            return np.log(secondary.conv_sf(n, x))
    return log_sf


def _log_conv_cdf(secondary):
    def log_cdf(n, x):
        with np.errstate(divide="ignore"):
            return np.log(secondary.conv_cdf(n, x))
    return log_cdf


def compound_sf(model: CompoundModel, x, tol: float = SERIES_TOL):
    """``P(S_N > x) = Σ_{n>=1} P(N=n) (1 - F^{(n)}(x))``.

    Each ``1 - F^{(n)}`` is evaluated directly as an upper incomplete
    function, so small tail probabilities carry no cancellation error.
    """
    x = np.asarray(x, dtype=float)
    if np.any(~(x >= 0)):
        raise DomainError("compound_sf requires x >= 0")
    safe = np.where(x > 0, x, 1.0)
    out = np.exp(_log_series(model, safe, _log_conv_sf(model.secondary), tol))
    out = np.where(x > 0, out, 1.0 - compound_atom0(model))
    return float(out) if out.ndim == 0 else out


def compound_cdf(model: CompoundModel, x, tol: float = SERIES_TOL):
    """``P(S_N <= x) = P(N=0) + Σ_{n>=1} P(N=n) F^{(n)}(x)``."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x >= 0)):
        raise DomainError("compound_cdf requires x >= 0")
    safe = np.where(x > 0, x, 1.0)
    out = np.exp(_log_series(model, safe, _log_conv_cdf(model.secondary), tol))
    out = compound_atom0(model) + np.where(x > 0, out, 0.0)
    return float(out) if out.ndim == 0 else out


# -- closed-form densities --------------------------------------------------

def _log_diff_exp(a, b):
    """``log(e^a - e^b)`` for ``a > b``."""
    return a + np.log(-np.expm1(b - a))


def compound_logpdf_closed(model: CompoundModel, x, policy: SeriesPolicy = HYPERGEOMETRIC_POLICY):
    """Log of the closed-form continuous density for ``x > 0``."""
    x = _positive_x(x)
    prim, sec = model.primary, model.secondary
    family = model.family
    if isinstance(sec, DependentPareto):
        a, b = sec.alpha, sec.beta
        ratio = x / (b + x)
        if family == "poisson-pareto":
            lam = prim.lam
            out = (
                np.log(a * lam) - lam - np.log(b) - (a + 1) * np.log1p(x / b)
                + np.log(specfun.kummer_1f1(1 + a, 2.0, lam * ratio, policy))
            )
        elif family == "negbin-pareto":
            r, p = prim.r, prim.p
            out = (
                np.log(r * a) + np.log1p(-p) + r * np.log(p) - np.log(b)
                - (a + 1) * np.log1p(x / b)
                + np.log(specfun.gauss_2f1(1 + r, 1 + a, 2.0, (1 - p) * ratio, policy))
            )
        elif family == "geometric-pareto":
            p = prim.p
            out = np.log(a * p) + np.log1p(-p) - np.log(b) - (a + 1) * np.log1p(p * x / b)
        elif family == "logarithmic-pareto":
            t = prim.theta
            hi = -a * np.log1p((1 - t) * x / b)
            lo = -a * np.log1p(x / b)
            out = np.log(prim.a) - np.log(x) + _log_diff_exp(hi, lo)
        else:
            raise ValueError(f"no closed form for {family}")
    else:
        a = sec.alpha
        if family == "poisson-exponential":
            lam = prim.lam
            out = (
                0.5 * np.log(lam * a / x) - lam - a * x
                + np.log(specfun.bessel_i(1.0, 2.0 * np.sqrt(lam * a * x), policy))
            )
        elif family == "negbin-exponential":
            r, p = prim.r, prim.p
            out = (
                np.log(a * r) + r * np.log(p) + np.log1p(-p) - a * x
                + np.log(specfun.kummer_1f1(1 + r, 2.0, a * (1 - p) * x, policy))
            )
        elif family == "geometric-exponential":
            p = prim.p
            out = np.log(a * p) + np.log1p(-p) - a * p * x
        else:
            raise ValueError(f"no closed form for {family}")
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def compound_logpdf(model: CompoundModel, x, method: str = "auto"):
    """Log density of the continuous part of ``S_N`` at ``x > 0``.

    ``method`` is ``"closed"``, ``"series"`` or ``"auto"`` (closed form when
    one exists, otherwise the convolution series).
    """
    if method == "auto":
        method = "closed" if model.family in CLOSED_FORM_FAMILIES else "series"
    if method == "closed":
        return compound_logpdf_closed(model, x)
    if method == "series":
        return compound_logpdf_series(model, x)
    raise ValueError(f"unknown method {method!r}")


def compound_pdf(model: CompoundModel, x, method: str = "auto"):
    """Density of the continuous part of ``S_N`` at ``x > 0`` (the atom excluded)."""
    out = np.exp(compound_logpdf(model, x, method))
    return float(out) if np.ndim(out) == 0 else out


def geometric_closed_sf(model: CompoundModel, x):
    """Closed survival for geometric counts.

    Pareto claims give ``(1-p)(1 + p x/beta)^-alpha``; exponential claims
    give ``(1-p) exp(-alpha p x)``.
    """
    if not isinstance(model.primary, Geometric):
        raise ValueError("closed survival is only available for geometric counts")
    x = np.asarray(x, dtype=float)
    if np.any(~(x >= 0)):
        raise DomainError("x must be >= 0")
    p, sec = model.primary.p, model.secondary
    if isinstance(sec, DependentPareto):
        out = (1 - p) * np.exp(-sec.alpha * np.log1p(p * x / sec.beta))
    else:
        out = (1 - p) * np.exp(-sec.alpha * p * x)
    return float(out) if out.ndim == 0 else out


# -- moments --------------------------------------------------------------------

def compound_mean(model: CompoundModel) -> float:
    """``E(S_N) = E(N) E(X)``."""
    return model.primary.mean() * model.secondary.mean()


def compound_variance(model: CompoundModel, dependent: bool = True) -> float:
    """``E(N) var(X) + var(N) E(X)^2 + E[N(N-1)] cov(X_i, X_j)``.

    With ``dependent=False`` the covariance term is dropped, giving the
    variance of the same compound with independent claims.
    """
    prim, sec = model.primary, model.secondary
    ex = sec.mean()
    var = prim.mean() * sec.variance() + prim.variance() * ex**2
    if dependent:
        var += prim.factorial_moment2() * sec.covariance()
    return var


def closed_form_moments(model: CompoundModel) -> tuple:
    """Family-specific ``(mean, variance)`` expressions.

    Raises :class:`MomentDoesNotExistError` when a moment is infinite and
    ``ValueError`` for the logarithmic-exponential pair, which has none.
    """
    prim, sec = model.primary, model.secondary
    family = model.family
    if isinstance(sec, DependentPareto):
        a, b = sec.alpha, sec.beta
        if not a > 1:
            raise MomentDoesNotExistError(f"the mean needs alpha > 1, got {a}")
        if family == "poisson-pareto":
            lam = prim.lam
            mean = lam * b / (a - 1)
            var_num = lam * b**2 * (lam + 2 * a - 2)
            var_den = 1.0
        elif family in ("negbin-pareto", "geometric-pareto"):
            r = prim.r if family == "negbin-pareto" else 1.0
            p = prim.p
            mean = r * (1 - p) * b / (p * (a - 1))
            var_num = r * (1 - p) * b**2 * ((1 + p) * (a - 1) + r * (1 - p))
            var_den = p**2
        elif family == "logarithmic-pareto":
            t, c = prim.theta, prim.a
            mean = c * b * t / ((a - 1) * (1 - t))
            var_num = c * b**2 * t * (2 * (a - 1) - a * t * (1 + c) + t * (1 + 2 * c))
            var_den = (1 - t) ** 2
        else:
            raise ValueError(f"no closed-form moments for {family}")
        if not a > 2:
            return mean, math.inf
        return mean, var_num / (var_den * (a - 1) ** 2 * (a - 2))
    a = sec.alpha
    if family == "poisson-exponential":
        return prim.lam / a, 2 * prim.lam / a**2
    if family in ("negbin-exponential", "geometric-exponential"):
        r = prim.r if family == "negbin-exponential" else 1.0
        p = prim.p
        return r * (1 - p) / (p * a), r * (1 - p) * (1 + p) / (p**2 * a**2)
    raise ValueError(f"no closed-form moments for {family}")


# -- sampling ---------------------------------------------------------------------

def sample_compound(model: CompoundModel, rng: np.random.Generator, size=None):
    """Draw ``S_N``: a count from the primary law, then that many claims, summed.

    Pareto claims within one draw share a single gamma divisor, so each draw
    sums one dependent claim vector.
    """
    counts = np.asarray(model.primary.sample(rng, size))
    out = model.secondary.sample_sums(counts, rng)
    return float(out) if out.ndim == 0 else out
