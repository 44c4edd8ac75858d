"""Special functions used by the closed-form loss distributions.

Gamma/beta functions and the regularized incomplete beta are thin, validated
wrappers around :mod:`math` and :mod:`scipy.special`. The hypergeometric
series and the modified Bessel function are summed here, term by term, under
an explicit :class:`SeriesPolicy`, so that truncation is controlled and
reported rather than hidden.

All functions broadcast over NumPy arrays and return a Python ``float`` for
scalar input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .exceptions import ConvergenceError, DomainError

__all__ = [
    "SeriesPolicy",
    "DEFAULT_POLICY",
    "log_gamma",
    "log_beta",
    "reg_inc_beta",
    "reg_inc_beta_complement",
    "inv_reg_inc_beta",
    "kummer_1f1",
    "gauss_2f1",
    "bessel_i",
]


@dataclass(frozen=True)
class SeriesPolicy:
    """Truncation rule for power series.

    Summation stops once a term is no larger than its predecessor and its
    magnitude is below ``rel_tol * |partial sum| + abs_tol``, or raises
    :class:`ConvergenceError` after ``max_terms`` terms.
    """

    max_terms: int = 200
    rel_tol: float = 1e-14
    abs_tol: float = 1e-300

    def __post_init__(self):
        if int(self.max_terms) < 1:
            raise ValueError("max_terms must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.abs_tol < 0:
            raise ValueError("abs_tol must be >= 0")


DEFAULT_POLICY = SeriesPolicy()


def _out(arr):
    arr = np.asarray(arr, dtype=float)
    return float(arr) if arr.ndim == 0 else arr


def log_gamma(x):
    """Natural log of the gamma function for positive arguments."""
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise DomainError("log_gamma requires finite x > 0")
    if x.ndim == 0:
        return math.lgamma(float(x))
    return special.gammaln(x)


def log_beta(p, q):
    """``ln B(p, q) = ln Γ(p) + ln Γ(q) - ln Γ(p + q)``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(~(p > 0)) or np.any(~(q > 0)):
        raise DomainError("log_beta requires p > 0 and q > 0")
    return _out(log_gamma(p) + log_gamma(q) - log_gamma(p + q))


def _check_beta_args(z, p, q):
    z = np.asarray(z, dtype=float)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(~(p > 0)) or np.any(~(q > 0)):
        raise DomainError("incomplete beta requires p > 0 and q > 0")
    if np.any(~((z >= 0) & (z <= 1))):
        raise DomainError("incomplete beta requires 0 <= z <= 1")
    return z, p, q


def reg_inc_beta(z, p, q):
    """Regularized incomplete beta ratio ``I_z(p, q)``.

    This is the CDF of a first-kind Beta(p, q) variable at ``z``.
    """
    z, p, q = _check_beta_args(z, p, q)
    return _out(special.betainc(p, q, z))


def reg_inc_beta_complement(z, p, q):
    """``1 - I_z(p, q)`` evaluated without cancellation."""
    z, p, q = _check_beta_args(z, p, q)
    return _out(special.betaincc(p, q, z))


def inv_reg_inc_beta(u, p, q):
    """Solve ``I_z(p, q) = u`` for ``z``.

    Starts from the Boost-backed inverse in SciPy and applies a single
    safeguarded Newton correction, kept only when it lowers the residual.
    """
    u = np.asarray(u, dtype=float)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise DomainError("inv_reg_inc_beta requires 0 < u < 1")
    if np.any(~(p > 0)) or np.any(~(q > 0)):
        raise DomainError("inv_reg_inc_beta requires p > 0 and q > 0")

    z = special.betaincinv(p, q, u)
    resid = special.betainc(p, q, z) - u
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        log_dens = (
            (p - 1) * np.log(z) + (q - 1) * np.log1p(-z)
            - (special.gammaln(p) + special.gammaln(q) - special.gammaln(p + q))
        )
        step = resid / np.exp(log_dens)
        z_new = z - step
    ok = np.isfinite(z_new) & (z_new > 0) & (z_new < 1)
    z_new = np.where(ok, z_new, z)
    resid_new = special.betainc(p, q, z_new) - u
    z = np.where(np.abs(resid_new) < np.abs(resid), z_new, z)
    return _out(z)


def _sum_series(first, ratio, policy, name):
    """Sum ``first * prod(ratio(k))`` terms until the policy says stop.

    ``ratio(k)`` returns ``term_{k+1} / term_k`` (vectorized). Summation is
    carried out in a fixed order so results are bit-reproducible.
    """
    term = np.array(first, dtype=float, copy=True)
    total = term.copy()
    done = np.zeros(term.shape, dtype=bool)
    done |= term == 0.0
    prev = np.abs(term)
    for k in range(policy.max_terms - 1):
        if done.all():
            return total
        term = np.where(done, 0.0, term * ratio(k))
        total = total + term
        mag = np.abs(term)
        done |= (mag <= policy.rel_tol * np.abs(total) + policy.abs_tol) & (mag <= prev)
        prev = mag
    if not done.all():
        raise ConvergenceError(
            f"{name} series did not converge in {policy.max_terms} terms",
            partial_sum=_out(total),
            last_term=_out(np.abs(term)),
        )
    return total


def _nonpositive_integer(c):
    return np.any((c <= 0) & (c == np.floor(c)))


def kummer_1f1(a, b, z, policy: SeriesPolicy = DEFAULT_POLICY):
    """Kummer's confluent hypergeometric function ``1F1(a; b; z)``.

    Sums ``Σ (a)_n z^n / ((b)_n n!)`` with rising factorials. Negative
    arguments go through Kummer's transformation
    ``1F1(a; b; z) = e^z 1F1(b - a; b; -z)`` to avoid cancellation.
    """
    a, b, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, z)))
    if _nonpositive_integer(b):
        raise DomainError("1F1 undefined for non-positive integer b")
    if np.any(~np.isfinite(z)):
        raise DomainError("1F1 requires finite z")

    neg = z < 0
    a_eff = np.where(neg, b - a, a)
    z_eff = np.abs(z)

    def ratio(k):
        return (a_eff + k) * z_eff / ((b + k) * (k + 1))

    total = _sum_series(np.ones_like(z_eff), ratio, policy, "1F1")
    return _out(np.where(neg, np.exp(z) * total, total))


def gauss_2f1(a, b, c, z, policy: SeriesPolicy = DEFAULT_POLICY):
    """Gauss hypergeometric function ``2F1(a, b; c; z)`` for ``|z| < 1``.

    When ``c - a`` or ``c - b`` is a non-positive integer, Euler's
    transformation ``(1 - z)^(c-a-b) 2F1(c-a, c-b; c; z)`` turns the series
    into a polynomial and is used instead.
    """
    a, b, c, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c, z)))
    if np.any(~(np.abs(z) < 1)):
        raise DomainError("2F1 series requires |z| < 1")
    if _nonpositive_integer(c):
        raise DomainError("2F1 undefined for non-positive integer c")

    ca, cb = c - a, c - b
    euler = ((ca <= 0) & (ca == np.floor(ca))) | ((cb <= 0) & (cb == np.floor(cb)))
    a_eff = np.where(euler, ca, a)
    b_eff = np.where(euler, cb, b)

    def ratio(k):
        return (a_eff + k) * (b_eff + k) * z / ((c + k) * (k + 1))

    total = _sum_series(np.ones_like(z), ratio, policy, "2F1")
    with np.errstate(divide="ignore"):
        prefactor = np.where(euler, np.power(1.0 - z, np.where(euler, c - a - b, 0.0)), 1.0)
    return _out(prefactor * total)


def bessel_i(nu, z, policy: SeriesPolicy = DEFAULT_POLICY):
    """Modified Bessel function of the first kind ``I_nu(z)`` for ``z >= 0``."""
    nu, z = np.broadcast_arrays(np.asarray(nu, dtype=float), np.asarray(z, dtype=float))
    if np.any(~(z >= 0)) or np.any(~np.isfinite(z)):
        raise DomainError("bessel_i requires finite z >= 0")
    if np.any(~(nu >= 0)):
        raise DomainError("bessel_i requires nu >= 0")

    half = z / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        log_first = nu * np.log(half) - special.gammaln(nu + 1.0)
    first = np.where(half > 0, np.exp(log_first), np.where(nu == 0, 1.0, 0.0))
    quarter_sq = half * half

    def ratio(k):
        return quarter_sq / ((k + 1.0) * (nu + k + 1.0))

    return _out(_sum_series(first, ratio, policy, "Bessel I"))
