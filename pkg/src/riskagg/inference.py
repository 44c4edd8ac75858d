"""Maximum-likelihood fitting and information-criterion ranking of compound models.

Each policy contributes one observation of the aggregate loss ``S_N``: a zero
total contributes ``log P(N = 0)`` and a positive total the log of the
continuous density. Likelihoods are maximized with Nelder-Mead over an
unconstrained parameterization (log for positive parameters, logit for
probabilities), restarted from moment-based seeds.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize
from scipy.special import expit, logit

from . import collective
from .collective import CompoundModel, family_param_names, make_model
from .data import ClaimDataset
from .exceptions import ConvergenceError, DatasetError, DomainError

logger = logging.getLogger(__name__)

PROBABILITY_PARAMS = frozenset({"p", "theta"})

# Table column order for reports and CSV rows.
REPORT_PARAMS = ("r", "p", "lam", "alpha", "beta")
EXTRA_PARAMS = ("theta",)

# Models fitted by ``--models all``: every closed-form family with a zero atom.
DEFAULT_FAMILIES = (
    "poisson-exponential",
    "geometric-exponential",
    "negbin-exponential",
    "poisson-pareto",
    "geometric-pareto",
    "negbin-pareto",
)


def _amounts(data) -> np.ndarray:
    if isinstance(data, ClaimDataset):
        return data.amounts
    x = np.asarray(data, dtype=float).ravel()
    if np.any(~np.isfinite(x)) or np.any(x < 0):
        raise DatasetError("amounts must be finite and nonnegative")
    return x


# -- likelihood ---------------------------------------------------------------

def log_likelihood(model: CompoundModel, data) -> float:
    """``n0 log P(N=0) + Σ_{x_i>0} log f(x_i)``.

    Returns ``-inf`` instead of raising when the model cannot produce the data
    (zeros under a zero-free count law) or a density evaluation breaks down,
    so that optimizers can probe freely.
    """
    x = _amounts(data)
    pos = x[x > 0]
    return _loglik_split(model, x.size - pos.size, pos)


def family_log_likelihood(family: str, params: dict, data) -> float:
    """:func:`log_likelihood` from raw parameters; ``-inf`` when they are out of domain."""
    model = _safe_model(family, params)
    return -math.inf if model is None else log_likelihood(model, data)


def geometric_pareto_loglik(alpha: float, beta: float, p: float, data) -> float:
    """Expanded Pareto-geometric log-likelihood.

    ``n0 log p + (n - n0)[log alpha + log p + log(1-p) + alpha log beta]
    - (alpha + 1) Σ_{x_i>0} log(beta + p x_i)``
    """
    x = _amounts(data)
    pos = x[x > 0]
    n0 = x.size - pos.size
    return float(
        n0 * np.log(p)
        + pos.size * (np.log(alpha) + np.log(p) + np.log1p(-p) + alpha * np.log(beta))
        - (alpha + 1) * np.sum(np.log(beta + p * pos))
    )


# -- parameter transforms -------------------------------------------------------

def _to_free(names, values):
    return np.array([
        logit(values[k]) if k in PROBABILITY_PARAMS else math.log(values[k]) for k in names
    ])


def _from_free(names, eta):
    return {
        k: float(expit(e)) if k in PROBABILITY_PARAMS else float(math.exp(e))
        for k, e in zip(names, eta)
    }


def _jacobian_diag(names, values):
    """``d(natural)/d(free)`` for each coordinate."""
    return np.array([
        values[k] * (1 - values[k]) if k in PROBABILITY_PARAMS else values[k] for k in names
    ])


def _safe_model(family, params):
    try:
        return make_model(family, params)
    except DomainError:
        return None


# -- moment seeds -------------------------------------------------------------

def moment_seed(family: str, data) -> dict:
    """Moment-matching starting values.

    The zero-atom probability fixes the count parameter (``r = 1`` for the
    negative binomial); the claim parameters then match the sample mean and,
    for Pareto claims, the sample variance via the compound moment formulas.
    Falls back to ``alpha = 2.5`` and ``beta`` = mean positive amount when the
    moments are inconsistent with a finite-variance Pareto compound.
    """
    x = _amounts(data)
    pos = x[x > 0]
    if pos.size == 0:
        raise DatasetError("moment seeds need at least one positive amount")
    prim_name, sec_name = family.split("-")
    eps = 1.0 / (2 * x.size)
    f0 = min(max((x.size - pos.size) / x.size, eps), 1 - eps)

    if prim_name == "poisson":
        prim = {"lam": -math.log(f0)}
    elif prim_name == "geometric":
        prim = {"p": f0}
    elif prim_name == "negbin":
        prim = {"r": 1.0, "p": f0}
    elif prim_name == "logarithmic":
        prim = {"theta": 0.5}
    else:
        raise ValueError(f"unknown family {family!r}")

    law = collective.PRIMARY_LAWS[prim_name](**prim)
    en, vn, fn2 = law.mean(), law.variance(), law.factorial_moment2()
    m, v = float(x.mean()), float(x.var())

    if sec_name == "exponential":
        return {**prim, "alpha": en / m}

    fallback = {**prim, "alpha": 2.5, "beta": float(pos.mean())}
    # Solve v = (m/EN)^2 [EN a + VN (a-2) + E[N(N-1)]] / (a-2) for a > 2.
    c = v * en**2 / m**2
    denom = c - vn - en
    if denom <= 0:
        return fallback
    alpha = (fn2 + 2 * (c - vn)) / denom
    if not (np.isfinite(alpha) and alpha > 2):
        return fallback
    return {**prim, "alpha": float(alpha), "beta": float(m * (alpha - 1) / en)}


# -- fitting --------------------------------------------------------------------

@dataclass
class FitResult:
    """Outcome of fitting one compound family to one dataset."""

    family: str
    estimates: dict
    std_errors: dict
    loglik: float
    n_obs: int
    converged: bool
    n_iter: int = 0
    grad_norm: float = math.nan
    se_reliable: bool = True
    messages: list = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.estimates)

    @property
    def aic(self) -> float:
        return -2.0 * self.loglik + 2.0 * self.k

    @property
    def caic(self) -> float:
        return -2.0 * self.loglik + (1.0 + math.log(self.n_obs)) * self.k

    @property
    def model(self) -> CompoundModel:
        return make_model(self.family, self.estimates)

    def to_report(self) -> str:
        """Flat ``key=value`` lines."""
        lines = [f"family={self.family}"]
        for k, v in self.estimates.items():
            lines.append(f"{k}={v:.10g}")
            se = self.std_errors.get(k)
            lines.append(f"{k}_se={'nan' if se is None else format(se, '.10g')}")
        lines += [
            f"loglik={self.loglik:.10g}",
            f"aic={self.aic:.10g}",
            f"caic={self.caic:.10g}",
            f"k={self.k}",
            f"n={self.n_obs}",
            f"converged={str(self.converged).lower()}",
            f"se_reliable={str(self.se_reliable).lower()}",
            f"iterations={self.n_iter}",
            f"grad_norm={self.grad_norm:.3g}",
        ]
        return "\n".join(lines)

    def to_row(self) -> dict:
        """CSV row: estimates in table order, then AIC/CAIC, then extras."""
        row = {"primary": self.family.split("-")[0], "secondary": self.family.split("-")[1]}
        for k in REPORT_PARAMS:
            row[k] = self.estimates.get(k, "")
        row["aic"] = self.aic
        row["caic"] = self.caic
        for k in EXTRA_PARAMS:
            row[k] = self.estimates.get(k, "")
        for k in REPORT_PARAMS + EXTRA_PARAMS:
            se = self.std_errors.get(k)
            row[f"{k}_se"] = "" if se is None else se
        row["loglik"] = self.loglik
        row["k"] = self.k
        row["n"] = self.n_obs
        row["converged"] = int(self.converged)
        return row


ROW_FIELDS = (
    ("primary", "secondary") + REPORT_PARAMS + ("aic", "caic") + EXTRA_PARAMS
    + tuple(f"{k}_se" for k in REPORT_PARAMS + EXTRA_PARAMS)
    + ("loglik", "k", "n", "converged")
)


def _hessian(f, x0, h):
    d = x0.size
    f0 = f(x0)
    H = np.empty((d, d))
    eye = np.eye(d) * h
    for i in range(d):
        H[i, i] = (f(x0 + eye[i]) - 2 * f0 + f(x0 - eye[i])) / h**2
        for j in range(i):
            H[i, j] = H[j, i] = (
                f(x0 + eye[i] + eye[j]) - f(x0 + eye[i] - eye[j])
                - f(x0 - eye[i] + eye[j]) + f(x0 - eye[i] - eye[j])
            ) / (4 * h**2)
    return H


def _free_std_errors(H):
    """Square roots of the diagonal of ``H^-1``; ``None`` when ``H`` is not invertible."""
    if not np.all(np.isfinite(H)):
        return None
    try:
        np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        return None
    var = np.diag(np.linalg.inv(H))
    if np.any(var <= 0):
        return None
    return np.sqrt(var)


def _gradient(f, x0, h=1e-5):
    g = np.empty_like(x0)
    for i in range(x0.size):
        e = np.zeros_like(x0)
        e[i] = h
        g[i] = (f(x0 + e) - f(x0 - e)) / (2 * h)
    return g


def _simplex_diameter(simplex):
    diffs = simplex[:, None, :] - simplex[None, :, :]
    return float(np.max(np.linalg.norm(diffs, axis=-1)))


def fit_mle(
    family: str,
    data,
    *,
    n_restarts: int = 4,
    random_state=0,
    seed: Optional[dict] = None,
    hessian_step: float = 1e-4,
    max_iter: Optional[int] = None,
    perturbation: float = 0.3,
) -> FitResult:
    """Fit ``family`` to policy totals by maximum likelihood.

    Parameters
    ----------
    family : str
        One of :data:`riskagg.collective.FAMILIES`, e.g. ``"poisson-pareto"``.
    data : ClaimDataset or array-like
        Per-policy aggregate amounts (zeros for claim-free policies).
    n_restarts : int
        Perturbed restarts in addition to the moment seed.
    random_state : int or Generator
        Controls the perturbations.
    seed : dict, optional
        Starting parameters; defaults to :func:`moment_seed`.
    hessian_step : float
        Finite-difference step for the observed information, on the free scale.

    Returns
    -------
    FitResult
        The best run. ``converged`` requires the final Nelder-Mead simplex to
        have diameter below ``1e-8`` on the free scale. Standard errors are
        ``None`` when the observed information is not positive definite, and
        ``se_reliable`` is false when steps ``h`` and ``2h`` disagree by more
        than 10%.
    """
    names = family_param_names(family)
    x = _amounts(data)
    if x.size == 0:
        raise DatasetError("cannot fit an empty dataset")
    if not np.any(x > 0):
        raise DatasetError("fitting needs at least one positive amount")
    rng = np.random.default_rng(random_state)
    start = dict(seed) if seed is not None else moment_seed(family, x)
    eta0 = _to_free(names, start)

    # Zeros enter only through their count; keeps evaluation cost ~ #positives.
    n = x.size
    pos = x[x > 0]
    n0 = n - pos.size

    def negll(eta):
        if not np.all(np.isfinite(eta)) or np.any(np.abs(eta) > 700):
            return math.inf
        model = _safe_model(family, _from_free(names, eta))
        if model is None:
            return math.inf
        ll = _loglik_split(model, n0, pos)
        return -ll if math.isfinite(ll) else math.inf

    scale = max(n, 1)
    options = {
        "xatol": 5e-9,
        "fatol": 1e-13,
        "maxiter": max_iter or 2000 * len(names),
        "maxfev": 4000 * len(names),
    }
    starts = [eta0] + [eta0 + rng.normal(0.0, perturbation, eta0.size) for _ in range(n_restarts)]
    runs = []
    for s in starts:
        if not math.isfinite(negll(s)):
            continue
        res = optimize.minimize(lambda e: negll(e) / scale, s, method="Nelder-Mead", options=options)
        # One restart from the optimum shakes out premature simplex collapse.
        res2 = optimize.minimize(lambda e: negll(e) / scale, res.x, method="Nelder-Mead", options=options)
        if res2.fun <= res.fun:
            res2.nit += res.nit
            res = res2
        runs.append(res)
    if not runs:
        raise DatasetError(f"no finite likelihood for {family} from any starting point")

    best = min(runs, key=lambda r: r.fun)
    diameter = _simplex_diameter(best.final_simplex[0])
    converged = bool(best.success) and diameter < 1e-8
    eta_hat = best.x
    est = _from_free(names, eta_hat)
    loglik = -negll(eta_hat)
    messages = []
    if not converged:
        messages.append(f"simplex diameter {diameter:.2e}: {best.message}")

    se_free = _free_std_errors(_hessian(negll, eta_hat, hessian_step))
    se_check = _free_std_errors(_hessian(negll, eta_hat, 2 * hessian_step))
    jac = _jacobian_diag(names, est)
    if se_free is None:
        std_errors = {k: None for k in names}
        se_reliable = False
        messages.append("observed information is not positive definite")
    else:
        se_nat = np.abs(jac) * se_free
        std_errors = dict(zip(names, map(float, se_nat)))
        se_reliable = se_check is not None and bool(
            np.all(np.abs(se_check - se_free) <= 0.1 * se_free)
        )
        if not se_reliable:
            messages.append("standard errors are step-size sensitive")

    grad = _gradient(negll, eta_hat)
    for m in messages:
        logger.info("%s: %s", family, m)
    return FitResult(
        family=family,
        estimates=est,
        std_errors=std_errors,
        loglik=loglik,
        n_obs=n,
        converged=converged,
        n_iter=int(best.nit),
        grad_norm=float(np.linalg.norm(grad)),
        se_reliable=se_reliable,
        messages=messages,
    )


def _loglik_split(model, n0, pos):
    ll = 0.0
    if n0:
        atom = collective.compound_atom0(model)
        if atom <= 0:
            return -math.inf
        ll += n0 * math.log(atom)
    try:
        with np.errstate(all="ignore"):
            dens = collective.compound_logpdf(model, pos)
    except (ConvergenceError, DomainError, FloatingPointError):
        return -math.inf
    total = float(np.sum(dens))
    return ll + total if math.isfinite(total) else -math.inf


# -- model comparison ---------------------------------------------------------

def rank_models(results: Sequence[FitResult]) -> list:
    """Sort by CAIC; ties go to the model with fewer parameters, then lower AIC."""
    return sorted(results, key=lambda r: (r.caic, r.k, r.aic))


def _fmt_est(v):
    return "" if v == "" else f"{v:.5f}"


def _fmt_se(v):
    return "" if v == "" else f"({v:.5f})"


def format_table(results: Sequence[FitResult]) -> str:
    """Fixed-width report: estimates with standard errors beneath, AIC, CAIC."""
    cols = ("Primary", "Secondary", "r", "p", "lambda", "alpha", "beta", "AIC", "CAIC")
    widths = (18, 12, 11, 11, 11, 11, 11, 11, 11)
    theta_used = any("theta" in r.estimates for r in results)
    if theta_used:
        cols += ("theta",)
        widths += (11,)

    def line(cells):
        return "".join(f"{c:<{w}}" if i < 2 else f"{c:>{w}}" for i, (c, w) in enumerate(zip(cells, widths)))

    out = [line(cols)]
    for r in rank_models(results):
        row = r.to_row()
        est = [_fmt_est(row[k]) for k in REPORT_PARAMS]
        se = [_fmt_se(row[f"{k}_se"]) for k in REPORT_PARAMS]
        extra_e = [_fmt_est(row["theta"])] if theta_used else []
        extra_s = [_fmt_se(row["theta_se"])] if theta_used else []
        mark = "" if r.converged else "*"
        out.append(line([row["primary"] + mark, row["secondary"], *est, f"{r.aic:.2f}", f"{r.caic:.2f}", *extra_e]))
        out.append(line(["", "", *se, "", "", *extra_s]))
    if any(not r.converged for r in results):
        out.append("* optimizer did not converge")
    return "\n".join(out)
