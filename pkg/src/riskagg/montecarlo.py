"""Monte Carlo summaries used to cross-check the analytic distributions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import aggregate, collective
from .exceptions import MomentDoesNotExistError
from .univariate import beta2_raw_moment


def ks_distance(sample, cdf) -> float:
    """Kolmogorov-Smirnov distance between a sample and a CDF on ``[0, inf)``.

    ``cdf`` is evaluated on the sample's distinct values and must be
    continuous on ``(0, inf)``; a jump at zero (an atom) is allowed.
    """
    xs = np.sort(np.asarray(sample, dtype=float).ravel())
    n = xs.size
    values, first = np.unique(xs, return_index=True)
    ecdf_left = first / n
    ecdf_right = np.r_[first[1:], n] / n
    f = np.asarray(cdf(values), dtype=float)
    f_left = np.where(values == 0, 0.0, f)
    d = max(np.max(np.abs(ecdf_right - f)), np.max(np.abs(ecdf_left - f_left)))
    return float(d)


@dataclass(frozen=True)
class SampleSummary:
    draws: int
    mean: float
    variance: float
    zero_fraction: float
    ks: float
    analytic_mean: float
    analytic_variance: float
    atom0: float

    def to_text(self) -> str:
        return "\n".join(f"{k}={_fmt(v)}" for k, v in self.__dict__.items())


def _fmt(v):
    return str(v) if isinstance(v, int) else f"{v:.6g}"


def _moment_or_nan(fn):
    try:
        return float(fn())
    except MomentDoesNotExistError:
        return float("nan")


def summarize_compound(model: collective.CompoundModel, sample) -> SampleSummary:
    sample = np.asarray(sample, dtype=float)
    atom = collective.compound_atom0(model)
    return SampleSummary(
        draws=int(sample.size),
        mean=float(sample.mean()),
        variance=float(sample.var()),
        zero_fraction=float(np.mean(sample == 0)),
        ks=ks_distance(sample, lambda v: collective.compound_cdf(model, v)),
        analytic_mean=_moment_or_nan(lambda: collective.compound_mean(model)),
        analytic_variance=_moment_or_nan(lambda: collective.compound_variance(model)),
        atom0=atom,
    )


def summarize_individual(model: aggregate.AggregateModel, sample) -> SampleSummary:
    sample = np.asarray(sample, dtype=float)
    law = aggregate.aggregate_distribution(model)

    def mean():
        return beta2_raw_moment(1, law)

    def variance():
        return beta2_raw_moment(2, law) - beta2_raw_moment(1, law) ** 2

    return SampleSummary(
        draws=int(sample.size),
        mean=float(sample.mean()),
        variance=float(sample.var()),
        zero_fraction=float(np.mean(sample == 0)),
        ks=ks_distance(sample, lambda v: aggregate.cdf(v, model)),
        analytic_mean=_moment_or_nan(mean),
        analytic_variance=_moment_or_nan(variance),
        atom0=0.0,
    )
