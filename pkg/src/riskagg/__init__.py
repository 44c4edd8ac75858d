"""Aggregate loss distributions for dependent Pareto claims."""

from .aggregate import (
    AggregateModel,
    aggregate_distribution,
    conditional_tail_moment,
    tail_value_at_risk,
    value_at_risk,
)
from .collective import (
    CompoundModel,
    DependentPareto,
    Exponential,
    Geometric,
    Logarithmic,
    NegBinomial,
    Poisson,
    compound_atom0,
    compound_cdf,
    compound_mean,
    compound_pdf,
    compound_sf,
    compound_variance,
    make_model,
    sample_compound,
)
from .data import ClaimDataset, PolicyRecord, describe, load_csv
from .estimator import CompoundLossModel
from .exceptions import ConvergenceError, DatasetError, DomainError, MomentDoesNotExistError
from .inference import FitResult, fit_mle, log_likelihood, rank_models
from .mvpareto import MvParetoModel
from .univariate import Beta2Params, GammaShape, ParetoParams

__version__ = "0.1.0"
