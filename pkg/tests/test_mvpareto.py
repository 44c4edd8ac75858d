import math

import numpy as np
import pytest

from riskagg.exceptions import DomainError, MomentDoesNotExistError
from riskagg.montecarlo import ks_distance
from riskagg.mvpareto import (
    MvParetoModel,
    clayton_copula,
    cross_moment,
    joint_pdf,
    joint_survival,
    marginal_variance,
    pair_correlation,
    pair_covariance,
    sample_vector,
)
from riskagg.univariate import ParetoParams, pareto_cdf, pareto_pdf


def test_model_validation():
    with pytest.raises(DomainError):
        MvParetoModel(1.0, 1.0, 0)
    with pytest.raises(DomainError):
        MvParetoModel(-1.0, 1.0, 2)


def test_sampler_shape_and_determinism():
    m = MvParetoModel(3.0, 1.0, 4)
    assert sample_vector(m, np.random.default_rng(5)).shape == (4,)
    a = sample_vector(m, np.random.default_rng(5), 10)
    assert a.shape == (10, 4)
    assert np.array_equal(a, sample_vector(m, np.random.default_rng(5), 10))


def test_marginals_are_pareto():
    m = MvParetoModel(3.0, 1.0, 2)
    x = sample_vector(m, np.random.default_rng(3), 1_000_000)
    for j in range(2):
        assert ks_distance(x[:, j], lambda v: pareto_cdf(v, ParetoParams(3.0, 1.0))) < 0.002


def test_sample_correlation_alpha_four():
    x = sample_vector(MvParetoModel(4.0, 1.0, 2), np.random.default_rng(4), 1_000_000)
    assert np.corrcoef(x.T)[0, 1] == pytest.approx(0.25, abs=0.01)


def test_sample_correlation_alpha_two_and_a_half():
    # the fourth moment is infinite here, so the sample correlation settles slowly
    x = sample_vector(MvParetoModel(2.5, 1.0, 2), np.random.default_rng(25), 10_000_000)
    assert np.corrcoef(x.T)[0, 1] == pytest.approx(0.4, abs=0.02)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.5, 4.0, 10.0])
def test_association_nonnegative_covariance(alpha):
    # heavy tails make moments useless for alpha <= 2; rank-transform first
    x = sample_vector(MvParetoModel(alpha, 1.0, 2), np.random.default_rng(int(alpha * 10)), 1_000_000)
    u = pareto_cdf(x, ParetoParams(alpha, 1.0))
    centred = (u[:, 0] - u[:, 0].mean()) * (u[:, 1] - u[:, 1].mean())
    se = centred.std() / math.sqrt(len(centred))
    assert centred.mean() >= -3 * se


def test_joint_pdf_examples():
    assert joint_pdf([0.0, 0.0], MvParetoModel(1.0, 1.0, 2)) == pytest.approx(2.0)
    assert joint_pdf([1.0, 1.0], MvParetoModel(2.0, 1.0, 2)) == pytest.approx(6 / 81)
    assert joint_pdf([1.0, -0.1], MvParetoModel(2.0, 1.0, 2)) == 0.0
    x = np.linspace(0, 20, 41)
    one_d = np.array([joint_pdf([v], MvParetoModel(2.3, 1.7, 1)) for v in x])
    assert np.allclose(one_d, pareto_pdf(x, ParetoParams(2.3, 1.7)), rtol=1e-12)
    with pytest.raises(ValueError):
        joint_pdf([1.0, 2.0, 3.0], MvParetoModel(2.0, 1.0, 2))


def test_joint_survival_examples():
    assert joint_survival([0.0, 0.0, 0.0], MvParetoModel(2.0, 1.0, 3)) == 1.0
    assert joint_survival([2.0], MvParetoModel(2.0, 2.0, 1)) == pytest.approx(0.25)
    assert joint_survival([1.0, 1.0], MvParetoModel(1.0, 1.0, 2)) == pytest.approx(1 / 3)
    with pytest.raises(DomainError):
        joint_survival([-1.0, 1.0], MvParetoModel(1.0, 1.0, 2))


def test_joint_survival_monte_carlo():
    m = MvParetoModel(1.0, 1.0, 2)
    x = sample_vector(m, np.random.default_rng(6), 10_000_000)
    hit = np.mean((x[:, 0] > 1) & (x[:, 1] > 1))
    p = 1 / 3
    assert abs(hit - p) <= 3 * math.sqrt(p * (1 - p) / len(x))


def test_mixed_partial_of_survival_is_density():
    m = MvParetoModel(2.5, 1.5, 2)
    x0, h = np.array([0.8, 1.3]), 1e-4
    s = lambda a, b: joint_survival([a, b], m)
    mixed = (s(x0[0] + h, x0[1] + h) - s(x0[0] + h, x0[1] - h) - s(x0[0] - h, x0[1] + h) + s(x0[0] - h, x0[1] - h)) / (4 * h * h)
    assert mixed == pytest.approx(joint_pdf(x0, m), rel=1e-4)


def test_clayton_examples():
    assert clayton_copula([1.0, 1.0], 2.0) == pytest.approx(1.0)
    assert clayton_copula([0.3, 1.0, 1.0], 1.7) == pytest.approx(0.3)
    assert clayton_copula([0.5, 0.5], 1.0) == pytest.approx(1 / 3)
    with pytest.raises(DomainError):
        clayton_copula([0.0, 0.5], 1.0)


def test_clayton_is_monotone():
    u = np.linspace(0.05, 1, 20)
    vals = [clayton_copula([a, 0.4], 1.3) for a in u]
    assert np.all(np.diff(vals) >= 0)


def test_copula_matches_joint_law_by_inclusion_exclusion():
    alpha, beta = 1.8, 1.2
    m = MvParetoModel(alpha, beta, 2)
    par = ParetoParams(alpha, beta)
    for x1, x2 in [(0.3, 0.7), (2.0, 5.0), (10.0, 0.1)]:
        # P(X1<=x1, X2<=x2) from the survival function
        joint_cdf = 1 - joint_survival([x1, 0], m) - joint_survival([0, x2], m) + joint_survival([x1, x2], m)
        # the same probability through the copula applied to marginal survival values
        s1, s2 = 1 - pareto_cdf(x1, par), 1 - pareto_cdf(x2, par)
        via_copula = pareto_cdf(x1, par) + pareto_cdf(x2, par) - 1 + clayton_copula([s1, s2], alpha)
        assert via_copula == pytest.approx(joint_cdf, abs=1e-10)


def test_cross_moments():
    assert cross_moment([1], MvParetoModel(3.0, 2.0, 1)) == pytest.approx(1.0)
    assert cross_moment([1, 1], MvParetoModel(3.0, 1.0, 2)) == pytest.approx(0.5)
    with pytest.raises(MomentDoesNotExistError):
        cross_moment([1, 1], MvParetoModel(2.0, 1.0, 2))


def test_cross_moment_monte_carlo():
    m = MvParetoModel(4.0, 1.0, 2)
    x = sample_vector(m, np.random.default_rng(8), 10_000_000)
    assert np.mean(x[:, 0] * x[:, 1]) == pytest.approx(cross_moment([1, 1], m), rel=0.02)


def test_covariance_and_correlation():
    m = MvParetoModel(4.0, 1.0, 2)
    assert pair_covariance(m) == pytest.approx(1 / 18)
    assert pair_correlation(m) == pytest.approx(0.25)
    assert pair_covariance(MvParetoModel(3.0, 2.0, 2)) == pytest.approx(1.0)
    assert pair_correlation(MvParetoModel(2.5, 1.0, 2)) == pytest.approx(0.4)
    assert pair_covariance(m) / marginal_variance(4.0, 1.0) == pytest.approx(pair_correlation(m))
    with pytest.raises(MomentDoesNotExistError):
        pair_covariance(MvParetoModel(2.0, 1.0, 2))
