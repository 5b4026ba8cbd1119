#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "bvm/error.hpp"
#include "bvm/metrics.hpp"

namespace bvm {
namespace {

double phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

TEST(Reliability, ClosedFormNormals) {
  const auto e = reliability(Normal{0.3, 0.6}, Normal{0.0, 0.8}, 0.5, 1000, 1);
  EXPECT_EQ(e.method, EstimateMethod::closed_form);
  EXPECT_NEAR(e.p, phi((0.5 - 0.3) / 1.0) - phi((-0.5 - 0.3) / 1.0), 1e-14);
  EXPECT_EQ(reliability(DiracDelta{1.0}, DiracDelta{1.4}, 0.5, 10, 1).p, 1.0);
  EXPECT_EQ(reliability(DiracDelta{1.0}, DiracDelta{1.6}, 0.5, 10, 1).p, 0.0);
  EXPECT_THROW(reliability(Normal{0, 1}, Normal{0, 1}, -1.0, 10, 1), Error);
}

TEST(Reliability, MonteCarloFallback) {
  const auto e = reliability(Uniform{0, 1}, Uniform{0, 1}, 0.5, 40000, 2);
  EXPECT_EQ(e.method, EstimateMethod::mc);
  EXPECT_NEAR(e.p, 0.75, 4.0 * e.std_error);
}

TEST(ImprovedReliability, ProductOfIndependentPoints) {
  const Distribution model = IndependentProduct{{Normal{0, 1}, Normal{0, 1}}};
  const Distribution data = DiracDelta{Path{0.0, 0.0}};
  const std::vector<double> tol = {1.0, 2.0};
  const auto e = improved_reliability(model, data, tol, 50000, 3);
  const double exact = (2.0 * phi(1.0) - 1.0) * (2.0 * phi(2.0) - 1.0);
  EXPECT_NEAR(e.p, exact, 4.0 * e.std_error);
  EXPECT_THROW(improved_reliability(model, data, std::vector<double>{1.0}, 10, 3), Error);
}

TEST(Frequentist, EqualsReliabilityForThreshold) {
  const DataSummary data{1.2, 0.8, 12};
  for (double eps : {0.05, 0.2, 0.5, 1.5}) {
    const auto f = frequentist(1.0, data, AgreementRule::threshold(ComparisonKind::abs_diff, eps));
    const auto r = reliability(DiracDelta{1.0}, data.mean_distribution(), eps, 10, 0);
    EXPECT_NEAR(f.p, r.p, 1e-6) << eps;
  }
  EXPECT_THROW(DataSummary({0.0, 1.0, 1}).mean_distribution(), Error);
}

TEST(AreaMetricValidation, IndicatorAndBootstrap) {
  std::vector<double> a(200), b(200);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = static_cast<double>(i) / 200.0;
    b[i] = a[i] + 5.0;
  }
  const auto rule = AgreementRule::threshold(ComparisonKind::area_metric, 0.1);
  EXPECT_EQ(area_metric_validation(a, a, rule).p, 1.0);
  EXPECT_EQ(area_metric_validation(a, b, rule).p, 0.0);
  const auto boot = area_metric_validation(a, a, rule, BootstrapOptions{200, 4});
  EXPECT_EQ(boot.samples, 200u);
  EXPECT_GT(boot.p, 0.9);
  EXPECT_THROW(area_metric_validation(a, std::vector<double>{}, rule), Error);
  EXPECT_THROW(area_metric_validation(a, a, rule, BootstrapOptions{0, 4}), Error);
}

TEST(Dirichlet, SumsToOneWithCorrectMean) {
  const std::vector<double> alpha = {1.0, 2.0, 7.0};
  std::vector<double> mean(3, 0.0);
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    DrawRng rng(1, streams::kData, static_cast<std::uint64_t>(k));
    const auto p = dirichlet_draw(alpha, rng);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
    for (int i = 0; i < 3; ++i) mean[i] += p[i] / n;
  }
  EXPECT_NEAR(mean[0], 0.1, 0.005);
  EXPECT_NEAR(mean[2], 0.7, 0.005);
}

TEST(BinnedPdfMetric, LargeCountsAgree) {
  const BinnedPdf model({0.0, 1.0, 2.0, 3.0}, {0.2, 0.5, 0.3});
  const std::vector<double> counts = {20000, 50000, 30000};
  const auto rule = AgreementRule::threshold(ComparisonKind::binned_prob_diff, 0.02);
  EXPECT_EQ(binned_pdf_metric(model, counts, rule, 500, 5).p, 1.0);
  const std::vector<double> far = {90000, 5000, 5000};
  EXPECT_EQ(binned_pdf_metric(model, far, rule, 500, 5).p, 0.0);
  EXPECT_THROW(binned_pdf_metric(model, std::vector<double>{1, 2}, rule, 10, 5), Error);
  EXPECT_THROW(binned_pdf_metric(model, counts, rule, 0, 5), Error);
}

TEST(DivergenceValidation, CertainAndUncertain) {
  const BinnedPdf p({0.0, 1.0, 2.0}, {0.5, 0.5});
  const BinnedPdf q({0.0, 1.0, 2.0}, {0.9, 0.1});
  const auto rule = AgreementRule::threshold(ComparisonKind::js, 0.01);
  EXPECT_EQ(divergence_validation(p, p, rule).p, 1.0);
  EXPECT_EQ(divergence_validation(p, q, rule).p, 0.0);
  const PdfSampler fixed = [&](DrawRng&) { return p; };
  const PdfSampler coin = [&](DrawRng& rng) { return rng.uniform() < 0.5 ? p : q; };
  const auto e = divergence_validation(fixed, coin, rule, 20000, 6);
  EXPECT_NEAR(e.p, 0.5, 4.0 * e.std_error);
  EXPECT_THROW(divergence_validation(fixed, coin, rule, 0, 6), Error);
}

TEST(ClassicalHypothesis, AlwaysOneMinusAlpha) {
  for (double alpha : {0.01, 0.05, 0.2}) {
    const auto r = classical_hypothesis(Normal{2.0, 3.0}, alpha);
    EXPECT_NEAR(r.estimate.p, 1.0 - alpha, 1e-12);
    EXPECT_NEAR(r.acceptance.intervals[0].hi - 2.0, 2.0 - r.acceptance.intervals[0].lo, 1e-9);
  }
  EXPECT_THROW(classical_hypothesis(Normal{0, 1}, 0.0), Error);
}

TEST(StatisticalPower, IdenticalNormals) {
  const auto r = statistical_power_bvm(Normal{0, 1}, Normal{0, 1}, 0.05, 0.05, RegionKind::interval);
  EXPECT_NEAR(r.estimate.p, 0.9025, 1e-6);
  EXPECT_NEAR(r.model_power, 0.95, 1e-6);
  EXPECT_NEAR(r.data_power, 0.95, 1e-6);
  EXPECT_NEAR(r.systematic_error, 0.0975, 1e-12);
  EXPECT_THROW(statistical_power_bvm(Normal{0, 1}, Normal{0, 1}, 1.0, 0.05, RegionKind::interval), Error);
}

TEST(StatisticalPower, DisjointModelsHaveNoPower) {
  const auto r = statistical_power_bvm(Normal{100, 1}, Normal{0, 1}, 0.05, 0.05, RegionKind::interval);
  EXPECT_LT(r.estimate.p, 1e-12);
}

TEST(Evidence, ConjugateGaussianClosedForm) {
  // y_i = theta + noise, theta ~ N(0, tau^2): y ~ N(0, sigma^2 I + tau^2 11').
  const double sigma = 0.5, tau = 1.0;
  const Path y = {0.8, 1.1, 0.6, 1.3};
  const GaussianLikelihoodSpec lik{sigma, y, InputGrid(std::vector<double>{0.0, 1.0, 2.0, 3.0})};
  const double n = static_cast<double>(y.size());
  const double s2 = sigma * sigma, t2 = tau * tau;
  double sum = 0.0, sum_sq = 0.0;
  for (double v : y) {
    sum += v;
    sum_sq += v * v;
  }
  const double log_det = (n - 1.0) * std::log(s2) + std::log(s2 + n * t2);
  const double quad = (sum_sq - t2 * sum * sum / (s2 + n * t2)) / s2;
  const double exact = -0.5 * (n * std::log(2.0 * std::numbers::pi) + log_det + quad);
  const auto e = bayesian_evidence(ModelFunction::polynomial({0}), IndependentProduct{{Normal{0, tau}}}, lik,
                                   200000, 7);
  EXPECT_NEAR(e.log_evidence, exact, 3.0 * e.log_std_error);
  EXPECT_GT(e.log_std_error, 0.0);
  EXPECT_THROW(bayesian_evidence(ModelFunction::polynomial({0, 1}), IndependentProduct{{Normal{0, 1}}}, lik, 10, 7),
               Error);
}

TEST(Evidence, LogLikelihoodNormalizer) {
  const GaussianLikelihoodSpec lik{2.0, {1.0}, InputGrid(std::vector<double>{0.0})};
  const std::vector<double> yhat = {1.0};
  EXPECT_NEAR(gaussian_log_likelihood(yhat, lik), -0.5 * std::log(2.0 * std::numbers::pi * 4.0), 1e-14);
}

TEST(BayesFactorTest, Statuses) {
  const auto one = bayes_factor(-3.0, -3.0);
  EXPECT_EQ(one.status, RatioStatus::ok);
  EXPECT_EQ(one.value, 1.0);
  EXPECT_NEAR(bayes_factor(-1.0, -3.0).log_value, 2.0, 1e-15);
  EXPECT_EQ(bayes_factor(-INFINITY, -INFINITY).status, RatioStatus::indeterminate);
  EXPECT_EQ(bayes_factor(-1.0, -INFINITY).status, RatioStatus::infinite);
  EXPECT_EQ(bayes_factor(-INFINITY, -1.0).value, 0.0);
}

}  // namespace
}  // namespace bvm
