#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bvm/comparison.hpp"
#include "bvm/distributions.hpp"
#include "bvm/error.hpp"

namespace bvm {
namespace {

std::vector<double> draws(RngSeed seed, std::size_t n, double shift = 0.0) {
  auto xs = sample_scalar(Normal{shift, 1.0}, seed, n);
  return xs;
}

BinnedPdf pdf(std::vector<double> masses) {
  std::vector<double> edges(masses.size() + 1);
  for (std::size_t i = 0; i < edges.size(); ++i) edges[i] = static_cast<double>(i);
  return BinnedPdf(edges, std::move(masses));
}

TEST(MeanAbsError, Examples) {
  const Path y = {1.0, 3.0, -2.0};
  EXPECT_EQ(mean_abs_error(y, y), 0.0);
  EXPECT_DOUBLE_EQ(mean_abs_error(Path{0.0, 0.0}, Path{1.0, 3.0}), 2.0);
  EXPECT_DOUBLE_EQ(mean_abs_error(Path{1.5, 3.5, -1.5}, y), 0.5);
  EXPECT_THROW(mean_abs_error(Path{0.0}, Path{0.0, 1.0}), Error);
}

TEST(FractionWithin, Examples) {
  Path y(50, 0.0), yhat(50, 0.05);
  EXPECT_EQ(fraction_within(y, y, 0.0), 1.0);
  yhat[7] = 0.2;
  EXPECT_DOUBLE_EQ(fraction_within(yhat, y, 0.1), 0.98);
  EXPECT_EQ(fraction_within(Path(50, 0.2), y, 0.1), 0.0);
  EXPECT_THROW(fraction_within(Path{0.0}, y, 0.1), Error);
}

TEST(FractionWithin, MonotoneInEpsilon) {
  const auto a = draws(1, 40), b = draws(2, 40);
  double last = 0.0;
  for (double eps = 0.0; eps <= 4.0; eps += 0.05) {
    const double f = fraction_within(a, b, eps);
    EXPECT_GE(f, last);
    last = f;
  }
}

TEST(MaxAbsError, Examples) {
  const Path y = {1.0, 2.0, 3.0};
  EXPECT_EQ(max_abs_error(y, y), 0.0);
  EXPECT_EQ(max_abs_error(Path{1.0, 9.0, 3.0}, y), 7.0);
  EXPECT_EQ(max_abs_error(Path{1.0, -1.0}, Path{0.0, 0.0}), 1.0);
}

TEST(MeanAbsError, NeverExceedsMax) {
  for (RngSeed s = 0; s < 50; ++s) {
    const auto a = draws(s, 30), b = draws(s + 100, 30);
    EXPECT_LE(mean_abs_error(a, b), max_abs_error(a, b));
  }
}

TEST(CoverageFraction, Examples) {
  const Path y = {0.0, 1.0, 2.0, 3.0};
  std::vector<ConfidenceRegion> wide(4, ConfidenceRegion::interval(-10.0, 10.0, 0.95));
  EXPECT_EQ(coverage_fraction(y, wide), 1.0);
  std::vector<ConfidenceRegion> half = {ConfidenceRegion::interval(-1.0, 1.0, 0.95),
                                        ConfidenceRegion::interval(0.0, 2.0, 0.95),
                                        ConfidenceRegion::interval(5.0, 6.0, 0.95),
                                        ConfidenceRegion::interval(4.0, 5.0, 0.95)};
  EXPECT_EQ(coverage_fraction(y, half), 0.5);
  // Zero-width bands of a deterministic model against noisy data.
  const auto noisy = draws(3, 100);
  std::vector<ConfidenceRegion> zero;
  for (std::size_t i = 0; i < noisy.size(); ++i) zero.push_back(ConfidenceRegion::interval(0.0, 0.0, 0.95));
  EXPECT_EQ(coverage_fraction(noisy, zero), 0.0);
  EXPECT_THROW(coverage_fraction(y, zero), Error);
}

TEST(Ecdf, StepFunction) {
  const auto one = ecdf({3.0});
  EXPECT_EQ(one(2.999), 0.0);
  EXPECT_EQ(one(3.0), 1.0);
  const auto f = ecdf({4.0, 2.0, 1.0, 2.0});
  EXPECT_EQ(f(2.0), 0.75);
  EXPECT_EQ(f(-std::numeric_limits<double>::infinity()), 0.0);
  EXPECT_EQ(f(std::numeric_limits<double>::infinity()), 1.0);
  EXPECT_THROW(ecdf({}), Error);
}

TEST(AreaMetric, Examples) {
  const auto a = ecdf(draws(4, 25));
  EXPECT_EQ(area_metric(a, a), 0.0);
  EXPECT_EQ(area_metric(ecdf({0.0}), ecdf({1.0})), 1.0);
  // Unequal sample sizes: F1 = step at 0, F2 = half at 0 and half at 2.
  EXPECT_DOUBLE_EQ(area_metric(ecdf({0.0}), ecdf({0.0, 2.0})), 1.0);
}

TEST(AreaMetric, WassersteinIdentity) {
  for (RngSeed s = 0; s < 100; ++s) {
    auto x = draws(s, 10), y = draws(s + 1000, 10, 0.5);
    const double area = area_metric(ecdf(x), ecdf(y));
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    double brute = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) brute += std::abs(x[i] - y[i]);
    EXPECT_NEAR(area, brute / 10.0, 1e-12) << s;
  }
}

TEST(BinnedProbDiff, Examples) {
  const auto p = pdf({0.5, 0.5});
  EXPECT_EQ(binned_prob_diff(p, p), 0.0);
  EXPECT_EQ(binned_prob_diff(pdf({1.0, 0.0}), pdf({0.0, 1.0})), 2.0);
  EXPECT_DOUBLE_EQ(binned_prob_diff(p, pdf({0.25, 0.75})), 0.5);
  EXPECT_THROW(binned_prob_diff(p, pdf({0.2, 0.3, 0.5})), Error);
}

TEST(Divergence, ZeroOnEqual) {
  const auto p = pdf({0.1, 0.2, 0.3, 0.4});
  for (auto k : {DivergenceKind::kl, DivergenceKind::sym_kl, DivergenceKind::js, DivergenceKind::hellinger}) {
    EXPECT_EQ(divergence(k, p, p), 0.0);
  }
}

TEST(Divergence, HandValues) {
  const auto p = pdf({0.5, 0.5}), q = pdf({0.25, 0.75});
  const double kl = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
  EXPECT_NEAR(divergence(DivergenceKind::kl, p, q), kl, 1e-15);
  EXPECT_NEAR(kl, 0.14384, 1e-5);
  const double kl_qp = 0.25 * std::log(0.5) + 0.75 * std::log(1.5);
  EXPECT_NEAR(divergence(DivergenceKind::sym_kl, p, q), kl + kl_qp, 1e-15);
  const double h2 = 1.0 - (std::sqrt(0.125) + std::sqrt(0.375));
  EXPECT_NEAR(divergence(DivergenceKind::hellinger, p, q), std::sqrt(h2), 1e-15);
}

TEST(Divergence, DisjointSupports) {
  const auto p = pdf({1.0, 0.0}), q = pdf({0.0, 1.0});
  EXPECT_TRUE(std::isinf(divergence(DivergenceKind::kl, p, q)));
  EXPECT_TRUE(std::isinf(divergence(DivergenceKind::sym_kl, p, q)));
  EXPECT_NEAR(divergence(DivergenceKind::js, p, q), std::numbers::ln2, 1e-15);
  EXPECT_NEAR(divergence(DivergenceKind::hellinger, p, q), 1.0, 1e-15);
}

TEST(Divergence, NonnegativeAndJsBounded) {
  for (RngSeed s = 0; s < 100; ++s) {
    DrawRng rng(s, 0, 0);
    std::vector<double> a(6), b(6);
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      a[i] = rng.uniform();
      b[i] = rng.uniform();
      sa += a[i];
      sb += b[i];
    }
    for (auto& x : a) x /= sa;
    for (auto& x : b) x /= sb;
    const auto p = pdf(a), q = pdf(b);
    for (auto k : {DivergenceKind::kl, DivergenceKind::sym_kl, DivergenceKind::js, DivergenceKind::hellinger}) {
      EXPECT_GT(divergence(k, p, q), 0.0);
    }
    EXPECT_LE(divergence(DivergenceKind::js, p, q), std::numbers::ln2);
  }
}

TEST(Compare, SymmetricFunctionsAreSymmetric) {
  for (RngSeed s = 0; s < 20; ++s) {
    const Path a = draws(s, 30), b = draws(s + 50, 30, 0.3);
    for (auto kind : {ComparisonKind::abs_diff, ComparisonKind::sq_diff, ComparisonKind::area_metric,
                      ComparisonKind::sym_kl, ComparisonKind::js, ComparisonKind::hellinger,
                      ComparisonKind::mean_abs_error, ComparisonKind::max_abs_error}) {
      ASSERT_TRUE(is_symmetric(kind)) << comparison_name(kind);
      const ComparisonFnSpec spec{kind, 0, 8};
      if (kind == ComparisonKind::abs_diff || kind == ComparisonKind::sq_diff) {
        EXPECT_EQ(compare(spec, a[0], b[0]), compare(spec, b[0], a[0]));
      } else {
        const double ab = compare(spec, a, b), ba = compare(spec, b, a);
        if (std::isinf(ab)) {
          EXPECT_EQ(ab, ba) << comparison_name(kind);  // disjoint bins
        } else {
          EXPECT_NEAR(ab, ba, 1e-12) << comparison_name(kind);
        }
      }
    }
  }
  EXPECT_FALSE(is_symmetric(ComparisonKind::kl));
  EXPECT_FALSE(is_symmetric(ComparisonKind::identity_statistic));
}

TEST(Compare, ScalarAndPathFunctions) {
  EXPECT_EQ(compare({ComparisonKind::abs_diff}, 0.5, 2.0), 1.5);
  EXPECT_EQ(compare({ComparisonKind::sq_diff}, 0.5, 2.0), 2.25);
  EXPECT_EQ(compare({ComparisonKind::identity_statistic}, 0.7, 99.0), 0.7);
  EXPECT_EQ(compare({ComparisonKind::per_point_abs_error, 1}, Path{0.0, 5.0}, Path{0.0, 2.0}), 3.0);
  EXPECT_THROW(compare({ComparisonKind::per_point_abs_error, 4}, Path{0.0}, Path{0.0}), Error);
  EXPECT_THROW(compare({ComparisonKind::mean_abs_error}, 1.0, Path{0.0}), Error);
}

TEST(Compare, KlReadsDataRelativeToModel) {
  const auto model = pdf({0.5, 0.5}), data = pdf({0.25, 0.75});
  EXPECT_EQ(compare({ComparisonKind::kl}, model, data), divergence(DivergenceKind::kl, data, model));
}

TEST(Compare, NamesRoundTrip) {
  for (auto kind : {ComparisonKind::abs_diff, ComparisonKind::sq_diff, ComparisonKind::mean_abs_error,
                    ComparisonKind::max_abs_error, ComparisonKind::per_point_abs_error, ComparisonKind::area_metric,
                    ComparisonKind::binned_prob_diff, ComparisonKind::kl, ComparisonKind::sym_kl, ComparisonKind::js,
                    ComparisonKind::hellinger, ComparisonKind::identity_statistic}) {
    EXPECT_EQ(parse_comparison(comparison_name(kind)), kind);
  }
  EXPECT_FALSE(parse_comparison("nope").has_value());
}

TEST(BinnedPdf, ValidatesAndBins) {
  EXPECT_THROW(BinnedPdf({0.0, 1.0}, {0.5}), Error);
  EXPECT_THROW(BinnedPdf({0.0, 0.0}, {1.0}), Error);
  const auto h = BinnedPdf::histogram(std::vector<double>{0.1, 0.2, 0.9, 5.0}, {0.0, 0.5, 1.0});
  EXPECT_EQ(h.masses()[0], 0.5);
  EXPECT_EQ(h.masses()[1], 0.5);
  const auto edges = BinnedPdf::pooled_edges(std::vector<double>{0.0}, std::vector<double>{1.0}, 4);
  EXPECT_EQ(edges.size(), 5u);
  EXPECT_NEAR(edges.front(), -0.01, 1e-15);
  EXPECT_NEAR(edges.back(), 1.01, 1e-15);
}

}  // namespace
}  // namespace bvm
