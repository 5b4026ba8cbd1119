#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bvm/engine.hpp"
#include "bvm/error.hpp"

namespace bvm {
namespace {

const ComparisonFnSpec kAbs{ComparisonKind::abs_diff};
const ComparisonFnSpec kIdentity{ComparisonKind::identity_statistic};

Scenario scalar_scenario(Distribution model, Distribution data, AgreementRule rule) {
  return Scenario{std::move(model), std::move(data), std::move(rule), {}};
}

Distribution noisy_paths(double shift, double sd, std::size_t n) {
  IndependentProduct p;
  for (std::size_t i = 0; i < n; ++i) p.components.emplace_back(Normal{shift + 0.01 * static_cast<double>(i), sd});
  return p;
}

TEST(EstimateMc, AlwaysTrueIsExactlyOne) {
  const auto e = estimate_bvm_mc(scalar_scenario(Normal{0, 1}, Normal{3, 2}, AgreementRule::always(true)), 1000, 1);
  EXPECT_EQ(e.p, 1.0);
  EXPECT_EQ(e.std_error, 0.0);
  EXPECT_EQ(e.samples, 1000u);
  EXPECT_EQ(e.seed, 1u);
  EXPECT_EQ(e.method, EstimateMethod::mc);
}

TEST(EstimateMc, ExactAgreementOfDiracs) {
  const auto rule = AgreementRule::threshold(kAbs, 0.0);
  EXPECT_EQ(estimate_bvm_mc(scalar_scenario(DiracDelta{2.0}, DiracDelta{2.0}, rule), 100, 0).p, 1.0);
  EXPECT_EQ(estimate_bvm_mc(scalar_scenario(DiracDelta{2.0}, DiracDelta{3.0}, rule), 100, 0).p, 0.0);
}

TEST(EstimateMc, CategoricalAgainstEnumeration) {
  const Distribution model = Categorical{{0.0, 1.0, 2.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
  const auto e = estimate_bvm_mc(scalar_scenario(model, DiracDelta{1.0}, AgreementRule::threshold(kAbs, 0.0)), 30000, 5);
  EXPECT_NEAR(e.p, 1.0 / 3.0, 3.0 * e.std_error);
  EXPECT_DOUBLE_EQ(e.std_error, std::sqrt(e.p * (1.0 - e.p) / 30000.0));
}

TEST(EstimateMc, SoftKernelUsesSampleVariance) {
  const AgreementRule soft = rules::SoftExponential{kAbs, 0.0, 1.0};
  const auto e = estimate_bvm_mc(scalar_scenario(Normal{0, 1}, DiracDelta{0.0}, soft), 20000, 3);
  // E[exp(-|Z|)] = 2 exp(1/2) (1 - Phi(1)).
  const double exact = 2.0 * std::exp(0.5) * 0.5 * std::erfc(1.0 / std::numbers::sqrt2);
  EXPECT_NEAR(e.p, exact, 4.0 * e.std_error);
  EXPECT_LT(e.std_error, std::sqrt(e.p * (1.0 - e.p) / 20000.0));
}

TEST(EstimateMc, ThreadCountDoesNotChangeResult) {
  const auto s = scalar_scenario(Normal{0, 1}, StudentT{0.2, 4, 1}, AgreementRule::threshold(kAbs, 0.5));
  const auto one = estimate_bvm_mc(s, 50000, 77, {1, 1024});
  const auto eight = estimate_bvm_mc(s, 50000, 77, {8, 1024});
  EXPECT_EQ(one.p, eight.p);
  EXPECT_EQ(one.std_error, eight.std_error);
}

TEST(EstimateMc, JointSamplerOverridesMarginals) {
  Scenario s = scalar_scenario(Normal{0, 1}, Normal{0, 1}, AgreementRule::threshold(kAbs, 0.0));
  s.joint = [](DrawRng& rng) {
    const double x = rng.normal();
    return std::pair<Value, Value>{x, x};
  };
  EXPECT_EQ(estimate_bvm_mc(s, 500, 1).p, 1.0);
}

TEST(EstimateMc, RejectsZeroSamples) {
  EXPECT_THROW(estimate_bvm_mc(scalar_scenario(Normal{0, 1}, Normal{0, 1}, AgreementRule::always(true)), 0, 1),
               Error);
}

TEST(EstimateGrid, Examples) {
  const auto rule = AgreementRule(rules::GammaEpsilon{1.0, 0.0, 1.0, {}});
  const WeightedValues data = {{Path{1.0, 2.0}, 1.0}};
  EXPECT_EQ(estimate_bvm_grid(rule, {{Path{1.0, 2.0}, 1.0}}, data).p, 1.0);
  const auto half = estimate_bvm_grid(rule, {{Path{1.0, 2.0}, 0.5}, {Path{0.0, 2.0}, 0.5}}, data);
  EXPECT_EQ(half.p, 0.5);
  EXPECT_EQ(half.std_error, 0.0);
  EXPECT_EQ(half.method, EstimateMethod::grid);
  EXPECT_THROW(estimate_bvm_grid(rule, {{Path{1.0, 2.0}, 0.7}}, data), Error);
}

TEST(Discretize, GaussianGridWeights) {
  const auto g = discretize(Normal{1.0, 2.0}, {5, 3.0});
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(std::get<double>(g.front().value), -5.0);
  EXPECT_DOUBLE_EQ(std::get<double>(g.back().value), 7.0);
  double total = 0.0;
  for (const auto& w : g) total += w.weight;
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_GT(g[2].weight, g[1].weight);
  const auto product = discretize(IndependentProduct{{Normal{0, 1}, Uniform{0, 1}}}, {4, 3.0});
  EXPECT_EQ(product.size(), 16u);
}

TEST(Discretize, PushForwardMapsThePriorGrid) {
  const auto d = push_forward(IndependentProduct{{Normal{1, 0.1}, Normal{-0.5, 0.05}}},
                              ModelFunction::polynomial({0, 2}), InputGrid({0.0, 1.0}));
  const auto g = discretize(d, {20, 3.0});
  EXPECT_EQ(g.size(), 400u);
  for (const auto& w : g) EXPECT_EQ(std::get<Path>(w.value).size(), 2u);
}

TEST(ComparisonDensity, DiracMassInOneBin) {
  const auto s = scalar_scenario(DiracDelta{0.0}, DiracDelta{0.7}, AgreementRule::always(true));
  const auto d = comparison_density(s, kAbs, 100, 10, 1);
  double total = 0.0;
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < d.masses.size(); ++i) {
    total += d.masses[i];
    if (d.masses[i] > 0.0) {
      ++nonzero;
      EXPECT_LE(d.edges[i], 0.7);
      EXPECT_GE(d.edges[i + 1], 0.7);
    }
  }
  EXPECT_EQ(nonzero, 1u);
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(ComparisonDensity, IdentityStatisticRecoversModel) {
  const auto s = scalar_scenario(Normal{0, 1}, DiracDelta{0.0}, AgreementRule::always(true));
  const auto d = comparison_density(s, kIdentity, 100000, 200, 4);
  double total = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < d.masses.size(); ++i) {
    total += d.masses[i];
    const double phi = 0.5 * std::erfc(-d.edges[i + 1] / std::numbers::sqrt2);
    worst = std::max(worst, std::abs(total - phi));
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
  EXPECT_LT(worst, 0.02);
  EXPECT_THROW(comparison_density(s, kIdentity, 10, 20, 4), Error);
}

TEST(BvmFromDensity, MatchesMonteCarlo) {
  const auto s = scalar_scenario(Normal{0, 1}, Normal{0.5, 0.5}, AgreementRule::always(true));
  const auto d = comparison_density(s, kAbs, 50000, 64, 9);
  EXPECT_NEAR(bvm_from_density(d, AgreementRule::always(true)), 1.0, 1e-12);
  EXPECT_EQ(bvm_from_density(d, AgreementRule::always(false)), 0.0);
  const double eps = 1.0;
  const double width = d.edges[1] - d.edges[0];
  const double p = bvm_from_density(d, AgreementRule::threshold(kIdentity, eps));
  auto mc = [&](double e) {
    return estimate_bvm_mc(scalar_scenario(Normal{0, 1}, Normal{0.5, 0.5}, AgreementRule::threshold(kAbs, e)), 50000,
                           9)
        .p;
  };
  EXPECT_GE(p, mc(eps - 2.0 * width));
  EXPECT_LE(p, mc(eps + 2.0 * width));
}

TEST(Ratios, FactorAndRatio) {
  auto est = [](double p) { return BvmEstimate{p, 0.0, 1, 0, EstimateMethod::grid}; };
  EXPECT_EQ(bvm_factor(est(0.4), est(0.4)).value, 1.0);
  EXPECT_EQ(bvm_factor(est(0.0), est(0.0)).status, RatioStatus::indeterminate);
  EXPECT_EQ(bvm_factor(est(1.0), est(0.0)).status, RatioStatus::infinite);
  EXPECT_EQ(bvm_factor(est(0.0), est(1.0)).value, 0.0);
  const Ratio two{RatioStatus::ok, 2.0};
  EXPECT_EQ(bvm_ratio(two, 0.5, 0.5).value, 2.0);
  EXPECT_EQ(bvm_ratio(two, 1.0, 2.0).value, 1.0);
  EXPECT_EQ(bvm_ratio({RatioStatus::indeterminate, 0.0}, 1.0, 2.0).status, RatioStatus::indeterminate);
  EXPECT_THROW(bvm_ratio(two, 0.0, 1.0), Error);
  EXPECT_EQ(status_name(RatioStatus::infinite), "infinite");
}

TEST(AxisValues, InclusiveAndSnapped) {
  const auto g = axis_values(0.75, 1.0, 0.01);
  EXPECT_EQ(g.size(), 26u);
  EXPECT_EQ(g.front(), 0.75);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_EQ(g[7], 0.82);
  EXPECT_EQ(axis_values(0.0, 1.0, 0.01).size(), 101u);
  EXPECT_THROW(axis_values(0.0, 1.0, 0.0), Error);
}

class SweepTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const std::size_t n = 30;
    scenario_ = std::make_unique<Scenario>(
        Scenario{noisy_paths(0.0, 0.3, n), noisy_paths(0.1, 0.1, n), AgreementRule::always(true), {}});
    profiles_ = std::make_unique<ErrorProfiles>(profiles_from_mc(*scenario_, 400, 21));
    gammas_ = axis_values(0.5, 1.0, 0.05);
    epsilons_ = axis_values(0.0, 1.0, 0.02);
  }
  std::unique_ptr<Scenario> scenario_;
  std::unique_ptr<ErrorProfiles> profiles_;
  std::vector<double> gammas_, epsilons_;
};

TEST_F(SweepTest, MatchesDirectEvaluation) {
  const auto grid = sweep(*profiles_, gammas_, epsilons_, 3.0);
  ASSERT_EQ(grid.cells.size(), gammas_.size() * epsilons_.size());
  for (std::size_t gi = 0; gi < gammas_.size(); gi += 3) {
    for (std::size_t ei = 0; ei < epsilons_.size(); ei += 5) {
      const AgreementRule rule = rules::GammaEpsilon{gammas_[gi], epsilons_[ei], 3.0, {}};
      Scenario s = *scenario_;
      s.rule = rule;
      EXPECT_NEAR(grid.at(gi, ei).p, estimate_bvm_mc(s, 400, 21).p, 1e-12) << gi << "," << ei;
    }
  }
}

TEST_F(SweepTest, MonotoneRowsAndColumns) {
  const auto grid = sweep(*profiles_, gammas_, epsilons_, 5.0);
  for (std::size_t gi = 0; gi < gammas_.size(); ++gi) {
    for (std::size_t ei = 0; ei < epsilons_.size(); ++ei) {
      const double p = grid.at(gi, ei).p;
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
      if (ei > 0) EXPECT_GE(p, grid.at(gi, ei - 1).p);
      if (gi > 0) EXPECT_LE(p, grid.at(gi - 1, ei).p);
    }
  }
}

TEST_F(SweepTest, ThreadCountDoesNotChangeGrid) {
  const auto a = sweep(*profiles_, gammas_, epsilons_, 5.0, {1, 64});
  const auto b = sweep(*profiles_, gammas_, epsilons_, 5.0, {8, 64});
  for (std::size_t i = 0; i < a.cells.size(); ++i) EXPECT_EQ(a.cells[i].p, b.cells[i].p);
}

TEST_F(SweepTest, AveragedRatio) {
  const auto g = sweep(*profiles_, gammas_, epsilons_, 5.0);
  const auto r = averaged_boolean_ratio(g, g);
  EXPECT_EQ(r.status, RatioStatus::ok);
  EXPECT_EQ(r.value, 1.0);
  const auto other = sweep(*profiles_, gammas_, axis_values(0.0, 0.5, 0.02), 5.0);
  EXPECT_THROW(averaged_boolean_ratio(g, other), Error);
  SweepGrid zero = g;
  for (auto& c : zero.cells) c.p = 0.0;
  EXPECT_EQ(averaged_boolean_ratio(zero, zero).status, RatioStatus::indeterminate);
}

TEST(Sweep, RejectsBadAxes) {
  ErrorProfiles p(2, EstimateMethod::grid);
  p.add(Path{0.0, 0.0}, Path{0.1, 0.2}, 1.0);
  const std::vector<double> g = {0.9}, e = {0.1, 0.0};
  EXPECT_THROW(sweep(p, g, e, 5.0), Error);
  EXPECT_THROW(sweep(p, g, std::vector<double>{}, 5.0), Error);
  EXPECT_THROW(sweep(p, g, std::vector<double>{0.1}, 0.5), Error);
}

TEST(PathConfidenceBand, GaussianQuantiles) {
  const auto band = path_confidence_band(noisy_paths(0.0, 2.0, 4), 0.95, 40000, 3);
  ASSERT_EQ(band.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    const double mu = 0.01 * static_cast<double>(i);
    EXPECT_NEAR(band[i].intervals[0].lo, mu - 1.96 * 2.0, 0.08);
    EXPECT_NEAR(band[i].intervals[0].hi, mu + 1.96 * 2.0, 0.08);
  }
  const auto zero = path_confidence_band(DiracDelta{Path{1.0, 2.0}}, 0.95, 1000, 3);
  EXPECT_EQ(zero[1].intervals[0].lo, 2.0);
  EXPECT_EQ(zero[1].intervals[0].hi, 2.0);
  EXPECT_THROW(path_confidence_band(noisy_paths(0.0, 1.0, 2), 0.95, 10, 3), Error);
}

}  // namespace
}  // namespace bvm
