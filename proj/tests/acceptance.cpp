// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bvm/comparison.hpp"
#include "bvm/engine.hpp"
#include "bvm/metrics.hpp"
#include "reproduce.hpp"

namespace {

using namespace bvm;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " failed: " << what << ";";
    }
  }
};

constexpr std::size_t kSeeds = 10;

Outcome ex53(bool uncertain, double lo, double hi, double max_seconds) {
  Outcome o;
  const auto r = cli::run_ex53(uncertain);
  auto agree = [](const SweepGrid& g) {
    return std::count_if(g.cells.begin(), g.cells.end(), [](const BvmEstimate& c) { return c.p > 0.0; });
  };
  o.detail << "cells " << r.model1.gammas.size() << "x" << r.model1.epsilons.size() << ", ratio "
           << (r.averaged.status == RatioStatus::ok ? std::to_string(r.averaged.value) : "n/a") << " in [" << lo
           << ", " << hi << "], " << r.seconds << " s;";
  o.require(r.model1.gammas.size() == 26 && r.model1.epsilons.size() == 101, "grid is 26x101");
  o.require(r.averaged.status == RatioStatus::ok && r.averaged.value >= lo && r.averaged.value <= hi,
            "averaged ratio in range");
  o.require(r.seconds < max_seconds, "runtime");
  if (!uncertain) {
    for (const auto* g : {&r.model1, &r.model2}) {
      o.require(std::all_of(g->cells.begin(), g->cells.end(),
                            [](const BvmEstimate& c) { return c.p == 0.0 || c.p == 1.0; }),
                "cells are Boolean");
    }
    o.detail << " agreeing cells " << agree(r.model1) << " vs " << agree(r.model2) << ";";
    o.require(agree(r.model2) > agree(r.model1), "model 2 agrees on more cells");
  } else {
    const auto ratios = cell_ratios(r.model1, r.model2);
    std::size_t above = 0;
    const std::size_t ne = r.model1.epsilons.size();
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      if (r.model1.epsilons[i % ne] == 0.0) continue;
      if (ratios[i].status == RatioStatus::infinite || (ratios[i].status == RatioStatus::ok && ratios[i].value > 1.0))
        ++above;
    }
    o.detail << " cells above one (eps > 0): " << above << ";";
    o.require(above == 0, "per-cell ratio <= 1");
  }
  return o;
}

Outcome ex52(bool uncertain) {
  Outcome o;
  std::size_t a = 0, b = 0;
  for (std::size_t i = 0; i < kSeeds; ++i) {
    const auto s = cli::run_ex52(static_cast<RngSeed>(i));
    if (!uncertain) {
      a += s.det_threshold >= 0.95;
      b += s.det_compound == 0.0;
    } else {
      a += s.unc_compound >= 0.85 && s.unc_compound <= 0.98;
      b += s.unc_threshold >= 0.90;
    }
  }
  if (!uncertain) {
    o.detail << "P(A|<eps>=0.46) >= 0.95 on " << a << "/10 seeds; compound exactly 0 on " << b << "/10;";
    o.require(a >= 9, "threshold on >= 9/10 seeds");
    o.require(b == kSeeds, "compound is 0 on every seed");
  } else {
    o.detail << "compound in [0.85, 0.98] on " << a << "/10 seeds; P(A|<eps>=0.9) >= 0.90 on " << b << "/10;";
    o.require(a >= 8, "compound on >= 8/10 seeds");
    o.require(b >= 8, "threshold on >= 8/10 seeds");
  }
  return o;
}

Outcome ex51() {
  Outcome o;
  const auto models = cli::run_ex51(0);
  o.require(models.size() == 3, "three models");
  if (models.size() != 3) return o;
  for (const auto& m : models) {
    const double se = std::hypot(m.product.std_error, m.joint_mc.std_error);
    o.detail << " sd " << m.model_std << ": product " << m.product.p << ", joint " << m.joint_mc.p << ";";
    o.require(std::abs(m.product.p - m.joint_mc.p) <= 3.0 * se, "product matches joint MC");
  }
  o.require(models[1].product.p > models[0].product.p && models[1].product.p > models[2].product.p,
            "middle model strictly highest");
  return o;
}

Outcome hypothesis() {
  Outcome o;
  double worst = 0.0;
  const std::vector<Distribution> data = {Normal{0, 1}, StudentT{1.0, 3.0, 2.0}, Uniform{-1, 3}};
  for (const auto& d : data) {
    for (double alpha : {0.01, 0.05, 0.5}) {
      worst = std::max(worst, std::abs(classical_hypothesis(d, alpha).estimate.p - (1.0 - alpha)));
    }
  }
  o.detail << "max |p - (1 - alpha)| = " << worst << ";";
  o.require(worst <= 1e-9, "within 1e-9");
  return o;
}

Outcome exact_agreement() {
  Outcome o;
  const auto rule = AgreementRule::threshold(ComparisonKind::abs_diff, 0.0);
  const double eq = estimate_bvm_mc(Scenario{DiracDelta{2.5}, DiracDelta{2.5}, rule, {}}, 1000, 1).p;
  const double ne = estimate_bvm_mc(Scenario{DiracDelta{2.5}, DiracDelta{2.6}, rule, {}}, 1000, 1).p;
  const double eq_grid = estimate_bvm_grid(rule, {{2.5, 1.0}}, {{2.5, 1.0}}).p;
  o.detail << "equal " << eq << ", unequal " << ne << ";";
  o.require(eq == 1.0 && eq_grid == 1.0, "equal values give exactly 1");
  o.require(ne == 0.0, "unequal values give exactly 0");
  return o;
}

Outcome frequentist_equivalence() {
  Outcome o;
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double model_mean = 4.0 * u(gen) - 2.0;
    const DataSummary data{4.0 * u(gen) - 2.0, 0.1 + 2.0 * u(gen), static_cast<std::size_t>(2 + 40 * u(gen))};
    const double eps = 0.01 + 2.0 * u(gen);
    const double f = frequentist(model_mean, data, AgreementRule::threshold(ComparisonKind::abs_diff, eps)).p;
    const double r = reliability(DiracDelta{model_mean}, data.mean_distribution(), eps, 1, 0).p;
    worst = std::max(worst, std::abs(f - r));
  }
  o.detail << "50 fixtures, max |frequentist - reliability| = " << worst << ";";
  o.require(worst <= 1e-6, "within 1e-6");
  return o;
}

Outcome conjugate_evidence() {
  Outcome o;
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  int ok = 0;
  double worst = 0.0;
  const std::vector<double> xs = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (int t = 0; t < 20; ++t) {
    const double sigma = 0.3 + 0.7 * u(gen);
    const double tau = 0.3 + 1.2 * u(gen);
    Path y;
    for (std::size_t i = 0; i < xs.size(); ++i) y.push_back(z(gen));
    const double n = static_cast<double>(y.size());
    const double s2 = sigma * sigma, t2 = tau * tau;
    double sum = 0.0, sum_sq = 0.0;
    for (double v : y) {
      sum += v;
      sum_sq += v * v;
    }
    const double exact = -0.5 * (n * std::log(2.0 * std::numbers::pi) + (n - 1.0) * std::log(s2) +
                                 std::log(s2 + n * t2) + (sum_sq - t2 * sum * sum / (s2 + n * t2)) / s2);
    const auto e = bayesian_evidence(ModelFunction::polynomial({0}), IndependentProduct{{Normal{0, tau}}},
                                     GaussianLikelihoodSpec{sigma, y, InputGrid(xs)}, 100000,
                                     static_cast<RngSeed>(100 + t));
    const double dev = std::abs(e.log_evidence - exact) / e.log_std_error;
    worst = std::max(worst, dev);
    ok += dev <= 3.0;
  }
  o.detail << ok << "/20 triples within 3 se (worst " << worst << " se);";
  o.require(ok == 20, "every triple within 3 se");
  return o;
}

Outcome properties() {
  Outcome o;
  const ComparisonFnSpec abs{ComparisonKind::abs_diff};
  const Distribution model = StudentT{0.3, 4.0, 1.0};
  const Distribution data = Normal{0.0, 0.7};
  const std::size_t k = 20000;

  // Bounds and epsilon-monotonicity on shared samples.
  double prev = -1.0;
  bool bounded = true, monotone = true;
  for (double eps = 0.0; eps <= 3.0; eps += 0.25) {
    const double p = estimate_bvm_mc(Scenario{model, data, AgreementRule::threshold(abs, eps), {}}, k, 5).p;
    bounded = bounded && p >= 0.0 && p <= 1.0;
    monotone = monotone && p >= prev;
    prev = p;
  }
  const double soft =
      estimate_bvm_mc(Scenario{model, data, rules::SoftExponential{abs, 0.2, 1.5}, {}}, k, 5).p;
  bounded = bounded && soft >= 0.0 && soft <= 1.0;
  o.require(bounded, "probability bounds");
  o.require(monotone, "epsilon monotonicity");

  // And/Or against their children on shared samples.
  const auto a = AgreementRule::threshold(abs, 0.5);
  const auto b = AgreementRule(rules::Interval{abs, 0.2, 1.5});
  auto p_of = [&](const AgreementRule& r) { return estimate_bvm_mc(Scenario{model, data, r, {}}, k, 6).p; };
  const double pa = p_of(a), pb = p_of(b);
  const double p_and = p_of(compose(BoolOp::op_and, {a, b}));
  const double p_or = p_of(compose(BoolOp::op_or, {a, b}));
  o.require(p_and <= std::min(pa, pb) && p_or >= std::max(pa, pb) && std::abs(p_and + p_or - pa - pb) < 1e-12,
            "And/Or inequalities");

  // Soft tolerance against an explicit two-level average over epsilon.
  const double shift = 0.2, rate = 1.5;
  const auto soft_est = estimate_bvm_mc(Scenario{model, data, rules::SoftExponential{abs, shift, rate}, {}}, 100000, 7);
  const std::size_t outer = 400, inner = 2000;
  double mean = 0.0, sq = 0.0;
  for (std::size_t j = 0; j < outer; ++j) {
    DrawRng rng(7, streams::kAuxiliary, j);
    const double eps = shift - std::log(rng.uniform()) / rate;
    const double p = estimate_bvm_mc(Scenario{model, data, AgreementRule::threshold(abs, eps), {}}, inner,
                                     static_cast<RngSeed>(1000 + j))
                         .p;
    mean += p;
    sq += p * p;
  }
  mean /= static_cast<double>(outer);
  const double nested_se =
      std::sqrt(std::max(0.0, sq / static_cast<double>(outer) - mean * mean) / static_cast<double>(outer - 1));
  const double soft_se = std::hypot(soft_est.std_error, nested_se);
  o.detail << " soft " << soft_est.p << " vs nested " << mean << ";";
  o.require(std::abs(soft_est.p - mean) <= 3.0 * soft_se, "soft kernel matches nested MC");

  // MC against enumeration on categorical scenarios.
  const Categorical cm{{0.0, 1.0, 2.0, 3.0}, {0.1, 0.2, 0.3, 0.4}};
  const Categorical cd{{0.0, 1.0, 2.0}, {0.5, 0.3, 0.2}};
  double exact = 0.0;
  for (std::size_t i = 0; i < cm.probs.size(); ++i) {
    for (std::size_t j = 0; j < cd.probs.size(); ++j) {
      if (std::abs(std::get<double>(cm.values[i]) - std::get<double>(cd.values[j])) <= 1.0)
        exact += cm.probs[i] * cd.probs[j];
    }
  }
  int within = 0;
  for (RngSeed s = 0; s < 100; ++s) {
    const auto e = estimate_bvm_mc(Scenario{cm, cd, AgreementRule::threshold(abs, 1.0), {}}, 5000, s);
    within += std::abs(e.p - exact) <= 3.0 * std::sqrt(exact * (1.0 - exact) / 5000.0);
  }
  o.detail << " categorical " << within << "/100 seeds within 3 sigma;";
  o.require(within >= 99, "MC vs enumeration");

  // Thread-count determinism.
  const Scenario det{model, data, AgreementRule::threshold(abs, 0.4), {}};
  const auto e1 = estimate_bvm_mc(det, 100000, 11, {1, 4096});
  const auto e8 = estimate_bvm_mc(det, 100000, 11, {8, 4096});
  IndependentProduct paths;
  for (int i = 0; i < 20; ++i) paths.components.emplace_back(Normal{0.05 * i, 0.2});
  const Scenario path_s{paths, DiracDelta{Path(20, 0.5)}, AgreementRule::always(true), {}};
  const auto gs = axis_values(0.75, 1.0, 0.05);
  const auto es = axis_values(0.0, 1.0, 0.05);
  const auto s1 = sweep(profiles_from_mc(path_s, 2000, 12, {1, 256}), gs, es, 5.0, {1, 256});
  const auto s8 = sweep(profiles_from_mc(path_s, 2000, 12, {8, 256}), gs, es, 5.0, {8, 256});
  bool same = e1.p == e8.p && e1.std_error == e8.std_error;
  for (std::size_t i = 0; i < s1.cells.size(); ++i) same = same && s1.cells[i].p == s8.cells[i].p;
  o.require(same, "1 vs 8 threads bit-identical");

  // Area metric equals the Wasserstein-1 distance of equal-size samples.
  std::mt19937_64 gen(13);
  std::normal_distribution<double> z(0.0, 1.0);
  double worst_area = 0.0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(50), y(50);
    for (auto& v : x) v = z(gen);
    for (auto& v : y) v = 0.5 + 2.0 * z(gen);
    const double area = area_metric(ecdf(x), ecdf(y));
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    double w = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) w += std::abs(x[i] - y[i]) / static_cast<double>(x.size());
    worst_area = std::max(worst_area, std::abs(area - w));
  }
  o.require(worst_area < 1e-9, "area metric equals Wasserstein-1");

  // Divergences are nonnegative and vanish on equal pdfs.
  bool div_ok = true;
  std::uniform_real_distribution<double> u(0.01, 1.0);
  const std::vector<double> edges = {0, 1, 2, 3, 4, 5};
  for (int t = 0; t < 100; ++t) {
    std::vector<double> p(5), q(5);
    double sp = 0.0, sq2 = 0.0;
    for (int i = 0; i < 5; ++i) {
      sp += p[i] = u(gen);
      sq2 += q[i] = u(gen);
    }
    for (int i = 0; i < 5; ++i) {
      p[i] /= sp;
      q[i] /= sq2;
    }
    const BinnedPdf bp(edges, p), bq(edges, q);
    for (auto kind : {DivergenceKind::kl, DivergenceKind::sym_kl, DivergenceKind::js, DivergenceKind::hellinger}) {
      div_ok = div_ok && divergence(kind, bp, bq) >= 0.0 && std::abs(divergence(kind, bp, bp)) < 1e-12;
    }
  }
  o.require(div_ok, "divergence nonnegativity and zero on equal");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"ex-5.3 deterministic reproduction", [] { return ex53(false, 0.35, 0.60, 30.0); }},
      {"ex-5.3 uncertain reproduction", [] { return ex53(true, 0.63, 0.87, 180.0); }},
      {"ex-5.2 deterministic model", [] { return ex52(false); }},
      {"ex-5.2 uncertain model", [] { return ex52(true); }},
      {"ex-5.1 statistical power ranking", ex51},
      {"classical hypothesis is 1 - alpha", hypothesis},
      {"exact agreement of Diracs", exact_agreement},
      {"frequentist equals reliability", frequentist_equivalence},
      {"conjugate evidence oracle", conjugate_evidence},
      {"property suites", properties},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what();
    }
    all = all && o.pass;
    std::cout << "criterion " << (i + 1) << ": " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << "  ["
              << o.detail.str() << "]" << std::endl;
  }
  return all ? 0 : 1;
}
