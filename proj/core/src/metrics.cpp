#include "bvm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bvm/error.hpp"
#include "overloaded.hpp"
#include "bvm/parallel.hpp"

namespace bvm {

namespace {

using detail::Overloaded;

constexpr double kLogTwoPi = 1.8378770664093454836;

struct NormalParts {
  double mean;
  double var;
};

std::optional<NormalParts> as_normal(const Distribution& d) {
  if (const auto* n = d.get_if<Normal>()) return NormalParts{n->mean, n->std * n->std};
  if (const auto* dirac = d.get_if<DiracDelta>()) {
    if (const auto* v = std::get_if<double>(&dirac->value)) return NormalParts{*v, 0.0};
  }
  return std::nullopt;
}

std::optional<double> dirac_value(const Distribution& d) {
  if (const auto* dirac = d.get_if<DiracDelta>()) {
    if (const auto* v = std::get_if<double>(&dirac->value)) return *v;
  }
  return std::nullopt;
}

/// Mass of [center - eps, center + eps] under a distribution with a CDF.
std::optional<double> window_mass(const Distribution& d, double center, double eps) {
  const auto hi = cdf(d, center + eps);
  const auto lo = cdf(d, std::nextafter(center - eps, -INFINITY));
  if (!hi || !lo) return std::nullopt;
  return std::clamp(*hi - *lo, 0.0, 1.0);
}

BvmEstimate closed_form(double p) {
  BvmEstimate est;
  est.p = std::clamp(p, 0.0, 1.0);
  est.method = EstimateMethod::closed_form;
  return est;
}

BvmEstimate indicator_average(double total, std::size_t n, RngSeed seed, bool hard, double total_sq) {
  BvmEstimate est;
  const double k = static_cast<double>(n);
  est.p = std::clamp(total / k, 0.0, 1.0);
  est.samples = n;
  est.seed = seed;
  est.method = EstimateMethod::mc;
  if (hard) {
    est.std_error = std::sqrt(est.p * (1.0 - est.p) / k);
  } else if (n > 1) {
    est.std_error = std::sqrt(std::max(0.0, (total_sq - k * est.p * est.p) / (k - 1.0)) / k);
  }
  return est;
}

/// Adaptive Simpson on [a, b] with the classic |S2 - S1| <= 15 tol test.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                        int depth, int min_depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || (min_depth <= 0 && std::abs(delta) <= 15.0 * tol)) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, min_depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, min_depth - 1);
}

/// Data-space points where a hard kernel on scalar (zhat, z) can jump.
void rule_breakpoints(const AgreementRule& rule, double zhat, std::vector<double>& out) {
  auto level = [&](const ComparisonFnSpec& fn, double c) {
    if (fn.kind == ComparisonKind::abs_diff) {
      out.push_back(zhat - c);
      out.push_back(zhat + c);
    } else if (fn.kind == ComparisonKind::sq_diff && c >= 0.0) {
      out.push_back(zhat - std::sqrt(c));
      out.push_back(zhat + std::sqrt(c));
    }
  };
  std::visit(Overloaded{
                 [&](const rules::Threshold& r) { level(r.fn, r.epsilon); },
                 [&](const rules::Interval& r) {
                   level(r.fn, r.lo);
                   level(r.fn, r.hi);
                 },
                 [&](const rules::SoftExponential& r) { level(r.fn, r.shift); },
                 [&](const rules::InRegion& r) {
                   if (r.side != rules::Side::data) return;
                   for (const auto& iv : r.region.intervals) {
                     out.push_back(iv.lo);
                     out.push_back(iv.hi);
                   }
                 },
                 [&](const rules::And& r) {
                   for (const auto& c : r.children) rule_breakpoints(c, zhat, out);
                 },
                 [&](const rules::Or& r) {
                   for (const auto& c : r.children) rule_breakpoints(c, zhat, out);
                 },
                 [&](const rules::Not& r) {
                   for (const auto& c : r.child) rule_breakpoints(c, zhat, out);
                 },
                 [](const auto&) {},
             },
             rule.node());
}

/// Integral of f over [0, 1]: uniform panels split at `cuts`, each piece
/// integrated by adaptive Simpson slightly inside its ends so a kernel jump
/// at a cut never lands on a node.
template <class F>
double integrate_unit_interval(const F& f, double tol, std::vector<double> cuts) {
  constexpr int kPanels = 256;
  for (int i = 0; i <= kPanels; ++i) cuts.push_back(static_cast<double>(i) / kPanels);
  std::erase_if(cuts, [](double u) { return !(u >= 0.0 && u <= 1.0); });
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double inset = (cuts[i + 1] - cuts[i]) * 1e-12;
    const double a = cuts[i] + inset;
    const double b = cuts[i + 1] - inset;
    if (!(b > a)) continue;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    total += adaptive_simpson(f, a, b, fa, fm, fb, whole, tol / kPanels, 48, 2);
  }
  return total;
}

}  // namespace

Distribution DataSummary::mean_distribution() const {
  if (n < 2) throw Error("data summary: n must be >= 2");
  if (!(std > 0.0)) throw Error("data summary: sample std must be > 0");
  return StudentT{mean, static_cast<double>(n - 1), std / std::sqrt(static_cast<double>(n))};
}

BvmEstimate reliability(const Distribution& model_mean, const Distribution& data_mean, double epsilon,
                        std::size_t samples, RngSeed seed, EngineOptions opts) {
  if (!model_mean.is_scalar() || !data_mean.is_scalar()) throw Error("reliability: distributions must be scalar");
  if (!(epsilon >= 0.0)) throw Error("reliability: epsilon must be >= 0");
  const auto m = as_normal(model_mean);
  const auto d = as_normal(data_mean);
  if (m && d) {
    const double mu = m->mean - d->mean;
    const double var = m->var + d->var;
    if (var == 0.0) return closed_form(std::abs(mu) <= epsilon ? 1.0 : 0.0);
    if (std::isinf(epsilon)) return closed_form(1.0);
    const double s = std::sqrt(2.0 * var);
    return closed_form(0.5 * (std::erfc((-epsilon - mu) / s) - std::erfc((epsilon - mu) / s)));
  }
  if (const auto v = dirac_value(model_mean)) {
    if (const auto p = window_mass(data_mean, *v, epsilon)) return closed_form(*p);
  }
  if (const auto v = dirac_value(data_mean)) {
    if (const auto p = window_mass(model_mean, *v, epsilon)) return closed_form(*p);
  }
  Scenario s{model_mean, data_mean, AgreementRule::threshold(ComparisonKind::abs_diff, epsilon), {}};
  return estimate_bvm_mc(s, samples, seed, opts);
}

BvmEstimate improved_reliability(const Distribution& model_path, const Distribution& data_path,
                                 std::span<const double> tolerances, std::size_t samples, RngSeed seed,
                                 EngineOptions opts) {
  const std::size_t n = model_path.dimension();
  if (data_path.dimension() != n || tolerances.size() != n) {
    throw Error("improved_reliability: path and tolerance lengths must match");
  }
  std::vector<AgreementRule> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    points.push_back(AgreementRule::threshold(ComparisonFnSpec{ComparisonKind::per_point_abs_error, i}, tolerances[i]));
  }
  Scenario s{model_path, data_path, compose(BoolOp::op_and, std::move(points)), {}};
  return estimate_bvm_mc(s, samples, seed, opts);
}

BvmEstimate frequentist(double model_mean, const DataSummary& data, const AgreementRule& rule) {
  const Distribution mu = data.mean_distribution();
  const Value zhat = model_mean;
  // Integrate over probability space so no tail mass is lost: mu = Q(u).
  auto integrand = [&](double u) {
    if (u <= 0.0 || u >= 1.0) {
      const double tail = u <= 0.0 ? -INFINITY : INFINITY;
      return evaluate_kernel(rule, zhat, tail);
    }
    return evaluate_kernel(rule, zhat, *quantile(mu, u));
  };
  std::vector<double> jumps;
  rule_breakpoints(rule, model_mean, jumps);
  std::vector<double> cuts;
  for (double z : jumps) {
    if (const auto u = cdf(mu, z)) cuts.push_back(*u);
  }
  return closed_form(integrate_unit_interval(integrand, 1e-10, std::move(cuts)));
}

BvmEstimate area_metric_validation(std::span<const double> model_samples, std::span<const double> data_samples,
                                   const AgreementRule& rule, std::optional<BootstrapOptions> bootstrap) {
  if (model_samples.empty() || data_samples.empty()) throw Error("area metric: samples must be nonempty");
  const Value model = Ecdf(std::vector<double>(model_samples.begin(), model_samples.end()));
  if (!bootstrap) {
    const Value data = Ecdf(std::vector<double>(data_samples.begin(), data_samples.end()));
    return closed_form(evaluate_kernel(rule, model, data));
  }
  if (bootstrap->resamples == 0) throw Error("area metric: bootstrap resamples must be >= 1");
  double total = 0.0;
  double total_sq = 0.0;
  std::vector<double> resample(data_samples.size());
  for (std::size_t r = 0; r < bootstrap->resamples; ++r) {
    DrawRng rng(bootstrap->seed, streams::kData, r);
    for (double& x : resample) x = data_samples[rng.below(data_samples.size())];
    const double w = evaluate_kernel(rule, model, Ecdf(resample));
    total += w;
    total_sq += w * w;
  }
  return indicator_average(total, bootstrap->resamples, bootstrap->seed, rule.is_hard(), total_sq);
}

std::vector<double> dirichlet_draw(std::span<const double> alpha, DrawRng& rng) {
  std::vector<double> out(alpha.size());
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i] > 0.0)) throw Error("dirichlet: concentrations must be positive");
    out[i] = rng.gamma(alpha[i]);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

BvmEstimate binned_pdf_metric(const BinnedPdf& model_pdf, std::span<const double> data_counts,
                              const AgreementRule& rule, std::size_t draws, RngSeed seed) {
  if (data_counts.size() != model_pdf.bins()) throw Error("binned pdf metric: bin count mismatch");
  if (draws == 0) throw Error("binned pdf metric: draws must be >= 1");
  std::vector<double> alpha(data_counts.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (!(data_counts[i] >= 0.0)) throw Error("binned pdf metric: counts must be nonnegative");
    alpha[i] = data_counts[i] + 1.0;
  }
  const Value model = model_pdf;
  const std::vector<double> edges(model_pdf.edges().begin(), model_pdf.edges().end());
  double total = 0.0;
  double total_sq = 0.0;
  for (std::size_t r = 0; r < draws; ++r) {
    DrawRng rng(seed, streams::kData, r);
    const Value data = BinnedPdf(edges, dirichlet_draw(alpha, rng));
    const double w = evaluate_kernel(rule, model, data);
    total += w;
    total_sq += w * w;
  }
  return indicator_average(total, draws, seed, rule.is_hard(), total_sq);
}

BvmEstimate divergence_validation(const BinnedPdf& model_pdf, const BinnedPdf& data_pdf, const AgreementRule& rule) {
  return closed_form(evaluate_kernel(rule, model_pdf, data_pdf));
}

BvmEstimate divergence_validation(const PdfSampler& model_pdf, const PdfSampler& data_pdf, const AgreementRule& rule,
                                  std::size_t draws, RngSeed seed) {
  if (draws == 0) throw Error("divergence validation: draws must be >= 1");
  double total = 0.0;
  double total_sq = 0.0;
  for (std::size_t r = 0; r < draws; ++r) {
    DrawRng model_rng(seed, streams::kModel, r);
    DrawRng data_rng(seed, streams::kData, r);
    const double w = evaluate_kernel(rule, model_pdf(model_rng), data_pdf(data_rng));
    total += w;
    total_sq += w * w;
  }
  return indicator_average(total, draws, seed, rule.is_hard(), total_sq);
}

HypothesisTestResult classical_hypothesis(const Distribution& data, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("classical hypothesis: alpha must be in (0, 1)");
  HypothesisTestResult out;
  out.acceptance = confidence_interval(data, 1.0 - alpha);
  // Under M = D the model statistic has the data's distribution, so the
  // probability of landing in the acceptance interval is its coverage.
  double p = 1.0 - alpha;
  if (cdf(data, 0.0) && !data.get_if<Categorical>() && !data.get_if<DiracDelta>()) {
    p = probability_in(data, out.acceptance);
  }
  out.estimate = closed_form(p);
  return out;
}

StatisticalPowerResult statistical_power_bvm(const Distribution& model, const Distribution& data, double alpha,
                                             double alpha_hat, RegionKind kind, EmpiricalOptions opts) {
  if (!(alpha >= 0.0 && alpha < 1.0) || !(alpha_hat >= 0.0 && alpha_hat < 1.0)) {
    throw Error("statistical power: alpha and alpha_hat must be in [0, 1)");
  }
  StatisticalPowerResult out;
  if (kind == RegionKind::interval) {
    out.data_region = confidence_interval(data, 1.0 - alpha, opts);
    out.model_region = confidence_interval(model, 1.0 - alpha_hat, opts);
  } else {
    out.data_region = confidence_set(data, 1.0 - alpha, 512, opts);
    out.model_region = confidence_set(model, 1.0 - alpha_hat, 512, opts);
  }
  out.model_power = probability_in(model, out.data_region, opts);
  out.data_power = probability_in(data, out.model_region, opts);
  out.systematic_error = alpha + alpha_hat - alpha * alpha_hat;
  const bool closed = cdf(model, 0.0).has_value() && cdf(data, 0.0).has_value();
  out.estimate.p = out.model_power * out.data_power;
  out.estimate.method = closed ? EstimateMethod::closed_form : EstimateMethod::mc;
  if (!closed) {
    out.estimate.samples = opts.samples;
    out.estimate.seed = opts.seed;
  }
  return out;
}

double gaussian_log_likelihood(std::span<const double> yhat, const GaussianLikelihoodSpec& lik) {
  if (yhat.size() != lik.data.size()) throw Error("likelihood: model path and data lengths differ");
  if (!(lik.sigma > 0.0)) throw Error("likelihood: sigma must be > 0");
  double ss = 0.0;
  for (std::size_t i = 0; i < yhat.size(); ++i) {
    const double r = yhat[i] - lik.data[i];
    ss += r * r;
  }
  const double n = static_cast<double>(yhat.size());
  return -0.5 * ss / (lik.sigma * lik.sigma) - 0.5 * n * (kLogTwoPi + 2.0 * std::log(lik.sigma));
}

EvidenceEstimate bayesian_evidence(const ModelFunction& model, const Distribution& prior,
                                   const GaussianLikelihoodSpec& lik, std::size_t samples, RngSeed seed,
                                   EngineOptions opts) {
  if (samples == 0) throw Error("evidence: K must be >= 1");
  if (lik.data.size() != lik.grid.size()) throw Error("evidence: data length must equal grid length");
  if (prior.dimension() != model.parameter_count()) throw Error("evidence: prior dimension mismatch");
  std::vector<double> log_l(samples);
  const std::size_t chunk = std::max<std::size_t>(opts.chunk_size, 1);
  parallel_for((samples + chunk - 1) / chunk, opts.threads, [&](std::size_t c) {
    std::vector<double> theta(model.parameter_count());
    Path yhat(lik.grid.size());
    const std::size_t end = std::min(samples, (c + 1) * chunk);
    for (std::size_t k = c * chunk; k < end; ++k) {
      DrawRng rng(seed, streams::kModel, k);
      prior.draw_into(rng, theta);
      model.evaluate_into(theta, lik.grid, yhat);
      log_l[k] = gaussian_log_likelihood(yhat, lik);
    }
  });
  const double peak = *std::max_element(log_l.begin(), log_l.end());
  EvidenceEstimate est;
  est.samples = samples;
  est.seed = seed;
  if (std::isinf(peak)) {
    est.log_evidence = peak;
    return est;
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double l : log_l) {
    const double r = std::exp(l - peak);
    sum += r;
    sum_sq += r * r;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  est.log_evidence = peak + std::log(mean);
  if (samples > 1) {
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    est.log_std_error = std::sqrt(var / n) / mean;
  }
  return est;
}

BayesFactor bayes_factor(double log_evidence, double log_evidence_alt) {
  const bool zero = log_evidence == -INFINITY;
  const bool zero_alt = log_evidence_alt == -INFINITY;
  if (zero && zero_alt) return {RatioStatus::indeterminate, 0.0, 0.0};
  if (zero_alt) return {RatioStatus::infinite, INFINITY, 0.0};
  const double log_k = log_evidence - log_evidence_alt;
  return {RatioStatus::ok, log_k, std::exp(log_k)};
}

}  // namespace bvm
