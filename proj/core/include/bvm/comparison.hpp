#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bvm/distributions.hpp"
#include "bvm/value.hpp"

namespace bvm {

/// Names of the comparison value functions f(zhat, z).
enum class ComparisonKind {
  abs_diff,
  sq_diff,
  mean_abs_error,
  max_abs_error,
  per_point_abs_error,
  area_metric,
  binned_prob_diff,
  kl,
  sym_kl,
  js,
  hellinger,
  identity_statistic,
};

struct ComparisonFnSpec {
  ComparisonKind kind = ComparisonKind::abs_diff;
  std::size_t index = 0;  // per_point_abs_error: path coordinate
  std::size_t bins = 64;  // histogram bins when pdf-type functions receive raw samples

  friend bool operator==(const ComparisonFnSpec&, const ComparisonFnSpec&) = default;
};

std::string_view comparison_name(ComparisonKind kind);
std::optional<ComparisonKind> parse_comparison(std::string_view name);
bool is_symmetric(ComparisonKind kind);

/// Evaluates f(zhat, z). The divergence family reports G(z || zhat), i.e.
/// the data pdf relative to the model pdf; raw sample paths are binned with
/// `spec.bins` equal-width bins over the pooled range. Throws bvm::Error on a
/// value-kind mismatch.
double compare(const ComparisonFnSpec& spec, const Value& zhat, const Value& z);

double mean_abs_error(std::span<const double> yhat, std::span<const double> y);
double max_abs_error(std::span<const double> yhat, std::span<const double> y);
/// Fraction of coordinates with |yhat_i - y_i| <= eps.
double fraction_within(std::span<const double> yhat, std::span<const double> y, double eps);
/// Fraction of data points lying inside the matching per-point region.
double coverage_fraction(std::span<const double> y, std::span<const ConfidenceRegion> band);

Ecdf ecdf(std::vector<double> samples);

/// Exact integral of |F1 - F2| over the merged breakpoints.
double area_metric(const Ecdf& f1, const Ecdf& f2);

/// Sum over bins of |p_i - q_i|, in [0, 2].
double binned_prob_diff(const BinnedPdf& p, const BinnedPdf& q);

enum class DivergenceKind { kl, sym_kl, js, hellinger };

/// Divergences in nats. KL(p||q) is +infinity when some p_i > 0 has q_i = 0.
/// Hellinger returns H with H^2 = 1 - sum_i sqrt(p_i q_i).
double divergence(DivergenceKind kind, const BinnedPdf& p, const BinnedPdf& q);

}  // namespace bvm
