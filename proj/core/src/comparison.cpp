#include "bvm/comparison.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "bvm/error.hpp"

namespace bvm {

namespace {

constexpr std::array<std::string_view, 12> kNames = {
    "abs_diff", "sq_diff", "mean_abs_error", "max_abs_error", "per_point_abs_error", "area_metric",
    "binned_prob_diff", "kl", "sym_kl", "js", "hellinger", "identity"};

void check_lengths(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error("path length mismatch (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw Error("paths must be nonempty");
}

void check_edges(const BinnedPdf& p, const BinnedPdf& q) {
  if (p.bins() != q.bins() || !std::equal(p.edges().begin(), p.edges().end(), q.edges().begin())) {
    throw Error("binned pdfs have different bin edges");
  }
}

double kl_nats(std::span<const double> p, std::span<const double> q) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    total += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(total, 0.0);
}

double scalar_of(const Value& v, const char* fn) {
  if (const auto* x = std::get_if<double>(&v)) return *x;
  throw Error(std::string(fn) + ": expected a scalar, got " + value_kind_name(v));
}

const Path& path_of(const Value& v, const char* fn) {
  if (const auto* p = std::get_if<Path>(&v)) return *p;
  throw Error(std::string(fn) + ": expected a path, got " + value_kind_name(v));
}

std::pair<BinnedPdf, BinnedPdf> as_pdfs(const Value& zhat, const Value& z, std::size_t bins, const char* fn) {
  if (const auto* a = std::get_if<BinnedPdf>(&zhat)) {
    if (const auto* b = std::get_if<BinnedPdf>(&z)) return {*a, *b};
  }
  const auto* a = std::get_if<Path>(&zhat);
  const auto* b = std::get_if<Path>(&z);
  if (!a || !b) {
    throw Error(std::string(fn) + ": expected two binned pdfs or two sample vectors, got " + value_kind_name(zhat) +
                " and " + value_kind_name(z));
  }
  auto edges = BinnedPdf::pooled_edges(*a, *b, bins);
  return {BinnedPdf::histogram(*a, edges), BinnedPdf::histogram(*b, edges)};
}

Ecdf as_ecdf(const Value& v) {
  if (const auto* e = std::get_if<Ecdf>(&v)) return *e;
  if (const auto* p = std::get_if<Path>(&v)) return Ecdf(*p);
  throw Error(std::string("area_metric: expected an ecdf or sample vector, got ") + value_kind_name(v));
}

}  // namespace

std::string_view comparison_name(ComparisonKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

std::optional<ComparisonKind> parse_comparison(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<ComparisonKind>(i);
  }
  if (name == "identity_statistic") return ComparisonKind::identity_statistic;
  return std::nullopt;
}

bool is_symmetric(ComparisonKind kind) {
  switch (kind) {
    case ComparisonKind::abs_diff:
    case ComparisonKind::sq_diff:
    case ComparisonKind::mean_abs_error:
    case ComparisonKind::max_abs_error:
    case ComparisonKind::per_point_abs_error:
    case ComparisonKind::area_metric:
    case ComparisonKind::binned_prob_diff:
    case ComparisonKind::sym_kl:
    case ComparisonKind::js:
    case ComparisonKind::hellinger:
      return true;
    case ComparisonKind::kl:
    case ComparisonKind::identity_statistic:
      return false;
  }
  return false;
}

double compare(const ComparisonFnSpec& spec, const Value& zhat, const Value& z) {
  switch (spec.kind) {
    case ComparisonKind::abs_diff:
      return std::abs(scalar_of(zhat, "abs_diff") - scalar_of(z, "abs_diff"));
    case ComparisonKind::sq_diff: {
      const double d = scalar_of(zhat, "sq_diff") - scalar_of(z, "sq_diff");
      return d * d;
    }
    case ComparisonKind::mean_abs_error:
      return mean_abs_error(path_of(zhat, "mean_abs_error"), path_of(z, "mean_abs_error"));
    case ComparisonKind::max_abs_error:
      return max_abs_error(path_of(zhat, "max_abs_error"), path_of(z, "max_abs_error"));
    case ComparisonKind::per_point_abs_error: {
      const auto& a = path_of(zhat, "per_point_abs_error");
      const auto& b = path_of(z, "per_point_abs_error");
      check_lengths(a, b);
      if (spec.index >= a.size()) throw Error("per_point_abs_error: index out of range");
      return std::abs(a[spec.index] - b[spec.index]);
    }
    case ComparisonKind::area_metric:
      return area_metric(as_ecdf(zhat), as_ecdf(z));
    case ComparisonKind::binned_prob_diff: {
      const auto [p, q] = as_pdfs(zhat, z, spec.bins, "binned_prob_diff");
      return binned_prob_diff(p, q);
    }
    case ComparisonKind::kl:
    case ComparisonKind::sym_kl:
    case ComparisonKind::js:
    case ComparisonKind::hellinger: {
      const auto [model, data] = as_pdfs(zhat, z, spec.bins, "divergence");
      const auto kind = static_cast<DivergenceKind>(static_cast<int>(spec.kind) - static_cast<int>(ComparisonKind::kl));
      return divergence(kind, data, model);
    }
    case ComparisonKind::identity_statistic:
      return scalar_of(zhat, "identity");
  }
  throw Error("unknown comparison function");
}

double mean_abs_error(std::span<const double> yhat, std::span<const double> y) {
  check_lengths(yhat, y);
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) total += std::abs(yhat[i] - y[i]);
  return total / static_cast<double>(y.size());
}

double max_abs_error(std::span<const double> yhat, std::span<const double> y) {
  check_lengths(yhat, y);
  double worst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) worst = std::max(worst, std::abs(yhat[i] - y[i]));
  return worst;
}

double fraction_within(std::span<const double> yhat, std::span<const double> y, double eps) {
  check_lengths(yhat, y);
  std::size_t inside = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (std::abs(yhat[i] - y[i]) <= eps) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(y.size());
}

double coverage_fraction(std::span<const double> y, std::span<const ConfidenceRegion> band) {
  if (y.size() != band.size()) throw Error("coverage: band length must equal path length");
  if (y.empty()) throw Error("coverage: paths must be nonempty");
  std::size_t inside = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (band[i].contains(y[i])) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(y.size());
}

Ecdf ecdf(std::vector<double> samples) { return Ecdf(std::move(samples)); }

double area_metric(const Ecdf& f1, const Ecdf& f2) {
  const auto a = f1.sorted();
  const auto b = f2.sorted();
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double area = 0.0;
  double x = std::min(a.front(), b.front());
  while (i < a.size() || j < b.size()) {
    // Consume every sample sitting at the current breakpoint.
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    if (i == a.size() && j == b.size()) break;
    const double next = std::min(i < a.size() ? a[i] : INFINITY, j < b.size() ? b[j] : INFINITY);
    area += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (next - x);
    x = next;
  }
  return area;
}

double binned_prob_diff(const BinnedPdf& p, const BinnedPdf& q) {
  check_edges(p, q);
  double total = 0.0;
  for (std::size_t i = 0; i < p.bins(); ++i) total += std::abs(p.masses()[i] - q.masses()[i]);
  return total;
}

double divergence(DivergenceKind kind, const BinnedPdf& p, const BinnedPdf& q) {
  check_edges(p, q);
  const auto pm = p.masses();
  const auto qm = q.masses();
  if (std::equal(pm.begin(), pm.end(), qm.begin())) return 0.0;
  switch (kind) {
    case DivergenceKind::kl:
      return kl_nats(pm, qm);
    case DivergenceKind::sym_kl:
      return kl_nats(pm, qm) + kl_nats(qm, pm);
    case DivergenceKind::js: {
      std::vector<double> mid(pm.size());
      for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (pm[i] + qm[i]);
      return 0.5 * kl_nats(pm, mid) + 0.5 * kl_nats(qm, mid);
    }
    case DivergenceKind::hellinger: {
      double bc = 0.0;
      for (std::size_t i = 0; i < pm.size(); ++i) bc += std::sqrt(pm[i] * qm[i]);
      return std::sqrt(std::max(0.0, 1.0 - bc));
    }
  }
  throw Error("unknown divergence");
}

}  // namespace bvm
