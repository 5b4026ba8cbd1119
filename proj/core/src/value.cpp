#include "bvm/value.hpp"

#include <algorithm>
#include <cmath>

#include "bvm/error.hpp"

namespace bvm {

Ecdf::Ecdf(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw Error("ecdf: at least one sample is required");
  std::sort(sorted_.begin(), sorted_.end());
}

double Ecdf::operator()(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

BinnedPdf::BinnedPdf(std::vector<double> edges, std::vector<double> masses)
    : edges_(std::move(edges)), masses_(std::move(masses)) {
  if (edges_.size() < 2) throw Error("binned pdf: need at least one bin");
  if (masses_.size() + 1 != edges_.size()) throw Error("binned pdf: masses must have edges.size() - 1 entries");
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (!(edges_[i] > edges_[i - 1])) throw Error("binned pdf: edges must be strictly increasing");
  }
  double total = 0.0;
  for (double m : masses_) {
    if (!(m >= 0.0)) throw Error("binned pdf: masses must be nonnegative");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("binned pdf: masses must sum to 1");
}

BinnedPdf BinnedPdf::histogram(std::span<const double> samples, std::vector<double> edges) {
  if (samples.empty()) throw Error("histogram: no samples");
  if (edges.size() < 2) throw Error("histogram: need at least one bin");
  const std::size_t bins = edges.size() - 1;
  std::vector<double> counts(bins, 0.0);
  for (double s : samples) {
    auto it = std::upper_bound(edges.begin(), edges.end(), s);
    std::size_t idx = it == edges.begin() ? 0 : static_cast<std::size_t>(it - edges.begin()) - 1;
    counts[std::min(idx, bins - 1)] += 1.0;
  }
  for (double& c : counts) c /= static_cast<double>(samples.size());
  return BinnedPdf(std::move(edges), std::move(counts));
}

std::vector<double> BinnedPdf::pooled_edges(std::span<const double> a, std::span<const double> b,
                                            std::size_t bins) {
  if (bins == 0) throw Error("histogram: bin count must be positive");
  if (a.empty() && b.empty()) throw Error("histogram: no samples");
  double lo = INFINITY;
  double hi = -INFINITY;
  for (auto s : {a, b}) {
    for (double x : s) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  double pad = 0.01 * (hi - lo);
  if (pad == 0.0) pad = 0.5 * std::max(1.0, std::abs(lo));
  lo -= pad;
  hi += pad;
  std::vector<double> edges(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) edges[i] = lo + width * static_cast<double>(i);
  edges.back() = hi;
  return edges;
}

const char* value_kind_name(const Value& v) {
  static constexpr const char* kNames[] = {"scalar", "path", "label", "ecdf", "binned_pdf"};
  return kNames[v.index()];
}

}  // namespace bvm
