#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace bvm {

using Path = std::vector<double>;

/// Right-continuous empirical CDF; holds the sorted samples.
class Ecdf {
 public:
  /// Throws bvm::Error on empty input.
  explicit Ecdf(std::vector<double> samples);

  double operator()(double x) const;

  std::span<const double> sorted() const { return sorted_; }
  std::size_t size() const { return sorted_.size(); }

  friend bool operator==(const Ecdf&, const Ecdf&) = default;

 private:
  std::vector<double> sorted_;
};

/// Probability masses over contiguous bins `[edges[i], edges[i+1])`.
class BinnedPdf {
 public:
  /// Requires edges strictly increasing, masses.size() == edges.size() - 1,
  /// masses nonnegative and summing to 1 within 1e-9.
  BinnedPdf(std::vector<double> edges, std::vector<double> masses);

  /// Equal-width histogram of `samples` over the given edges. Samples outside
  /// the edges are clamped into the end bins.
  static BinnedPdf histogram(std::span<const double> samples, std::vector<double> edges);

  /// `bins` equal-width edges over the pooled range of both sample sets,
  /// expanded by 1% on each side.
  static std::vector<double> pooled_edges(std::span<const double> a, std::span<const double> b,
                                          std::size_t bins);

  std::span<const double> edges() const { return edges_; }
  std::span<const double> masses() const { return masses_; }
  std::size_t bins() const { return masses_.size(); }

  friend bool operator==(const BinnedPdf&, const BinnedPdf&) = default;

 private:
  std::vector<double> edges_;
  std::vector<double> masses_;
};

/// A comparison value: scalar, output path, categorical label, ECDF or binned pdf.
using Value = std::variant<double, Path, std::string, Ecdf, BinnedPdf>;

const char* value_kind_name(const Value& v);

}  // namespace bvm
