#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "bvm/agreement.hpp"
#include "bvm/distributions.hpp"
#include "bvm/random.hpp"
#include "bvm/value.hpp"

namespace bvm {

/// Draws a correlated (zhat, z) pair; replaces the independent marginals.
using JointSampler = std::function<std::pair<Value, Value>(DrawRng&)>;

/// The BVM inputs: model and data distributions over comparison values and
/// the agreement rule (the comparison function lives inside the rule).
struct Scenario {
  Distribution model;
  Distribution data;
  AgreementRule rule;
  JointSampler joint;
};

enum class EstimateMethod { mc, grid, closed_form };
std::string_view method_name(EstimateMethod m);

/// Estimated probability of agreement P(A|M,D).
struct BvmEstimate {
  double p = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  RngSeed seed = 0;
  EstimateMethod method = EstimateMethod::mc;
};

struct EngineOptions {
  unsigned threads = 0;         // 0: BVM_THREADS or hardware concurrency
  std::size_t chunk_size = 4096;  // draws per work unit; part of the result contract
};

/// Monte Carlo average of the agreement kernel over K draws. Draw k uses
/// model stream (seed, model, k) and data stream (seed, data, k), so the
/// result is bit-identical for any thread count.
BvmEstimate estimate_bvm_mc(const Scenario& s, std::size_t samples, RngSeed seed, EngineOptions opts = {});

struct WeightedValue {
  Value value;
  double weight = 0.0;
};
using WeightedValues = std::vector<WeightedValue>;

/// Exact double sum over two weighted value lists.
BvmEstimate estimate_bvm_grid(const AgreementRule& rule, const WeightedValues& model, const WeightedValues& data,
                              EngineOptions opts = {});

struct GridSpec {
  std::size_t values_per_dimension = 20;
  double span = 3.0;  // +- span standard deviations (scales) for Normal and StudentT
};

/// Deterministic weighted discretization: Normal/StudentT on equally spaced
/// points over +- span sigma with density weights renormalized over the grid,
/// Uniform on bin midpoints, Categorical and Empirical on their atoms.
/// IndependentProduct takes the Cartesian product and PushForward maps the
/// prior grid through the model.
WeightedValues discretize(const Distribution& dist, GridSpec spec = {});

/// Per-point central confidence intervals of a path distribution, from the
/// empirical quantiles of `samples` draws on the band stream.
std::vector<ConfidenceRegion> path_confidence_band(const Distribution& paths, double level, std::size_t samples,
                                                   RngSeed seed, EngineOptions opts = {});

/// Histogram of f(zhat, z) over K sampled pairs.
struct ComparisonDensity {
  std::vector<double> edges;
  std::vector<double> masses;
  std::size_t samples = 0;
};

ComparisonDensity comparison_density(const Scenario& s, const ComparisonFnSpec& fn, std::size_t samples,
                                     std::size_t bins, RngSeed seed, EngineOptions opts = {});

/// Sum of bin mass times the kernel at the bin midpoint. The rule is over the
/// comparison value f and is evaluated as evaluate_kernel(rule, f, 0.0).
double bvm_from_density(const ComparisonDensity& d, const AgreementRule& rule_over_f);

enum class RatioStatus { ok, indeterminate, infinite };
std::string_view status_name(RatioStatus s);

struct Ratio {
  RatioStatus status = RatioStatus::ok;
  double value = 0.0;  // meaningful only when status == ok
};

/// K(B) = p / p'. 0/0 is indeterminate, x/0 with x > 0 is infinite.
Ratio bvm_factor(const BvmEstimate& p, const BvmEstimate& p_alt);
Ratio ratio_of(double num, double den);

/// R(B) = K(B) * prior / prior_alt; non-ok factors propagate.
Ratio bvm_ratio(const Ratio& factor, double prior, double prior_alt);

/// Evenly stepped axis lo, lo + step, ..., hi (inclusive, snapped to 1e-12).
std::vector<double> axis_values(double lo, double hi, double step);

/// Sorted absolute error vectors of weighted (model path, data path) pairs,
/// computed once and reused for every (gamma, epsilon) cell.
class ErrorProfiles {
 public:
  ErrorProfiles(std::size_t points, EstimateMethod method, RngSeed seed = 0);

  /// Adds |yhat - y| sorted ascending.
  void add(std::span<const double> yhat, std::span<const double> y, double weight);

  std::size_t size() const { return weights_.size(); }
  std::size_t points() const { return points_; }
  std::span<const double> sorted_errors(std::size_t i) const {
    return std::span<const double>(errors_).subspan(i * points_, points_);
  }
  double weight(std::size_t i) const { return weights_[i]; }
  EstimateMethod method() const { return method_; }
  RngSeed seed() const { return seed_; }

 private:
  std::size_t points_;
  EstimateMethod method_;
  RngSeed seed_;
  std::vector<double> errors_;
  std::vector<double> weights_;
};

/// Every weighted model path against every weighted data path.
ErrorProfiles profiles_from_grid(const WeightedValues& model, const WeightedValues& data, EngineOptions opts = {});
/// K independent (model path, data path) draws, each weighted 1/K.
ErrorProfiles profiles_from_mc(const Scenario& s, std::size_t samples, RngSeed seed, EngineOptions opts = {});

/// BVM over a (gamma, epsilon) grid for the GammaEpsilon rule at fixed m.
struct SweepGrid {
  std::vector<double> gammas;
  std::vector<double> epsilons;
  std::vector<BvmEstimate> cells;  // row-major: gamma index, then epsilon index

  const BvmEstimate& at(std::size_t gi, std::size_t ei) const { return cells[gi * epsilons.size() + ei]; }
  double total() const;
};

/// Epsilons must be ascending. Each cell equals gamma_epsilon_eval averaged
/// over the profiles.
SweepGrid sweep(const ErrorProfiles& profiles, std::span<const double> gammas, std::span<const double> epsilons,
                double m, EngineOptions opts = {});

struct SweepEstimator {
  EstimateMethod method = EstimateMethod::grid;
  std::size_t samples = 10000;
  RngSeed seed = 0;
  GridSpec grid;
};

/// Builds the error profiles for a path-valued scenario and sweeps them.
SweepGrid sweep(const Scenario& s, std::span<const double> gammas, std::span<const double> epsilons, double m,
                const SweepEstimator& estimator, EngineOptions opts = {});

/// Sum of grid-1 entries over sum of grid-2 entries.
Ratio averaged_boolean_ratio(const SweepGrid& g1, const SweepGrid& g2);
/// Per-cell ratios, row-major like SweepGrid::cells.
std::vector<Ratio> cell_ratios(const SweepGrid& g1, const SweepGrid& g2);

}  // namespace bvm
