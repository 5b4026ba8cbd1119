#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "bvm/random.hpp"
#include "bvm/value.hpp"

namespace bvm {

/// Strictly increasing evaluation points x_1..x_N, N >= 1.
class InputGrid {
 public:
  explicit InputGrid(std::vector<double> points);

  /// `n` evenly spaced points over [lo, hi] inclusive.
  static InputGrid linspace(double lo, double hi, std::size_t n);

  std::span<const double> points() const { return points_; }
  std::size_t size() const { return points_.size(); }

  friend bool operator==(const InputGrid&, const InputGrid&) = default;

 private:
  std::vector<double> points_;
};

/// Maps a parameter vector and an input grid to an output path.
///
/// Three families are built in:
///  - polynomial: y(x) = sum_k theta_k * x^{p_k} for a fixed list of powers p_k;
///  - damped oscillator: y(x) = a + b x exp(-c cos(d x)) + f sin(g x);
///  - tabulated: y(x) = sum_k theta_k * phi_k(x) where each basis function
///    phi_k is tabulated on knots and linearly interpolated.
class ModelFunction {
 public:
  enum class Family { polynomial, damped_oscillator, tabulated };

  static ModelFunction polynomial(std::vector<double> powers);
  static ModelFunction damped_oscillator();
  static ModelFunction tabulated(std::vector<double> knots, std::vector<std::vector<double>> basis);

  Family family() const { return family_; }
  const std::vector<std::string>& parameter_names() const { return names_; }
  std::size_t parameter_count() const { return names_.size(); }

  /// Polynomial powers (polynomial family only).
  const std::vector<double>& powers() const { return powers_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<std::vector<double>>& basis() const { return basis_; }

  Path evaluate(std::span<const double> params, const InputGrid& grid) const;
  void evaluate_into(std::span<const double> params, const InputGrid& grid, std::span<double> out) const;

  friend bool operator==(const ModelFunction&, const ModelFunction&) = default;

 private:
  ModelFunction(Family family, std::vector<std::string> names) : family_(family), names_(std::move(names)) {}

  Family family_;
  std::vector<std::string> names_;
  std::vector<double> powers_;
  std::vector<double> knots_;
  std::vector<std::vector<double>> basis_;
};

class Distribution;

struct DiracDelta {
  Value value;  // double or Path
};
struct Normal {
  double mean = 0.0;
  double std = 1.0;
};
struct StudentT {
  double location = 0.0;
  double dof = 1.0;
  double scale = 1.0;
};
struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};
/// Density rate * exp(-rate (x - shift)) for x >= shift.
struct ShiftedExponential {
  double rate = 1.0;
  double shift = 0.0;
};
struct Categorical {
  std::vector<Value> values;  // double or string labels
  std::vector<double> probs;
};
struct Empirical {
  std::vector<Value> samples;  // double or Path
};
struct IndependentProduct {
  std::vector<Distribution> components;
};
struct PushForward {
  std::shared_ptr<const Distribution> prior;
  ModelFunction model;
  InputGrid grid;
};

/// Immutable description of an uncertain value. Construction validates the
/// variant's invariants and throws bvm::Error on violation.
class Distribution {
 public:
  using Variant = std::variant<DiracDelta, Normal, StudentT, Uniform, ShiftedExponential, Categorical,
                               Empirical, IndependentProduct, PushForward>;

  Distribution(Variant v);  // NOLINT(google-explicit-constructor)
  template <class T>
    requires(!std::is_same_v<std::decay_t<T>, Distribution> && !std::is_same_v<std::decay_t<T>, Variant> &&
             std::is_constructible_v<Variant, T>)
  Distribution(T&& v) : Distribution(Variant(std::forward<T>(v))) {}  // NOLINT(google-explicit-constructor)

  const Variant& variant() const { return v_; }

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&v_);
  }

  /// True for distributions over a single real number.
  bool is_scalar() const;
  /// Length of the drawn value (1 for scalars and labels).
  std::size_t dimension() const;

  /// One draw, consuming from `rng`.
  Value draw(DrawRng& rng) const;
  /// Scalar draw; throws if the distribution is not scalar.
  double draw_scalar(DrawRng& rng) const;
  /// Writes a real-vector draw into `out` (size == dimension()).
  void draw_into(DrawRng& rng, std::span<double> out) const;

  const char* type_name() const;

 private:
  Variant v_;
};

/// `n` i.i.d. draws; draw i uses DrawRng(seed, stream, i) so results are
/// prefix-stable in n and independent of evaluation order.
std::vector<Value> sample(const Distribution& dist, RngSeed seed, std::size_t n,
                          std::uint32_t stream = streams::kModel);
std::vector<double> sample_scalar(const Distribution& dist, RngSeed seed, std::size_t n,
                                  std::uint32_t stream = streams::kModel);

/// Density (probability mass for DiracDelta and Categorical) at `x`;
/// std::nullopt for Empirical and PushForward, which must be sampled.
std::optional<double> density(const Distribution& dist, const Value& x);

/// Closed-form CDF for scalar distributions that have one.
std::optional<double> cdf(const Distribution& dist, double x);
/// Closed-form quantile; p in [0, 1].
std::optional<double> quantile(const Distribution& dist, double p);

/// Type-7 (linear interpolation between order statistics) sample quantile of
/// an ascending sorted vector.
double sorted_quantile(std::span<const double> sorted, double p);

Distribution push_forward(const Distribution& prior, const ModelFunction& model, const InputGrid& grid);

/// Central interval or highest-mass set.
struct ConfidenceRegion {
  enum class Kind { interval, set };
  struct Interval {
    double lo;
    double hi;
    friend bool operator==(const Interval&, const Interval&) = default;
  };

  Kind kind = Kind::interval;
  double level = 0.0;
  std::vector<Interval> intervals;  // sorted, disjoint
  std::vector<Value> labels;        // categorical sets
  std::size_t bin_count = 0;        // histogram bins selected (set kind)

  bool contains(const Value& v) const;
  bool contains(double x) const;

  static ConfidenceRegion interval(double lo, double hi, double level);

  friend bool operator==(const ConfidenceRegion&, const ConfidenceRegion&) = default;
};

/// Controls the sample-based fallback used when no closed form exists.
struct EmpiricalOptions {
  RngSeed seed = 0x5eed;
  std::size_t samples = 100000;
};

/// Central interval [q(a/2), q(1 - a/2)] with a = 1 - level, level in (0, 1].
ConfidenceRegion confidence_interval(const Distribution& dist, double level, EmpiricalOptions opts = {});

/// Greedy highest-mass region: histogram bins (or categorical values) are
/// added in descending probability until the cumulative mass reaches `level`.
ConfidenceRegion confidence_set(const Distribution& dist, double level, std::size_t bins = 512,
                                EmpiricalOptions opts = {});

/// Indices chosen by the greedy highest-mass rule, ascending.
std::vector<std::size_t> select_highest_mass(std::span<const double> masses, double level);

/// Probability that a draw of `dist` lies in `region`; closed form when the
/// distribution has a CDF, otherwise the fraction of `opts.samples` draws.
double probability_in(const Distribution& dist, const ConfidenceRegion& region, EmpiricalOptions opts = {});

}  // namespace bvm
