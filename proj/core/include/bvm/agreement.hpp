#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "bvm/comparison.hpp"
#include "bvm/distributions.hpp"
#include "bvm/value.hpp"

namespace bvm {

class AgreementRule;

namespace rules {

struct Constant {
  bool value = true;
};
/// True iff f(zhat, z) <= epsilon.
struct Threshold {
  ComparisonFnSpec fn;
  double epsilon = 0.0;
};
/// True iff lo <= f(zhat, z) <= hi.
struct Interval {
  ComparisonFnSpec fn;
  double lo = 0.0;
  double hi = 0.0;
};
/// True iff the label zhat is in S(z); labels without an entry map to {z}.
struct SetMembership {
  std::map<std::string, std::vector<std::string>> synonyms;
};
enum class Side { model, data };
/// True iff the chosen side's scalar value lies in `region`.
struct InRegion {
  ConfidenceRegion region;
  Side side = Side::model;
};
struct And {
  std::vector<AgreementRule> children;
};
struct Or {
  std::vector<AgreementRule> children;
};
struct Not {
  std::vector<AgreementRule> child;  // exactly one
};
/// Kernel 1 for f <= shift, exp(-rate (f - shift)) above: the hard
/// threshold marginalized over epsilon ~ ShiftedExponential(rate, shift).
struct SoftExponential {
  ComparisonFnSpec fn;
  double shift = 0.0;
  double rate = 1.0;
};
/// More than a fraction gamma of points within epsilon and every point
/// within m * epsilon. `per_point_epsilon`, when nonempty, replaces the
/// scalar epsilon coordinate-wise.
struct GammaEpsilon {
  double gamma = 0.9;
  double epsilon = 0.0;
  double m = 1.0;
  std::vector<double> per_point_epsilon;
};
/// Mean absolute error at most `mean_epsilon` and the fraction of data points
/// inside the model's per-point band within [coverage_lo, coverage_hi].
struct EpsilonBeta {
  double mean_epsilon = 0.0;
  double coverage_lo = 0.91;
  double coverage_hi = 0.99;
  std::vector<ConfidenceRegion> band;
};

}  // namespace rules

/// Immutable agreement-rule tree. Copies share nodes.
class AgreementRule {
 public:
  using Node = std::variant<rules::Constant, rules::Threshold, rules::Interval, rules::SetMembership,
                            rules::InRegion, rules::And, rules::Or, rules::Not, rules::SoftExponential,
                            rules::GammaEpsilon, rules::EpsilonBeta>;

  /// Validates the node (nonempty children, epsilon >= 0, ...).
  AgreementRule(Node node);  // NOLINT(google-explicit-constructor)
  template <class T>
    requires(!std::is_same_v<std::decay_t<T>, AgreementRule> && !std::is_same_v<std::decay_t<T>, Node> &&
             std::is_constructible_v<Node, T>)
  AgreementRule(T&& node) : AgreementRule(Node(std::forward<T>(node))) {}  // NOLINT(google-explicit-constructor)

  static AgreementRule always(bool value) { return rules::Constant{value}; }
  static AgreementRule threshold(ComparisonFnSpec fn, double epsilon) { return rules::Threshold{fn, epsilon}; }
  static AgreementRule threshold(ComparisonKind kind, double epsilon) { return threshold(ComparisonFnSpec{kind}, epsilon); }

  const Node& node() const { return *node_; }

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(node_.get());
  }

  /// True when every kernel value is 0 or 1.
  bool is_hard() const;

 private:
  std::shared_ptr<const Node> node_;
};

enum class BoolOp { op_and, op_or, op_not };

/// Builds And/Or/Not. Throws on empty children, on Not with other than one
/// child, and on a soft kernel under negation.
AgreementRule compose(BoolOp op, std::vector<AgreementRule> children);

/// Agreement kernel weight in [0, 1]. And multiplies child weights, Or takes
/// 1 - prod(1 - w); both reduce to Boolean AND/OR on hard children.
double evaluate_kernel(const AgreementRule& rule, const Value& zhat, const Value& z);

/// Kernel for the SoftExponential form at comparison value f.
double soft_exponential_weight(double f, double shift, double rate);

/// Whether `count` of `n` points reaches fraction `gamma`; tolerant to the
/// decimal representation of gamma.
inline bool fraction_meets(std::size_t count, std::size_t n, double gamma) {
  return static_cast<double>(count) >= gamma * static_cast<double>(n) - 1e-9;
}

bool gamma_epsilon_eval(const rules::GammaEpsilon& rule, std::span<const double> yhat, std::span<const double> y);
bool epsilon_beta_eval(const rules::EpsilonBeta& rule, std::span<const double> yhat, std::span<const double> y);

}  // namespace bvm
