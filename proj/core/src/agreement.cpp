#include "bvm/agreement.hpp"

#include <algorithm>
#include <cmath>

#include "bvm/error.hpp"
#include "overloaded.hpp"

namespace bvm {

namespace {

using detail::Overloaded;

void require(bool ok, const char* what) {
  if (!ok) throw Error(what);
}

const Path& path_arg(const Value& v, const char* rule) {
  if (const auto* p = std::get_if<Path>(&v)) return *p;
  throw Error(std::string(rule) + ": expected a path, got " + value_kind_name(v));
}

const std::string& label_arg(const Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw Error(std::string("set_membership: expected a label, got ") + value_kind_name(v));
}

}  // namespace

AgreementRule::AgreementRule(Node node) : node_(std::make_shared<const Node>(std::move(node))) {
  std::visit(Overloaded{
                 [](const rules::Threshold& r) { require(!std::isnan(r.epsilon), "threshold: epsilon is NaN"); },
                 [](const rules::Interval& r) { require(r.lo <= r.hi, "interval: lo must be <= hi"); },
                 [](const rules::And& r) { require(!r.children.empty(), "and: children must be nonempty"); },
                 [](const rules::Or& r) { require(!r.children.empty(), "or: children must be nonempty"); },
                 [](const rules::Not& r) {
                   require(r.child.size() == 1, "not: exactly one child is required");
                   require(r.child.front().is_hard(), "not: soft kernels cannot be negated");
                 },
                 [](const rules::SoftExponential& r) { require(r.rate > 0.0, "soft_exponential: rate must be > 0"); },
                 [](const rules::GammaEpsilon& r) {
                   require(r.gamma >= 0.0 && r.gamma <= 1.0, "gamma_epsilon: gamma must be in [0, 1]");
                   require(r.epsilon >= 0.0, "gamma_epsilon: epsilon must be >= 0");
                   require(r.m >= 1.0, "gamma_epsilon: m must be >= 1");
                   for (double e : r.per_point_epsilon) require(e >= 0.0, "gamma_epsilon: epsilons must be >= 0");
                 },
                 [](const rules::EpsilonBeta& r) {
                   require(r.coverage_lo <= r.coverage_hi, "epsilon_beta: coverage_lo must be <= coverage_hi");
                   require(!r.band.empty(), "epsilon_beta: band must be nonempty");
                 },
                 [](const auto&) {},
             },
             *node_);
}

bool AgreementRule::is_hard() const {
  return std::visit(Overloaded{
                        [](const rules::SoftExponential&) { return false; },
                        [](const rules::And& r) {
                          return std::all_of(r.children.begin(), r.children.end(),
                                             [](const AgreementRule& c) { return c.is_hard(); });
                        },
                        [](const rules::Or& r) {
                          return std::all_of(r.children.begin(), r.children.end(),
                                             [](const AgreementRule& c) { return c.is_hard(); });
                        },
                        [](const auto&) { return true; },
                    },
                    *node_);
}

AgreementRule compose(BoolOp op, std::vector<AgreementRule> children) {
  switch (op) {
    case BoolOp::op_and:
      return rules::And{std::move(children)};
    case BoolOp::op_or:
      return rules::Or{std::move(children)};
    case BoolOp::op_not:
      return rules::Not{std::move(children)};
  }
  throw Error("compose: unknown operator");
}

double soft_exponential_weight(double f, double shift, double rate) {
  if (f <= shift) return 1.0;
  if (std::isinf(f)) return 0.0;
  return std::exp(-rate * (f - shift));
}

bool gamma_epsilon_eval(const rules::GammaEpsilon& rule, std::span<const double> yhat, std::span<const double> y) {
  if (yhat.size() != y.size()) throw Error("gamma_epsilon: path length mismatch");
  if (y.empty()) throw Error("gamma_epsilon: paths must be nonempty");
  const bool per_point = !rule.per_point_epsilon.empty();
  if (per_point && rule.per_point_epsilon.size() != y.size()) {
    throw Error("gamma_epsilon: per-point epsilon length mismatch");
  }
  std::size_t within = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double eps = per_point ? rule.per_point_epsilon[i] : rule.epsilon;
    const double err = std::abs(yhat[i] - y[i]);
    if (err > rule.m * eps) return false;
    if (err <= eps) ++within;
  }
  return fraction_meets(within, y.size(), rule.gamma);
}

bool epsilon_beta_eval(const rules::EpsilonBeta& rule, std::span<const double> yhat, std::span<const double> y) {
  if (rule.band.size() != y.size()) throw Error("epsilon_beta: band length must equal path length");
  if (mean_abs_error(yhat, y) > rule.mean_epsilon) return false;
  const double coverage = coverage_fraction(y, rule.band);
  return coverage >= rule.coverage_lo && coverage <= rule.coverage_hi;
}

double evaluate_kernel(const AgreementRule& rule, const Value& zhat, const Value& z) {
  return std::visit(
      Overloaded{
          [](const rules::Constant& r) { return r.value ? 1.0 : 0.0; },
          [&](const rules::Threshold& r) { return compare(r.fn, zhat, z) <= r.epsilon ? 1.0 : 0.0; },
          [&](const rules::Interval& r) {
            const double f = compare(r.fn, zhat, z);
            return (f >= r.lo && f <= r.hi) ? 1.0 : 0.0;
          },
          [&](const rules::SetMembership& r) {
            const auto& model = label_arg(zhat);
            const auto& data = label_arg(z);
            const auto it = r.synonyms.find(data);
            if (it == r.synonyms.end()) return model == data ? 1.0 : 0.0;
            return std::find(it->second.begin(), it->second.end(), model) != it->second.end() ? 1.0 : 0.0;
          },
          [&](const rules::InRegion& r) {
            return r.region.contains(r.side == rules::Side::model ? zhat : z) ? 1.0 : 0.0;
          },
          [&](const rules::And& r) {
            double w = 1.0;
            for (const auto& c : r.children) {
              w *= evaluate_kernel(c, zhat, z);
              if (w == 0.0) break;
            }
            return w;
          },
          [&](const rules::Or& r) {
            double miss = 1.0;
            for (const auto& c : r.children) {
              miss *= 1.0 - evaluate_kernel(c, zhat, z);
              if (miss == 0.0) break;
            }
            return 1.0 - miss;
          },
          [&](const rules::Not& r) { return 1.0 - evaluate_kernel(r.child.front(), zhat, z); },
          [&](const rules::SoftExponential& r) {
            return soft_exponential_weight(compare(r.fn, zhat, z), r.shift, r.rate);
          },
          [&](const rules::GammaEpsilon& r) {
            return gamma_epsilon_eval(r, path_arg(zhat, "gamma_epsilon"), path_arg(z, "gamma_epsilon")) ? 1.0 : 0.0;
          },
          [&](const rules::EpsilonBeta& r) {
            return epsilon_beta_eval(r, path_arg(zhat, "epsilon_beta"), path_arg(z, "epsilon_beta")) ? 1.0 : 0.0;
          },
      },
      rule.node());
}

}  // namespace bvm
