#include "bvm/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <string_view>

#include "bvm/error.hpp"

namespace bvm {

namespace {

using Keys = std::initializer_list<std::string_view>;

std::string child(const std::string& where, std::string_view key) { return where + "/" + std::string(key); }
std::string child(const std::string& where, std::size_t i) { return where + "/" + std::to_string(i); }

void expect_object(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where.empty() ? "/" : where, "expected an object");
}

void check_keys(const Json& j, const std::string& where, Keys allowed) {
  expect_object(j, where);
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == key;
    if (!ok) throw ConfigError(child(where, key), "unknown key");
  }
}

const Json& need(const Json& j, std::string_view key, const std::string& where) {
  expect_object(j, where);
  const auto it = j.find(std::string(key));
  if (it == j.end()) throw ConfigError(child(where, key), "missing required field");
  return *it;
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where, "expected a number");
  return j.get<double>();
}

double number_at(const Json& j, std::string_view key, const std::string& where) {
  return number(need(j, key, where), child(where, key));
}

double number_or(const Json& j, std::string_view key, double fallback, const std::string& where) {
  const auto it = j.find(std::string(key));
  return it == j.end() ? fallback : number(*it, child(where, key));
}

std::size_t count(const Json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError(where, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

std::size_t count_or(const Json& j, std::string_view key, std::size_t fallback, const std::string& where) {
  const auto it = j.find(std::string(key));
  return it == j.end() ? fallback : count(*it, child(where, key));
}

std::string text(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], child(where, i)));
  return out;
}

Value value_from_json(const Json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  if (j.is_array()) return numbers(j, where);
  throw ConfigError(where, "expected a number, label or number array");
}

Json value_to_json(const Value& v) {
  if (const auto* x = std::get_if<double>(&v)) return *x;
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  if (const auto* p = std::get_if<Path>(&v)) return *p;
  throw Error("value of this kind has no JSON form");
}

/// Runs `fn`, rewrapping library precondition failures as schema errors.
template <class F>
auto guarded(const std::string& where, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(where.empty() ? "/" : where, e.what());
  }
}

std::string method_text(EstimateMethod m) { return std::string(method_name(m)); }

EstimateMethod parse_method(const Json& j, const std::string& where) {
  const auto s = text(j, where);
  if (s == "mc") return EstimateMethod::mc;
  if (s == "grid") return EstimateMethod::grid;
  if (s == "closed_form") return EstimateMethod::closed_form;
  throw ConfigError(where, "unknown estimator method '" + s + "'");
}

}  // namespace

Json to_json(const Distribution& d) {
  return std::visit(
      [&](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        Json j;
        j["type"] = d.type_name();
        if constexpr (std::is_same_v<T, DiracDelta>) {
          j["value"] = value_to_json(v.value);
        } else if constexpr (std::is_same_v<T, Normal>) {
          j["mean"] = v.mean;
          j["std"] = v.std;
        } else if constexpr (std::is_same_v<T, StudentT>) {
          j["location"] = v.location;
          j["dof"] = v.dof;
          j["scale"] = v.scale;
        } else if constexpr (std::is_same_v<T, Uniform>) {
          j["lo"] = v.lo;
          j["hi"] = v.hi;
        } else if constexpr (std::is_same_v<T, ShiftedExponential>) {
          j["rate"] = v.rate;
          j["shift"] = v.shift;
        } else if constexpr (std::is_same_v<T, Categorical>) {
          j["values"] = Json::array();
          for (const auto& x : v.values) j["values"].push_back(value_to_json(x));
          j["probs"] = v.probs;
        } else if constexpr (std::is_same_v<T, Empirical>) {
          j["samples"] = Json::array();
          for (const auto& x : v.samples) j["samples"].push_back(value_to_json(x));
        } else if constexpr (std::is_same_v<T, IndependentProduct>) {
          j["components"] = Json::array();
          for (const auto& c : v.components) j["components"].push_back(to_json(c));
        } else if constexpr (std::is_same_v<T, PushForward>) {
          j["prior"] = to_json(*v.prior);
          j["model"] = to_json(v.model);
          j["grid"] = to_json(v.grid);
        }
        return j;
      },
      d.variant());
}

Distribution distribution_from_json(const Json& j, const std::string& where) {
  const auto type = text(need(j, "type", where), child(where, "type"));
  return guarded(where, [&]() -> Distribution {
    if (type == "dirac") {
      check_keys(j, where, {"type", "value"});
      return DiracDelta{value_from_json(need(j, "value", where), child(where, "value"))};
    }
    if (type == "normal") {
      check_keys(j, where, {"type", "mean", "std"});
      return Normal{number_at(j, "mean", where), number_at(j, "std", where)};
    }
    if (type == "student_t") {
      check_keys(j, where, {"type", "location", "dof", "scale"});
      return StudentT{number_at(j, "location", where), number_at(j, "dof", where), number_at(j, "scale", where)};
    }
    if (type == "uniform") {
      check_keys(j, where, {"type", "lo", "hi"});
      return Uniform{number_at(j, "lo", where), number_at(j, "hi", where)};
    }
    if (type == "shifted_exponential") {
      check_keys(j, where, {"type", "rate", "shift"});
      return ShiftedExponential{number_at(j, "rate", where), number_or(j, "shift", 0.0, where)};
    }
    if (type == "categorical") {
      check_keys(j, where, {"type", "values", "probs"});
      const auto& vals = need(j, "values", where);
      if (!vals.is_array()) throw ConfigError(child(where, "values"), "expected an array");
      Categorical c;
      for (std::size_t i = 0; i < vals.size(); ++i) {
        c.values.push_back(value_from_json(vals[i], child(child(where, "values"), i)));
      }
      c.probs = numbers(need(j, "probs", where), child(where, "probs"));
      return c;
    }
    if (type == "empirical") {
      check_keys(j, where, {"type", "samples"});
      const auto& vals = need(j, "samples", where);
      if (!vals.is_array()) throw ConfigError(child(where, "samples"), "expected an array");
      Empirical e;
      for (std::size_t i = 0; i < vals.size(); ++i) {
        e.samples.push_back(value_from_json(vals[i], child(child(where, "samples"), i)));
      }
      return e;
    }
    if (type == "independent_product") {
      check_keys(j, where, {"type", "components"});
      const auto& comps = need(j, "components", where);
      if (!comps.is_array()) throw ConfigError(child(where, "components"), "expected an array");
      IndependentProduct p;
      for (std::size_t i = 0; i < comps.size(); ++i) {
        p.components.push_back(distribution_from_json(comps[i], child(child(where, "components"), i)));
      }
      return p;
    }
    if (type == "push_forward") {
      check_keys(j, where, {"type", "prior", "model", "grid"});
      return push_forward(distribution_from_json(need(j, "prior", where), child(where, "prior")),
                          model_function_from_json(need(j, "model", where), child(where, "model")),
                          input_grid_from_json(need(j, "grid", where), child(where, "grid")));
    }
    throw ConfigError(child(where, "type"), "unknown distribution type '" + type + "'");
  });
}

Json to_json(const ModelFunction& m) {
  switch (m.family()) {
    case ModelFunction::Family::polynomial:
      return {{"family", "polynomial"}, {"powers", m.powers()}};
    case ModelFunction::Family::damped_oscillator:
      return {{"family", "damped_oscillator"}};
    case ModelFunction::Family::tabulated:
      return {{"family", "tabulated"}, {"knots", m.knots()}, {"basis", m.basis()}};
  }
  throw Error("unknown model family");
}

ModelFunction model_function_from_json(const Json& j, const std::string& where) {
  const auto family = text(need(j, "family", where), child(where, "family"));
  return guarded(where, [&]() -> ModelFunction {
    if (family == "polynomial") {
      check_keys(j, where, {"family", "powers"});
      return ModelFunction::polynomial(numbers(need(j, "powers", where), child(where, "powers")));
    }
    if (family == "damped_oscillator") {
      check_keys(j, where, {"family"});
      return ModelFunction::damped_oscillator();
    }
    if (family == "tabulated") {
      check_keys(j, where, {"family", "knots", "basis"});
      const auto& basis = need(j, "basis", where);
      if (!basis.is_array()) throw ConfigError(child(where, "basis"), "expected an array of columns");
      std::vector<std::vector<double>> cols;
      for (std::size_t i = 0; i < basis.size(); ++i) cols.push_back(numbers(basis[i], child(child(where, "basis"), i)));
      return ModelFunction::tabulated(numbers(need(j, "knots", where), child(where, "knots")), std::move(cols));
    }
    throw ConfigError(child(where, "family"), "unknown model family '" + family + "'");
  });
}

Json to_json(const InputGrid& g) { return {{"points", std::vector<double>(g.points().begin(), g.points().end())}}; }

InputGrid input_grid_from_json(const Json& j, const std::string& where) {
  return guarded(where, [&]() -> InputGrid {
    if (j.contains("linspace")) {
      check_keys(j, where, {"linspace"});
      const auto spec = numbers(j["linspace"], child(where, "linspace"));
      if (spec.size() != 3 || spec[2] < 1 || spec[2] != std::floor(spec[2])) {
        throw ConfigError(child(where, "linspace"), "expected [lo, hi, n] with integer n >= 1");
      }
      return InputGrid::linspace(spec[0], spec[1], static_cast<std::size_t>(spec[2]));
    }
    check_keys(j, where, {"points"});
    return InputGrid(numbers(need(j, "points", where), child(where, "points")));
  });
}

Json to_json(const ComparisonFnSpec& f) {
  Json j = {{"name", std::string(comparison_name(f.kind))}};
  if (f.kind == ComparisonKind::per_point_abs_error) j["index"] = f.index;
  switch (f.kind) {
    case ComparisonKind::binned_prob_diff:
    case ComparisonKind::kl:
    case ComparisonKind::sym_kl:
    case ComparisonKind::js:
    case ComparisonKind::hellinger:
      j["bins"] = f.bins;
      break;
    default:
      break;
  }
  return j;
}

ComparisonFnSpec comparison_from_json(const Json& j, const std::string& where) {
  ComparisonFnSpec spec;
  std::string name;
  if (j.is_string()) {
    name = j.get<std::string>();
  } else {
    check_keys(j, where, {"name", "index", "bins"});
    name = text(need(j, "name", where), child(where, "name"));
    spec.index = count_or(j, "index", 0, where);
    spec.bins = count_or(j, "bins", 64, where);
  }
  const auto kind = parse_comparison(name);
  if (!kind) throw ConfigError(j.is_string() ? where : child(where, "name"), "unknown comparison function '" + name + "'");
  spec.kind = *kind;
  if (spec.bins == 0) throw ConfigError(child(where, "bins"), "bins must be >= 1");
  return spec;
}

Json to_json(const ConfidenceRegion& r) {
  Json j;
  j["kind"] = r.kind == ConfidenceRegion::Kind::interval ? "interval" : "set";
  j["level"] = r.level;
  if (!r.labels.empty()) {
    j["labels"] = Json::array();
    for (const auto& l : r.labels) j["labels"].push_back(value_to_json(l));
  } else {
    j["intervals"] = Json::array();
    for (const auto& iv : r.intervals) j["intervals"].push_back({iv.lo, iv.hi});
  }
  return j;
}

ConfidenceRegion region_from_json(const Json& j, const std::string& where) {
  check_keys(j, where, {"kind", "level", "intervals", "labels"});
  ConfidenceRegion r;
  const auto kind = text(need(j, "kind", where), child(where, "kind"));
  if (kind == "interval") {
    r.kind = ConfidenceRegion::Kind::interval;
  } else if (kind == "set") {
    r.kind = ConfidenceRegion::Kind::set;
  } else {
    throw ConfigError(child(where, "kind"), "expected 'interval' or 'set'");
  }
  r.level = number_or(j, "level", 0.0, where);
  if (j.contains("labels")) {
    const auto& labels = j["labels"];
    if (!labels.is_array()) throw ConfigError(child(where, "labels"), "expected an array");
    for (std::size_t i = 0; i < labels.size(); ++i) {
      r.labels.push_back(value_from_json(labels[i], child(child(where, "labels"), i)));
    }
  }
  if (j.contains("intervals")) {
    const auto& ivs = j["intervals"];
    if (!ivs.is_array()) throw ConfigError(child(where, "intervals"), "expected an array");
    for (std::size_t i = 0; i < ivs.size(); ++i) {
      const auto pair = numbers(ivs[i], child(child(where, "intervals"), i));
      if (pair.size() != 2 || pair[0] > pair[1]) {
        throw ConfigError(child(child(where, "intervals"), i), "expected [lo, hi] with lo <= hi");
      }
      if (!r.intervals.empty() && pair[0] <= r.intervals.back().hi) {
        throw ConfigError(child(child(where, "intervals"), i), "intervals must be sorted and disjoint");
      }
      r.intervals.push_back({pair[0], pair[1]});
    }
  }
  if (r.intervals.empty() && r.labels.empty()) throw ConfigError(where, "region needs intervals or labels");
  if (r.kind == ConfidenceRegion::Kind::interval && r.intervals.size() != 1) {
    throw ConfigError(child(where, "intervals"), "an interval region has exactly one interval");
  }
  return r;
}

Json to_json(const AgreementRule& rule) {
  return std::visit(
      [](const auto& r) -> Json {
        using T = std::decay_t<decltype(r)>;
        Json j;
        if constexpr (std::is_same_v<T, rules::Constant>) {
          j = {{"type", "always"}, {"value", r.value}};
        } else if constexpr (std::is_same_v<T, rules::Threshold>) {
          j = {{"type", "threshold"}, {"fn", to_json(r.fn)}, {"epsilon", r.epsilon}};
        } else if constexpr (std::is_same_v<T, rules::Interval>) {
          j = {{"type", "interval"}, {"fn", to_json(r.fn)}, {"lo", r.lo}, {"hi", r.hi}};
        } else if constexpr (std::is_same_v<T, rules::SetMembership>) {
          j = {{"type", "set_membership"}, {"synonyms", r.synonyms}};
        } else if constexpr (std::is_same_v<T, rules::InRegion>) {
          j = {{"type", "in_region"},
               {"side", r.side == rules::Side::model ? "model" : "data"},
               {"region", to_json(r.region)}};
        } else if constexpr (std::is_same_v<T, rules::And> || std::is_same_v<T, rules::Or>) {
          j = {{"type", std::is_same_v<T, rules::And> ? "and" : "or"}, {"children", Json::array()}};
          for (const auto& c : r.children) j["children"].push_back(to_json(c));
        } else if constexpr (std::is_same_v<T, rules::Not>) {
          j = {{"type", "not"}, {"child", to_json(r.child.front())}};
        } else if constexpr (std::is_same_v<T, rules::SoftExponential>) {
          j = {{"type", "soft_exponential"}, {"fn", to_json(r.fn)}, {"shift", r.shift}, {"rate", r.rate}};
        } else if constexpr (std::is_same_v<T, rules::GammaEpsilon>) {
          j = {{"type", "gamma_epsilon"}, {"gamma", r.gamma}, {"epsilon", r.epsilon}, {"m", r.m}};
          if (!r.per_point_epsilon.empty()) j["per_point_epsilon"] = r.per_point_epsilon;
        } else if constexpr (std::is_same_v<T, rules::EpsilonBeta>) {
          j = {{"type", "epsilon_beta"},
               {"mean_epsilon", r.mean_epsilon},
               {"coverage", {r.coverage_lo, r.coverage_hi}},
               {"band", Json::array()}};
          for (const auto& b : r.band) j["band"].push_back(to_json(b));
        }
        return j;
      },
      rule.node());
}

AgreementRule rule_from_json(const Json& j, const std::string& where, const std::optional<ComparisonFnSpec>& default_fn,
                             const Distribution* model_for_band) {
  const auto type = text(need(j, "type", where), child(where, "type"));
  auto fn_of = [&]() {
    if (j.contains("fn")) return comparison_from_json(j["fn"], child(where, "fn"));
    if (default_fn) return *default_fn;
    throw ConfigError(child(where, "fn"), "missing comparison function and no comparison section");
  };
  auto children = [&](const Json& arr, const std::string& at) {
    if (!arr.is_array()) throw ConfigError(at, "expected an array of rules");
    std::vector<AgreementRule> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      out.push_back(rule_from_json(arr[i], child(at, i), default_fn, model_for_band));
    }
    return out;
  };
  return guarded(where, [&]() -> AgreementRule {
    if (type == "always") {
      check_keys(j, where, {"type", "value"});
      const auto& v = need(j, "value", where);
      if (!v.is_boolean()) throw ConfigError(child(where, "value"), "expected a boolean");
      return AgreementRule::always(v.get<bool>());
    }
    if (type == "threshold") {
      check_keys(j, where, {"type", "fn", "epsilon"});
      return rules::Threshold{fn_of(), number_at(j, "epsilon", where)};
    }
    if (type == "interval") {
      check_keys(j, where, {"type", "fn", "lo", "hi"});
      return rules::Interval{fn_of(), number_at(j, "lo", where), number_at(j, "hi", where)};
    }
    if (type == "set_membership") {
      check_keys(j, where, {"type", "synonyms"});
      const auto& syn = need(j, "synonyms", where);
      expect_object(syn, child(where, "synonyms"));
      rules::SetMembership r;
      for (const auto& [label, members] : syn.items()) {
        const auto at = child(child(where, "synonyms"), label);
        if (!members.is_array()) throw ConfigError(at, "expected an array of labels");
        for (std::size_t i = 0; i < members.size(); ++i) r.synonyms[label].push_back(text(members[i], child(at, i)));
      }
      return r;
    }
    if (type == "in_region") {
      check_keys(j, where, {"type", "side", "region"});
      const auto side = text(need(j, "side", where), child(where, "side"));
      if (side != "model" && side != "data") throw ConfigError(child(where, "side"), "expected 'model' or 'data'");
      return rules::InRegion{region_from_json(need(j, "region", where), child(where, "region")),
                             side == "model" ? rules::Side::model : rules::Side::data};
    }
    if (type == "and" || type == "or") {
      check_keys(j, where, {"type", "children"});
      return compose(type == "and" ? BoolOp::op_and : BoolOp::op_or,
                     children(need(j, "children", where), child(where, "children")));
    }
    if (type == "not") {
      check_keys(j, where, {"type", "child"});
      return compose(BoolOp::op_not, {rule_from_json(need(j, "child", where), child(where, "child"), default_fn,
                                                     model_for_band)});
    }
    if (type == "soft_exponential") {
      check_keys(j, where, {"type", "fn", "shift", "rate"});
      return rules::SoftExponential{fn_of(), number_or(j, "shift", 0.0, where), number_at(j, "rate", where)};
    }
    if (type == "gamma_epsilon") {
      check_keys(j, where, {"type", "gamma", "epsilon", "m", "per_point_epsilon"});
      rules::GammaEpsilon r{number_at(j, "gamma", where), number_at(j, "epsilon", where), number_or(j, "m", 1.0, where),
                            {}};
      if (j.contains("per_point_epsilon")) {
        r.per_point_epsilon = numbers(j["per_point_epsilon"], child(where, "per_point_epsilon"));
      }
      return r;
    }
    if (type == "epsilon_beta") {
      check_keys(j, where, {"type", "mean_epsilon", "coverage", "band"});
      rules::EpsilonBeta r;
      r.mean_epsilon = number_at(j, "mean_epsilon", where);
      if (j.contains("coverage")) {
        const auto cov = numbers(j["coverage"], child(where, "coverage"));
        if (cov.size() != 2) throw ConfigError(child(where, "coverage"), "expected [lo, hi]");
        r.coverage_lo = cov[0];
        r.coverage_hi = cov[1];
      }
      const auto& band = need(j, "band", where);
      const auto at = child(where, "band");
      if (band.is_array()) {
        for (std::size_t i = 0; i < band.size(); ++i) r.band.push_back(region_from_json(band[i], child(at, i)));
      } else {
        // {"level", "samples", "seed"}: per-point band of the scenario's model.
        check_keys(band, at, {"level", "samples", "seed"});
        if (!model_for_band) throw ConfigError(at, "a model-derived band needs a model section");
        r.band = path_confidence_band(*model_for_band, number_or(band, "level", 0.95, at),
                                      count_or(band, "samples", 20000, at), count_or(band, "seed", 0, at));
      }
      return r;
    }
    throw ConfigError(child(where, "type"), "unknown rule type '" + type + "'");
  });
}

Json to_json(const BvmEstimate& e) {
  return {{"p", e.p},
          {"std_error", e.std_error},
          {"samples", e.samples},
          {"seed", e.seed},
          {"method", std::string(method_name(e.method))}};
}

Scenario ScenarioConfig::scenario() const {
  if (!model) throw ConfigError("/model", "missing required section");
  if (!data) throw ConfigError("/data", "missing required section");
  if (!rule) throw ConfigError("/agreement", "missing required section");
  return Scenario{*model, *data, *rule, {}};
}

namespace {

/// Reads a model or data section; returns the distribution, the normalized
/// JSON and (for function form) the model spec.
struct Source {
  Distribution dist;
  Json normalized;
  std::optional<ModelSpec> spec;
};

Source read_source(const Json& j, const std::string& where, bool allow_generator) {
  expect_object(j, where);
  if (j.contains("distribution")) {
    check_keys(j, where, {"distribution"});
    auto d = distribution_from_json(j["distribution"], child(where, "distribution"));
    Json norm = {{"distribution", to_json(d)}};
    return {std::move(d), std::move(norm), std::nullopt};
  }
  if (j.contains("generator")) {
    if (!allow_generator) throw ConfigError(child(where, "generator"), "generators are only valid for data");
    check_keys(j, where, {"generator"});
    const auto& g = j["generator"];
    const auto at = child(where, "generator");
    check_keys(g, at, {"function", "params", "grid", "aleatoric_std", "epistemic_std", "instance_seed"});
    return guarded(at, [&]() -> Source {
      const auto fn = model_function_from_json(need(g, "function", at), child(at, "function"));
      const auto params = numbers(need(g, "params", at), child(at, "params"));
      const auto grid = input_grid_from_json(need(g, "grid", at), child(at, "grid"));
      const double aleatoric = number_or(g, "aleatoric_std", 0.0, at);
      const double epistemic = number_or(g, "epistemic_std", 0.0, at);
      const RngSeed seed = count_or(g, "instance_seed", 0, at);
      if (aleatoric < 0.0 || epistemic < 0.0) throw ConfigError(at, "noise levels must be >= 0");
      // One aleatoric instance drawn from the seeded generator; the epistemic
      // measurement noise stays uncertain.
      Path y = fn.evaluate(params, grid);
      if (aleatoric > 0.0) {
        for (std::size_t i = 0; i < y.size(); ++i) {
          DrawRng rng(seed, streams::kInstance, i);
          y[i] += aleatoric * rng.normal();
        }
      }
      Json norm = {{"generator",
                    {{"function", to_json(fn)},
                     {"params", params},
                     {"grid", to_json(grid)},
                     {"aleatoric_std", aleatoric},
                     {"epistemic_std", epistemic},
                     {"instance_seed", seed}}}};
      if (epistemic == 0.0) return {DiracDelta{y}, std::move(norm), std::nullopt};
      IndependentProduct prod;
      for (double yi : y) prod.components.emplace_back(Normal{yi, epistemic});
      return {Distribution(std::move(prod)), std::move(norm), std::nullopt};
    });
  }
  check_keys(j, where, {"function", "prior", "grid"});
  auto fn = model_function_from_json(need(j, "function", where), child(where, "function"));
  auto prior = distribution_from_json(need(j, "prior", where), child(where, "prior"));
  auto grid = input_grid_from_json(need(j, "grid", where), child(where, "grid"));
  auto dist = guarded(where, [&] { return push_forward(prior, fn, grid); });
  Json norm = {{"function", to_json(fn)}, {"prior", to_json(prior)}, {"grid", to_json(grid)}};
  return {std::move(dist), std::move(norm), ModelSpec{std::move(fn), std::move(prior), std::move(grid)}};
}

}  // namespace

ScenarioConfig parse_config(const Json& j) {
  check_keys(j, "", {"model", "data", "comparison", "agreement", "estimator", "output", "metric"});
  ScenarioConfig c;
  Json& src = c.source;
  src = Json::object();

  if (j.contains("model")) {
    auto s = read_source(j["model"], "/model", false);
    c.model = std::move(s.dist);
    c.model_spec = std::move(s.spec);
    src["model"] = std::move(s.normalized);
  }
  if (j.contains("data")) {
    auto s = read_source(j["data"], "/data", true);
    c.data = std::move(s.dist);
    src["data"] = std::move(s.normalized);
  }
  if (j.contains("comparison")) {
    c.comparison = comparison_from_json(j["comparison"], "/comparison");
    src["comparison"] = to_json(*c.comparison);
  }
  if (j.contains("agreement")) {
    c.rule = rule_from_json(j["agreement"], "/agreement", c.comparison, c.model ? &*c.model : nullptr);
    src["agreement"] = to_json(*c.rule);
  }

  const Json est = j.value("estimator", Json::object());
  check_keys(est, "/estimator", {"method", "samples", "seed", "bins", "threads", "grid_values", "grid_span"});
  if (est.contains("method")) c.estimator.method = parse_method(est["method"], "/estimator/method");
  c.estimator.samples = count_or(est, "samples", c.estimator.samples, "/estimator");
  c.estimator.seed = count_or(est, "seed", c.estimator.seed, "/estimator");
  c.estimator.bins = count_or(est, "bins", c.estimator.bins, "/estimator");
  c.estimator.threads = static_cast<unsigned>(count_or(est, "threads", 0, "/estimator"));
  c.estimator.grid.values_per_dimension = count_or(est, "grid_values", 20, "/estimator");
  c.estimator.grid.span = number_or(est, "grid_span", 3.0, "/estimator");
  if (c.estimator.samples == 0) throw ConfigError("/estimator/samples", "must be >= 1");
  if (c.estimator.bins == 0) throw ConfigError("/estimator/bins", "must be >= 1");
  if (c.estimator.grid.values_per_dimension == 0) throw ConfigError("/estimator/grid_values", "must be >= 1");
  src["estimator"] = {{"method", method_text(c.estimator.method)},
                      {"samples", c.estimator.samples},
                      {"seed", c.estimator.seed},
                      {"bins", c.estimator.bins},
                      {"threads", c.estimator.threads},
                      {"grid_values", c.estimator.grid.values_per_dimension},
                      {"grid_span", c.estimator.grid.span}};

  const Json out = j.value("output", Json::object());
  check_keys(out, "/output", {"path", "format"});
  if (out.contains("path")) c.output.path = text(out["path"], "/output/path");
  if (out.contains("format")) c.output.format = text(out["format"], "/output/format");
  if (c.output.format != "json" && c.output.format != "csv") {
    throw ConfigError("/output/format", "expected 'json' or 'csv'");
  }
  src["output"] = {{"path", c.output.path}, {"format", c.output.format}};

  if (j.contains("metric")) {
    c.metric = j["metric"];
    expect_object(c.metric, "/metric");
    text(need(c.metric, "name", "/metric"), "/metric/name");
    src["metric"] = c.metric;
  }
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot open config file '" + path.string() + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw ConfigError("/", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

Json serialize_config(const ScenarioConfig& c) { return c.source; }

}  // namespace bvm
