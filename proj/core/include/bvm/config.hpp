#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "bvm/agreement.hpp"
#include "bvm/comparison.hpp"
#include "bvm/distributions.hpp"
#include "bvm/engine.hpp"

namespace bvm {

using Json = nlohmann::json;

// Tagged-record JSON forms. Every reader rejects unknown keys and throws
// bvm::ConfigError naming the offending field (as a JSON pointer).
Json to_json(const Distribution& d);
Distribution distribution_from_json(const Json& j, const std::string& where = "");

Json to_json(const ModelFunction& m);
ModelFunction model_function_from_json(const Json& j, const std::string& where = "");

Json to_json(const InputGrid& g);
InputGrid input_grid_from_json(const Json& j, const std::string& where = "");

Json to_json(const ComparisonFnSpec& f);
ComparisonFnSpec comparison_from_json(const Json& j, const std::string& where = "");

Json to_json(const ConfidenceRegion& r);
ConfidenceRegion region_from_json(const Json& j, const std::string& where = "");

Json to_json(const AgreementRule& r);
/// `default_fn` fills threshold-type nodes that omit "fn".
AgreementRule rule_from_json(const Json& j, const std::string& where = "",
                             const std::optional<ComparisonFnSpec>& default_fn = {},
                             const Distribution* model_for_band = nullptr);

Json to_json(const BvmEstimate& e);

/// Parameter prior pushed through a model function on a grid.
struct ModelSpec {
  ModelFunction function;
  Distribution prior;
  InputGrid grid;
};

struct EstimatorConfig {
  EstimateMethod method = EstimateMethod::mc;
  std::size_t samples = 10000;
  RngSeed seed = 0;
  std::size_t bins = 64;
  unsigned threads = 0;
  GridSpec grid;
};

struct OutputConfig {
  std::string path;
  std::string format = "json";
};

/// A validated scenario config: model, data, comparison, agreement,
/// estimator and output sections plus an optional named metric.
struct ScenarioConfig {
  Json source;  // normalized document, defaults filled in
  std::optional<Distribution> model;
  std::optional<ModelSpec> model_spec;
  std::optional<Distribution> data;
  std::optional<ComparisonFnSpec> comparison;
  std::optional<AgreementRule> rule;
  EstimatorConfig estimator;
  OutputConfig output;
  Json metric;  // null when absent

  /// The BVM scenario; throws ConfigError if model, data or agreement is missing.
  Scenario scenario() const;
};

ScenarioConfig parse_config(const Json& j);
ScenarioConfig load_config(const std::filesystem::path& path);
Json serialize_config(const ScenarioConfig& c);

}  // namespace bvm
