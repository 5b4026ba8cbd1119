#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bvm/config.hpp"
#include "bvm/engine.hpp"

namespace bvm::cli {

/// "ex-5.1", "ex-5.2", "ex-5.3".
const std::vector<std::string>& example_ids();

/// Named scenario configs that make up a built-in example. `seed` sets the
/// estimator seed (and, for ex-5.2, the data instance and model band seeds).
std::vector<std::pair<std::string, Json>> example_configs(std::string_view example, RngSeed seed);

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CsvFile {
  std::string name;
  std::string content;
};

struct Reproduction {
  std::string example;
  RngSeed seed = 0;
  Json results;
  std::vector<Check> checks;
  std::vector<CsvFile> csv;

  bool passed() const;
};

struct ReproduceOptions {
  EngineOptions engine;
  std::size_t seeds = 10;  // independent repetitions for the MC example
};

/// Runs a built-in example and checks it against the recorded targets.
/// Throws bvm::ConfigError for an unknown example id.
Reproduction reproduce(std::string_view example, RngSeed seed, const ReproduceOptions& opts = {});

// Pieces exposed for tests.
struct Ex53Result {
  SweepGrid model1;
  SweepGrid model2;
  Ratio averaged;
  double seconds = 0.0;
};
Ex53Result run_ex53(bool uncertain, EngineOptions opts = {});

struct Ex52Seed {
  RngSeed seed = 0;
  double det_threshold = 0.0;   // P(A | <eps> = 0.46), deterministic model
  double det_compound = 0.0;    // P(A | <eps>, beta_D), deterministic model
  double unc_threshold = 0.0;   // P(A | <eps> = 0.9), uncertain model
  double unc_compound = 0.0;    // P(A | <eps> = 0.9, beta_D), uncertain model
};
Ex52Seed run_ex52(RngSeed seed, EngineOptions opts = {});

struct Ex51Model {
  double model_std = 0.0;
  double model_power = 0.0;
  double data_power = 0.0;
  BvmEstimate product;
  BvmEstimate joint_mc;  // brute-force 2-D indicator
};
std::vector<Ex51Model> run_ex51(RngSeed seed, EngineOptions opts = {});

}  // namespace bvm::cli
