#include "commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bvm/csv.hpp"
#include "bvm/metrics.hpp"
#include "reproduce.hpp"

#ifndef BVM_VERSION
#define BVM_VERSION "0.0.0"
#endif

namespace bvm::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

EngineOptions engine(unsigned threads) { return EngineOptions{threads, EngineOptions{}.chunk_size}; }

Json ratio_json(const Ratio& r) {
  Json j = {{"status", std::string(status_name(r.status))}};
  j["value"] = r.status == RatioStatus::ok ? Json(r.value) : Json(nullptr);
  return j;
}

std::string ratio_text(const Ratio& r) {
  if (r.status == RatioStatus::ok) return format_double(r.value) + " (ok)";
  return std::string(status_name(r.status));
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << content;
}

std::string record_text(const Json& record) { return record.dump(2) + "\n"; }

// Strict readers for metric parameters.
void check_keys(const Json& j, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == key;
    if (!ok) throw ConfigError("/metric/" + key, "unknown key");
  }
}

const Json& param(const Json& metric, const std::string& key) {
  const auto it = metric.find(key);
  if (it == metric.end()) throw ConfigError("/metric/" + key, "missing required field");
  return *it;
}

double number_param(const Json& metric, const std::string& key) {
  const auto& v = param(metric, key);
  if (!v.is_number()) throw ConfigError("/metric/" + key, "expected a number");
  return v.get<double>();
}

double number_param(const Json& metric, const std::string& key, double fallback) {
  return metric.contains(key) ? number_param(metric, key) : fallback;
}

std::vector<double> numbers_param(const Json& metric, const std::string& key) {
  const auto& v = param(metric, key);
  if (!v.is_array() || !std::all_of(v.begin(), v.end(), [](const Json& x) { return x.is_number(); })) {
    throw ConfigError("/metric/" + key, "expected an array of numbers");
  }
  return v.get<std::vector<double>>();
}

std::size_t count_param(const Json& metric, const std::string& key, std::size_t fallback) {
  if (!metric.contains(key)) return fallback;
  const auto& v = metric[key];
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError("/metric/" + key, "expected a nonnegative integer");
  }
  return v.get<std::size_t>();
}

BinnedPdf pdf_param(const std::vector<double>& edges, const Json& metric, const std::string& key) {
  try {
    return BinnedPdf(edges, numbers_param(metric, key));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("/metric/" + key, e.what());
  }
}

const Distribution& need_model(const ScenarioConfig& c) {
  if (!c.model) throw ConfigError("/model", "missing required section");
  return *c.model;
}

const Distribution& need_data(const ScenarioConfig& c) {
  if (!c.data) throw ConfigError("/data", "missing required section");
  return *c.data;
}

const AgreementRule& need_rule(const ScenarioConfig& c) {
  if (!c.rule) throw ConfigError("/agreement", "missing required section");
  return *c.rule;
}

/// Scalar samples of a model or data section: the atoms of an Empirical
/// distribution, otherwise `samples` seeded draws.
std::vector<double> scalar_samples(const Distribution& d, const EstimatorConfig& est, std::uint32_t stream) {
  if (const auto* e = d.get_if<Empirical>()) {
    std::vector<double> out;
    for (const auto& v : e->samples) out.push_back(std::get<double>(v));
    return out;
  }
  return sample_scalar(d, est.seed, est.samples, stream);
}

Json metric_result(const std::string& name, const ScenarioConfig& c, unsigned threads) {
  const Json& m = c.metric;
  const auto& est = c.estimator;
  if (name == "reliability") {
    check_keys(m, {"name", "epsilon"});
    return {{"estimate", to_json(reliability(need_model(c), need_data(c), number_param(m, "epsilon"), est.samples,
                                             est.seed, engine(threads)))}};
  }
  if (name == "improved_reliability") {
    check_keys(m, {"name", "tolerances", "epsilon"});
    const auto& model = need_model(c);
    std::vector<double> tol = m.contains("tolerances")
                                  ? numbers_param(m, "tolerances")
                                  : std::vector<double>(model.dimension(), number_param(m, "epsilon"));
    return {{"estimate",
             to_json(improved_reliability(model, need_data(c), tol, est.samples, est.seed, engine(threads)))}};
  }
  if (name == "frequentist") {
    check_keys(m, {"name", "model_mean", "data"});
    const auto& d = param(m, "data");
    if (!d.is_object()) throw ConfigError("/metric/data", "expected {mean, std, n}");
    for (const auto& [key, value] : d.items()) {
      if (key != "mean" && key != "std" && key != "n") throw ConfigError("/metric/data/" + key, "unknown key");
    }
    DataSummary summary{number_param(d, "mean"), number_param(d, "std"), count_param(d, "n", 0)};
    return {{"estimate", to_json(frequentist(number_param(m, "model_mean"), summary, need_rule(c)))}};
  }
  if (name == "area_metric") {
    check_keys(m, {"name", "bootstrap"});
    const auto model = scalar_samples(need_model(c), est, streams::kModel);
    const auto data = scalar_samples(need_data(c), est, streams::kData);
    const std::size_t resamples = count_param(m, "bootstrap", 0);
    std::optional<BootstrapOptions> boot;
    if (resamples > 0) boot = BootstrapOptions{resamples, est.seed};
    return {{"estimate", to_json(area_metric_validation(model, data, need_rule(c), boot))},
            {"area", area_metric(ecdf(model), ecdf(data))}};
  }
  if (name == "binned_pdf") {
    check_keys(m, {"name", "edges", "model_masses", "counts", "draws"});
    const auto edges = numbers_param(m, "edges");
    const auto counts = numbers_param(m, "counts");
    return {{"estimate", to_json(binned_pdf_metric(pdf_param(edges, m, "model_masses"), counts, need_rule(c),
                                                   count_param(m, "draws", est.samples), est.seed))}};
  }
  if (name == "divergence") {
    check_keys(m, {"name", "edges", "model_masses", "data_masses"});
    const auto edges = numbers_param(m, "edges");
    return {{"estimate", to_json(divergence_validation(pdf_param(edges, m, "model_masses"),
                                                       pdf_param(edges, m, "data_masses"), need_rule(c)))}};
  }
  if (name == "hypothesis") {
    check_keys(m, {"name", "alpha"});
    const auto r = classical_hypothesis(need_data(c), number_param(m, "alpha"));
    return {{"estimate", to_json(r.estimate)}, {"acceptance", to_json(r.acceptance)}};
  }
  if (name == "power") {
    check_keys(m, {"name", "alpha", "alpha_hat", "region"});
    const double alpha = number_param(m, "alpha");
    const double alpha_hat = number_param(m, "alpha_hat", alpha);
    RegionKind kind = RegionKind::interval;
    if (m.contains("region")) {
      const auto& r = m["region"];
      if (r == "set") {
        kind = RegionKind::set;
      } else if (r != "interval") {
        throw ConfigError("/metric/region", "expected 'interval' or 'set'");
      }
    }
    const auto r = statistical_power_bvm(need_model(c), need_data(c), alpha, alpha_hat, kind,
                                         EmpiricalOptions{est.seed, std::max<std::size_t>(est.samples, 1000)});
    return {{"estimate", to_json(r.estimate)},
            {"model_power", r.model_power},
            {"data_power", r.data_power},
            {"systematic_error", r.systematic_error},
            {"data_region", to_json(r.data_region)},
            {"model_region", to_json(r.model_region)}};
  }
  if (name == "evidence") {
    check_keys(m, {"name", "sigma", "data"});
    if (!c.model_spec) throw ConfigError("/model", "evidence needs a model function, prior and grid");
    GaussianLikelihoodSpec lik{number_param(m, "sigma"), numbers_param(m, "data"), c.model_spec->grid};
    const auto e =
        bayesian_evidence(c.model_spec->function, c.model_spec->prior, lik, est.samples, est.seed, engine(threads));
    return {{"log_evidence", e.log_evidence},
            {"log_std_error", e.log_std_error},
            {"samples", e.samples},
            {"seed", e.seed}};
  }
  throw ConfigError("/metric/name", "unknown metric '" + name + "'");
}

void print_estimate(std::ostream& out, const Json& estimate) {
  out << "P(A|M,D,B) = " << format_double(estimate["p"].get<double>()) << " +- "
      << format_double(estimate["std_error"].get<double>()) << " (" << estimate["method"].get<std::string>() << ", "
      << estimate["samples"].get<std::size_t>() << " samples, seed " << estimate["seed"].get<RngSeed>() << ")\n";
}

void emit_record(const Json& record, const ScenarioConfig* c, const CommonOptions& opts, const std::string& csv) {
  std::string path = opts.out;
  std::string format = opts.format;
  if (c) {
    if (path.empty()) path = c->output.path;
    if (format.empty()) format = c->output.format;
  }
  if (path.empty()) return;
  write_file(path, format == "csv" && !csv.empty() ? csv : record_text(record));
}

}  // namespace

AxisSpec parse_axis(const std::string& text, const std::string& flag) {
  AxisSpec a;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> a.lo >> c1 >> a.hi >> c2 >> a.step) || c1 != ':' || c2 != ':' || !in.eof()) {
    throw ConfigError(flag, "expected lo:hi:step, got '" + text + "'");
  }
  if (!(a.step > 0.0) || a.hi < a.lo) throw ConfigError(flag, "need step > 0 and hi >= lo");
  return a;
}

ScenarioConfig load_scenario(const std::string& path, const CommonOptions& opts) {
  auto c = load_config(path);
  if (opts.seed) {
    c.estimator.seed = *opts.seed;
    c.source["estimator"]["seed"] = *opts.seed;
  }
  if (opts.samples) {
    if (*opts.samples == 0) throw ConfigError("--samples", "must be >= 1");
    c.estimator.samples = *opts.samples;
    c.source["estimator"]["samples"] = *opts.samples;
  }
  if (!opts.format.empty() && opts.format != "json" && opts.format != "csv") {
    throw ConfigError("--format", "expected 'json' or 'csv'");
  }
  return c;
}

BvmEstimate estimate_config(const ScenarioConfig& c, unsigned threads) {
  const unsigned t = threads ? threads : c.estimator.threads;
  switch (c.estimator.method) {
    case EstimateMethod::mc:
      return estimate_bvm_mc(c.scenario(), c.estimator.samples, c.estimator.seed, engine(t));
    case EstimateMethod::grid: {
      const auto s = c.scenario();
      auto e = estimate_bvm_grid(s.rule, discretize(s.model, c.estimator.grid), discretize(s.data, c.estimator.grid),
                                 engine(t));
      e.seed = c.estimator.seed;
      return e;
    }
    case EstimateMethod::closed_form:
      break;
  }
  throw Error("closed_form estimation is only available through metric subcommands");
}

Json run_record(const std::string& command, const Json& config, RngSeed seed, const Json& fields, double seconds) {
  Json r = {{"tool", "bvm"}, {"version", BVM_VERSION}, {"command", command}, {"config", config}, {"seed", seed}};
  for (const auto& [key, value] : fields.items()) r[key] = value;
  r["wall_time_s"] = seconds;
  return r;
}

int cmd_validate(const std::string& config, const CommonOptions& opts, std::ostream& out) {
  const auto t0 = Clock::now();
  const auto c = load_scenario(config, opts);
  const auto est = to_json(estimate_config(c, opts.threads));
  const auto rule = to_json(*c.rule);
  const auto record =
      run_record("validate", c.source, c.estimator.seed, {{"estimate", est}, {"rule", rule}}, seconds_since(t0));
  print_estimate(out, est);
  out << "B = " << rule.dump() << "\n";
  const std::string csv = "p,std_error,samples,seed,method\n" + format_double(est["p"].get<double>()) + "," +
                          format_double(est["std_error"].get<double>()) + "," +
                          std::to_string(est["samples"].get<std::size_t>()) + "," +
                          std::to_string(est["seed"].get<RngSeed>()) + "," + est["method"].get<std::string>() + "\n";
  emit_record(record, &c, opts, csv);
  return kExitOk;
}

int cmd_ratio(const std::string& config, const std::string& config_alt, double prior, double prior_alt,
              const CommonOptions& opts, std::ostream& out) {
  const auto t0 = Clock::now();
  const auto a = load_scenario(config, opts);
  const auto b = load_scenario(config_alt, opts);
  for (const char* section : {"data", "comparison", "agreement"}) {
    const Json none;
    const Json& x = a.source.contains(section) ? a.source[section] : none;
    const Json& y = b.source.contains(section) ? b.source[section] : none;
    if (x != y) throw RuleMismatch(std::string("ratio: the configs differ in their '") + section + "' section");
  }
  if (!(prior > 0.0) || !(prior_alt > 0.0)) throw ConfigError("--prior", "priors must be > 0");
  const auto pa = estimate_config(a, opts.threads);
  const auto pb = estimate_config(b, opts.threads);
  const auto factor = bvm_factor(pa, pb);
  const auto ratio = bvm_ratio(factor, prior, prior_alt);
  const Json fields = {{"estimates", {to_json(pa), to_json(pb)}},
                       {"config_alt", b.source},
                       {"priors", {prior, prior_alt}},
                       {"rule", to_json(*a.rule)},
                       {"factor", ratio_json(factor)},
                       {"ratio", ratio_json(ratio)}};
  const auto record = run_record("ratio", a.source, a.estimator.seed, fields, seconds_since(t0));
  print_estimate(out, fields["estimates"][0]);
  print_estimate(out, fields["estimates"][1]);
  out << "K(B) = " << ratio_text(factor) << "\n";
  out << "R(B) = " << ratio_text(ratio) << "\n";
  out << "B = " << fields["rule"].dump() << "\n";
  emit_record(record, nullptr, opts, "");
  return kExitOk;
}

int cmd_sweep(const std::vector<std::string>& configs, const AxisSpec& gamma, const AxisSpec& epsilon,
              std::optional<double> m, const CommonOptions& opts, std::ostream& out) {
  const auto t0 = Clock::now();
  if (configs.empty() || configs.size() > 2) throw ConfigError("--config", "sweep takes one or two configs");
  if (opts.out.empty()) throw ConfigError("--out", "sweep needs an output directory");
  std::vector<ScenarioConfig> cs;
  for (const auto& p : configs) cs.push_back(load_scenario(p, opts));
  if (cs.size() == 2 && cs[0].source.value("data", Json()) != cs[1].source.value("data", Json())) {
    throw RuleMismatch("sweep: the configs differ in their 'data' section");
  }
  if (!m) {
    const auto* ge = cs[0].rule ? cs[0].rule->get_if<rules::GammaEpsilon>() : nullptr;
    if (!ge) throw ConfigError("--m", "no m given and the agreement is not a gamma_epsilon rule");
    m = ge->m;
  }
  const auto gammas = axis_values(gamma.lo, gamma.hi, gamma.step);
  const auto epsilons = axis_values(epsilon.lo, epsilon.hi, epsilon.step);
  const std::filesystem::path dir(opts.out);
  std::vector<SweepGrid> grids;
  Json fields = {{"gamma", {gamma.lo, gamma.hi, gamma.step}},
                 {"epsilon", {epsilon.lo, epsilon.hi, epsilon.step}},
                 {"m", *m},
                 {"configs", Json::array()},
                 {"totals", Json::array()}};
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const auto& c = cs[i];
    const SweepEstimator est{c.estimator.method, c.estimator.samples, c.estimator.seed, c.estimator.grid};
    grids.push_back(sweep(c.scenario(), gammas, epsilons, *m, est, engine(opts.threads ? opts.threads : c.estimator.threads)));
    std::ostringstream csv;
    write_sweep_csv(csv, grids.back());
    const auto name = "model" + std::to_string(i + 1) + ".csv";
    write_file(dir / name, csv.str());
    fields["configs"].push_back(c.source);
    fields["totals"].push_back(grids.back().total());
    out << name << ": " << gammas.size() << " x " << epsilons.size() << " cells, sum " << format_double(grids.back().total())
        << "\n";
  }
  if (grids.size() == 2) {
    std::ostringstream csv;
    write_ratio_csv(csv, grids[0], grids[1]);
    write_file(dir / "ratio.csv", csv.str());
    const auto avg = averaged_boolean_ratio(grids[0], grids[1]);
    fields["averaged_ratio"] = ratio_json(avg);
    out << "averaged ratio R(B) = "
        << (avg.status == RatioStatus::ok ? format_fixed(avg.value, 4) : std::string(status_name(avg.status))) << "\n";
  }
  const auto record = run_record("sweep", cs[0].source, cs[0].estimator.seed, fields, seconds_since(t0));
  write_file(dir / "run.json", record_text(record));
  return kExitOk;
}

int cmd_reproduce(const std::string& example, std::size_t seeds, const CommonOptions& opts, std::ostream& out) {
  const auto t0 = Clock::now();
  const RngSeed seed = opts.seed.value_or(0);
  ReproduceOptions ro;
  ro.engine = engine(opts.threads);
  ro.seeds = seeds;
  const auto rep = reproduce(example, seed, ro);
  Json checks = Json::array();
  for (const auto& c : rep.checks) {
    out << (c.pass ? "PASS  " : "FAIL  ") << example << "  " << c.name;
    if (!c.detail.empty()) out << "  [" << c.detail << "]";
    out << "\n";
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  if (!opts.out.empty()) {
    const std::filesystem::path dir(opts.out);
    Json configs = Json::object();
    for (const auto& [name, cfg] : example_configs(example, seed)) configs[name] = serialize_config(parse_config(cfg));
    const auto record = run_record("reproduce " + example, configs, seed,
                                   {{"results", rep.results}, {"checks", checks}, {"passed", rep.passed()}},
                                   seconds_since(t0));
    write_file(dir / "run.json", record_text(record));
    for (const auto& f : rep.csv) write_file(dir / f.name, f.content);
  }
  return rep.passed() ? kExitOk : kExitAcceptance;
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {"reliability", "improved_reliability", "frequentist",
                                                 "area_metric", "binned_pdf",           "divergence",
                                                 "hypothesis",  "power",                "evidence"};
  return names;
}

int cmd_metric(const std::string& name, const std::string& config, const CommonOptions& opts, std::ostream& out) {
  const auto t0 = Clock::now();
  const auto c = load_scenario(config, opts);
  if (!c.metric.is_object()) throw ConfigError("/metric", "missing required section");
  if (c.metric["name"] != name) {
    throw ConfigError("/metric/name", "config names metric '" + c.metric["name"].get<std::string>() +
                                          "' but the command is '" + name + "'");
  }
  auto fields = metric_result(name, c, opts.threads);
  if (c.rule) fields["rule"] = to_json(*c.rule);
  const auto record = run_record(name, c.source, c.estimator.seed, fields, seconds_since(t0));
  if (fields.contains("estimate")) {
    print_estimate(out, fields["estimate"]);
  } else {
    out << "log p(Y|M) = " << format_double(fields["log_evidence"].get<double>()) << " +- "
        << format_double(fields["log_std_error"].get<double>()) << "\n";
  }
  if (c.rule) out << "B = " << fields["rule"].dump() << "\n";
  emit_record(record, &c, opts, "");
  return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian validation metric: probability of model-data agreement", "bvm"};
  app.set_version_flag("--version", BVM_VERSION);
  app.require_subcommand(1);

  CommonOptions opts;
  RngSeed seed = 0;
  std::size_t samples = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "RNG seed (overrides the config)");
    sub->add_option("--samples", samples, "Monte Carlo sample count K (overrides the config)");
    sub->add_option("--out", opts.out, "Output file (directory for sweep/reproduce)");
    sub->add_option("--format", opts.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--threads", opts.threads, "Worker threads (default: BVM_THREADS or all cores)");
  };

  std::string config;
  auto* validate = app.add_subcommand("validate", "Estimate P(A|M,D) for one scenario");
  validate->add_option("--config", config, "Scenario config (JSON)")->required();
  add_common(validate);

  std::vector<std::string> ratio_configs;
  double prior = 1.0, prior_alt = 1.0;
  auto* ratio = app.add_subcommand("ratio", "BVM factor and ratio of two models under one agreement rule");
  ratio->add_option("--config", ratio_configs, "Model and alternative configs")->required()->expected(2);
  ratio->add_option("--prior", prior, "Prior probability of the first model");
  ratio->add_option("--prior-alt", prior_alt, "Prior probability of the alternative model");
  add_common(ratio);

  std::vector<std::string> sweep_configs;
  std::string gamma_spec = "0.75:1:0.01", epsilon_spec = "0:1:0.01";
  std::optional<double> m;
  auto* sweep_cmd = app.add_subcommand("sweep", "(gamma, epsilon) grid of the gamma-epsilon agreement rule");
  sweep_cmd->add_option("--config", sweep_configs, "One or two model configs")->required()->expected(1, 2);
  sweep_cmd->add_option("--gamma", gamma_spec, "gamma axis lo:hi:step")->capture_default_str();
  sweep_cmd->add_option("--epsilon", epsilon_spec, "epsilon axis lo:hi:step")->capture_default_str();
  sweep_cmd->add_option("--m", m, "Outlier multiple m (default: from the agreement rule)");
  add_common(sweep_cmd);

  std::string example;
  std::size_t seeds = 10;
  auto* repro = app.add_subcommand("reproduce", "Run a built-in example against its recorded targets");
  repro->add_option("example", example, "Example id")->required()->check(CLI::IsMember(example_ids()));
  repro->add_option("--seeds", seeds, "Repetitions for Monte Carlo examples")->capture_default_str();
  add_common(repro);

  std::vector<CLI::App*> metric_cmds;
  for (const auto& name : metric_names()) {
    auto* sub = app.add_subcommand(name, "Run the '" + name + "' metric from the config's metric section");
    sub->add_option("--config", config, "Scenario config (JSON)")->required();
    add_common(sub);
    metric_cmds.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitSchema;
  }

  try {
    auto* used = app.get_subcommands().front();
    if (used->count("--seed")) opts.seed = seed;
    if (used->count("--samples")) opts.samples = samples;
    if (used == validate) return cmd_validate(config, opts, out);
    if (used == ratio) return cmd_ratio(ratio_configs[0], ratio_configs[1], prior, prior_alt, opts, out);
    if (used == sweep_cmd) {
      return cmd_sweep(sweep_configs, parse_axis(gamma_spec, "--gamma"), parse_axis(epsilon_spec, "--epsilon"), m,
                       opts, out);
    }
    if (used == repro) return cmd_reproduce(example, seeds, opts, out);
    return cmd_metric(used->get_name(), config, opts, out);
  } catch (const ConfigError& e) {
    err << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const RuleMismatch& e) {
    err << "rule mismatch: " << e.what() << "\n";
    return kExitRuleMismatch;
  } catch (const std::exception& e) {
    err << "estimation error: " << e.what() << "\n";
    return kExitEstimation;
  }
}

}  // namespace bvm::cli
