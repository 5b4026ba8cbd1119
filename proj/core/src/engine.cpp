#include "bvm/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "bvm/error.hpp"
#include "bvm/parallel.hpp"

namespace bvm {

namespace {

std::size_t chunk_count(std::size_t n, std::size_t chunk) { return (n + chunk - 1) / chunk; }

std::pair<Value, Value> draw_pair(const Scenario& s, RngSeed seed, std::size_t k) {
  if (s.joint) {
    DrawRng rng(seed, streams::kJoint, k);
    return s.joint(rng);
  }
  DrawRng model_rng(seed, streams::kModel, k);
  DrawRng data_rng(seed, streams::kData, k);
  return {s.model.draw(model_rng), s.data.draw(data_rng)};
}

void check_weights(const WeightedValues& values, const char* which) {
  if (values.empty()) throw Error(std::string(which) + " grid is empty");
  double total = 0.0;
  for (const auto& v : values) {
    if (!(v.weight >= 0.0)) throw Error(std::string(which) + " grid has a negative weight");
    total += v.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(std::string(which) + " grid weights must sum to 1");
}

const Path& as_path(const Value& v, const char* what) {
  if (const auto* p = std::get_if<Path>(&v)) return *p;
  throw Error(std::string(what) + ": expected path values, got " + value_kind_name(v));
}

/// Weighted scalar grid for one-dimensional distributions.
std::vector<std::pair<double, double>> discretize_scalar(const Distribution& dist, const GridSpec& spec) {
  const std::size_t n = spec.values_per_dimension;
  std::vector<std::pair<double, double>> out;
  auto density_grid = [&](double lo, double hi) {
    if (n == 1) {
      out.emplace_back(0.5 * (lo + hi), 1.0);
      return;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
      out.emplace_back(x, *density(dist, x));
    }
  };
  if (const auto* d = dist.get_if<DiracDelta>()) {
    out.emplace_back(std::get<double>(d->value), 1.0);
  } else if (const auto* d = dist.get_if<Normal>()) {
    density_grid(d->mean - spec.span * d->std, d->mean + spec.span * d->std);
  } else if (const auto* d = dist.get_if<StudentT>()) {
    density_grid(d->location - spec.span * d->scale, d->location + spec.span * d->scale);
  } else if (const auto* d = dist.get_if<Uniform>()) {
    for (std::size_t i = 0; i < n; ++i) {
      out.emplace_back(d->lo + (d->hi - d->lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(n), 1.0);
    }
  } else if (const auto* d = dist.get_if<ShiftedExponential>()) {
    density_grid(d->shift, d->shift + spec.span * 2.0 / d->rate);
  } else if (const auto* d = dist.get_if<Categorical>()) {
    for (std::size_t i = 0; i < d->values.size(); ++i) {
      if (d->probs[i] > 0.0) out.emplace_back(std::get<double>(d->values[i]), d->probs[i]);
    }
  } else if (const auto* d = dist.get_if<Empirical>()) {
    for (const auto& s : d->samples) out.emplace_back(std::get<double>(s), 1.0);
  } else {
    throw Error(std::string("discretize: unsupported scalar distribution ") + dist.type_name());
  }
  double total = 0.0;
  for (const auto& [x, w] : out) total += w;
  for (auto& [x, w] : out) w /= total;
  return out;
}

/// Weighted real-vector grid (Cartesian product over components).
std::vector<std::pair<Path, double>> discretize_vector(const Distribution& dist, const GridSpec& spec) {
  constexpr std::size_t kMaxGridPoints = 20'000'000;
  std::vector<std::pair<Path, double>> out;
  if (dist.is_scalar()) {
    for (auto& [x, w] : discretize_scalar(dist, spec)) out.emplace_back(Path{x}, w);
    return out;
  }
  if (const auto* d = dist.get_if<DiracDelta>()) {
    out.emplace_back(std::get<Path>(d->value), 1.0);
    return out;
  }
  if (const auto* d = dist.get_if<Empirical>()) {
    for (const auto& s : d->samples) out.emplace_back(std::get<Path>(s), 1.0 / static_cast<double>(d->samples.size()));
    return out;
  }
  if (const auto* d = dist.get_if<IndependentProduct>()) {
    out.emplace_back(Path{}, 1.0);
    for (const auto& c : d->components) {
      const auto part = discretize_vector(c, spec);
      if (out.size() * part.size() > kMaxGridPoints) throw Error("discretize: grid too large");
      std::vector<std::pair<Path, double>> next;
      next.reserve(out.size() * part.size());
      for (const auto& [head, wh] : out) {
        for (const auto& [tail, wt] : part) {
          Path p = head;
          p.insert(p.end(), tail.begin(), tail.end());
          next.emplace_back(std::move(p), wh * wt);
        }
      }
      out = std::move(next);
    }
    return out;
  }
  if (const auto* d = dist.get_if<PushForward>()) {
    out = discretize_vector(*d->prior, spec);
    for (auto& [params, w] : out) params = d->model.evaluate(params, d->grid);
    return out;
  }
  throw Error(std::string("discretize: unsupported distribution ") + dist.type_name());
}

}  // namespace

std::string_view method_name(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::mc:
      return "mc";
    case EstimateMethod::grid:
      return "grid";
    case EstimateMethod::closed_form:
      return "closed_form";
  }
  return "unknown";
}

BvmEstimate estimate_bvm_mc(const Scenario& s, std::size_t samples, RngSeed seed, EngineOptions opts) {
  if (samples == 0) throw Error("estimate_bvm_mc: K must be >= 1");
  const std::size_t chunk = std::max<std::size_t>(opts.chunk_size, 1);
  const std::size_t chunks = chunk_count(samples, chunk);
  std::vector<double> sum(chunks, 0.0);
  std::vector<double> sum_sq(chunks, 0.0);
  parallel_for(chunks, opts.threads, [&](std::size_t c) {
    const std::size_t begin = c * chunk;
    const std::size_t end = std::min(samples, begin + chunk);
    double acc = 0.0;
    double acc_sq = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
      const auto [zhat, z] = draw_pair(s, seed, k);
      const double w = evaluate_kernel(s.rule, zhat, z);
      acc += w;
      acc_sq += w * w;
    }
    sum[c] = acc;
    sum_sq[c] = acc_sq;
  });
  double total = 0.0;
  double total_sq = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    total += sum[c];
    total_sq += sum_sq[c];
  }
  const double n = static_cast<double>(samples);
  BvmEstimate est;
  est.p = std::clamp(total / n, 0.0, 1.0);
  est.samples = samples;
  est.seed = seed;
  est.method = EstimateMethod::mc;
  if (s.rule.is_hard()) {
    est.std_error = std::sqrt(est.p * (1.0 - est.p) / n);
  } else if (samples > 1) {
    const double var = std::max(0.0, (total_sq - n * est.p * est.p) / (n - 1.0));
    est.std_error = std::sqrt(var / n);
  }
  return est;
}

BvmEstimate estimate_bvm_grid(const AgreementRule& rule, const WeightedValues& model, const WeightedValues& data,
                              EngineOptions opts) {
  check_weights(model, "model");
  check_weights(data, "data");
  const std::size_t chunk = std::max<std::size_t>(opts.chunk_size / std::max<std::size_t>(data.size(), 1), 1);
  const std::size_t chunks = chunk_count(model.size(), chunk);
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, opts.threads, [&](std::size_t c) {
    const std::size_t end = std::min(model.size(), (c + 1) * chunk);
    double acc = 0.0;
    for (std::size_t i = c * chunk; i < end; ++i) {
      if (model[i].weight == 0.0) continue;
      double inner = 0.0;
      for (const auto& d : data) {
        if (d.weight != 0.0) inner += d.weight * evaluate_kernel(rule, model[i].value, d.value);
      }
      acc += model[i].weight * inner;
    }
    partial[c] = acc;
  });
  BvmEstimate est;
  est.p = std::clamp(std::accumulate(partial.begin(), partial.end(), 0.0), 0.0, 1.0);
  est.samples = model.size() * data.size();
  est.method = EstimateMethod::grid;
  return est;
}

WeightedValues discretize(const Distribution& dist, GridSpec spec) {
  if (spec.values_per_dimension == 0) throw Error("discretize: values per dimension must be >= 1");
  WeightedValues out;
  if (const auto* c = dist.get_if<Categorical>()) {
    for (std::size_t i = 0; i < c->values.size(); ++i) {
      if (c->probs[i] > 0.0) out.push_back({c->values[i], c->probs[i]});
    }
    return out;
  }
  if (dist.is_scalar()) {
    for (auto& [x, w] : discretize_scalar(dist, spec)) out.push_back({x, w});
    return out;
  }
  auto grid = discretize_vector(dist, spec);
  out.reserve(grid.size());
  for (auto& [p, w] : grid) out.push_back({std::move(p), w});
  return out;
}

std::vector<ConfidenceRegion> path_confidence_band(const Distribution& paths, double level, std::size_t samples,
                                                   RngSeed seed, EngineOptions opts) {
  if (!(level > 0.0 && level <= 1.0)) throw Error("confidence band: level must be in (0, 1]");
  if (samples < 1000) throw Error("confidence band: at least 1000 samples are required");
  const std::size_t n = paths.dimension();
  // Column-major so each point's samples are contiguous for sorting.
  std::vector<double> draws(samples * n);
  const std::size_t chunk = std::max<std::size_t>(opts.chunk_size, 1);
  parallel_for(chunk_count(samples, chunk), opts.threads, [&](std::size_t c) {
    Path row(n);
    const std::size_t end = std::min(samples, (c + 1) * chunk);
    for (std::size_t k = c * chunk; k < end; ++k) {
      DrawRng rng(seed, streams::kBand, k);
      paths.draw_into(rng, row);
      for (std::size_t i = 0; i < n; ++i) draws[i * samples + k] = row[i];
    }
  });
  std::vector<ConfidenceRegion> band;
  band.reserve(n);
  const double alpha = 1.0 - level;
  for (std::size_t i = 0; i < n; ++i) {
    auto col = std::span<double>(draws).subspan(i * samples, samples);
    std::sort(col.begin(), col.end());
    band.push_back(ConfidenceRegion::interval(sorted_quantile(col, 0.5 * alpha), sorted_quantile(col, 1.0 - 0.5 * alpha),
                                              level));
  }
  return band;
}

ComparisonDensity comparison_density(const Scenario& s, const ComparisonFnSpec& fn, std::size_t samples,
                                     std::size_t bins, RngSeed seed, EngineOptions opts) {
  if (bins == 0) throw Error("comparison_density: bins must be >= 1");
  if (samples < bins) throw Error("comparison_density: K must be >= bins");
  std::vector<double> values(samples);
  const std::size_t chunk = std::max<std::size_t>(opts.chunk_size, 1);
  parallel_for(chunk_count(samples, chunk), opts.threads, [&](std::size_t c) {
    const std::size_t end = std::min(samples, (c + 1) * chunk);
    for (std::size_t k = c * chunk; k < end; ++k) {
      const auto [zhat, z] = draw_pair(s, seed, k);
      values[k] = compare(fn, zhat, z);
      if (!std::isfinite(values[k])) throw Error("comparison_density: non-finite comparison value");
    }
  });
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  std::vector<double> edges;
  if (*hi_it > *lo_it) {
    edges.resize(bins + 1);
    const double width = (*hi_it - *lo_it) / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i) edges[i] = *lo_it + width * static_cast<double>(i);
    edges.back() = *hi_it;
  } else {
    edges = BinnedPdf::pooled_edges(values, {}, bins);
  }
  const auto pdf = BinnedPdf::histogram(values, edges);
  return {std::vector<double>(pdf.edges().begin(), pdf.edges().end()),
          std::vector<double>(pdf.masses().begin(), pdf.masses().end()), samples};
}

double bvm_from_density(const ComparisonDensity& d, const AgreementRule& rule_over_f) {
  double p = 0.0;
  for (std::size_t i = 0; i < d.masses.size(); ++i) {
    if (d.masses[i] == 0.0) continue;
    const double mid = 0.5 * (d.edges[i] + d.edges[i + 1]);
    p += d.masses[i] * evaluate_kernel(rule_over_f, mid, 0.0);
  }
  return std::clamp(p, 0.0, 1.0);
}

std::string_view status_name(RatioStatus s) {
  switch (s) {
    case RatioStatus::ok:
      return "ok";
    case RatioStatus::indeterminate:
      return "indeterminate";
    case RatioStatus::infinite:
      return "infinite";
  }
  return "unknown";
}

Ratio ratio_of(double num, double den) {
  if (den == 0.0) return {num == 0.0 ? RatioStatus::indeterminate : RatioStatus::infinite, 0.0};
  return {RatioStatus::ok, num / den};
}

Ratio bvm_factor(const BvmEstimate& p, const BvmEstimate& p_alt) { return ratio_of(p.p, p_alt.p); }

Ratio bvm_ratio(const Ratio& factor, double prior, double prior_alt) {
  if (!(prior > 0.0) || !(prior_alt > 0.0)) throw Error("bvm_ratio: priors must be positive");
  if (factor.status != RatioStatus::ok) return factor;
  return {RatioStatus::ok, factor.value * prior / prior_alt};
}

std::vector<double> axis_values(double lo, double hi, double step) {
  if (!(step > 0.0)) throw Error("axis: step must be positive");
  if (hi < lo) throw Error("axis: hi must be >= lo");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::round((lo + step * static_cast<double>(i)) * 1e12) / 1e12;
  return out;
}

ErrorProfiles::ErrorProfiles(std::size_t points, EstimateMethod method, RngSeed seed)
    : points_(points), method_(method), seed_(seed) {
  if (points == 0) throw Error("error profiles: paths must be nonempty");
}

void ErrorProfiles::add(std::span<const double> yhat, std::span<const double> y, double weight) {
  if (yhat.size() != points_ || y.size() != points_) throw Error("error profiles: path length mismatch");
  const std::size_t offset = errors_.size();
  errors_.resize(offset + points_);
  for (std::size_t i = 0; i < points_; ++i) errors_[offset + i] = std::abs(yhat[i] - y[i]);
  std::sort(errors_.begin() + static_cast<std::ptrdiff_t>(offset), errors_.end());
  weights_.push_back(weight);
}

ErrorProfiles profiles_from_grid(const WeightedValues& model, const WeightedValues& data, EngineOptions) {
  check_weights(model, "model");
  check_weights(data, "data");
  const std::size_t n = as_path(model.front().value, "sweep").size();
  ErrorProfiles out(n, EstimateMethod::grid);
  for (const auto& m : model) {
    for (const auto& d : data) {
      out.add(as_path(m.value, "sweep"), as_path(d.value, "sweep"), m.weight * d.weight);
    }
  }
  return out;
}

ErrorProfiles profiles_from_mc(const Scenario& s, std::size_t samples, RngSeed seed, EngineOptions opts) {
  if (samples == 0) throw Error("sweep: K must be >= 1");
  std::vector<std::pair<Value, Value>> pairs(samples);
  const std::size_t chunk = std::max<std::size_t>(opts.chunk_size, 1);
  parallel_for(chunk_count(samples, chunk), opts.threads, [&](std::size_t c) {
    const std::size_t end = std::min(samples, (c + 1) * chunk);
    for (std::size_t k = c * chunk; k < end; ++k) pairs[k] = draw_pair(s, seed, k);
  });
  ErrorProfiles out(as_path(pairs.front().first, "sweep").size(), EstimateMethod::mc, seed);
  const double w = 1.0 / static_cast<double>(samples);
  for (const auto& [zhat, z] : pairs) out.add(as_path(zhat, "sweep"), as_path(z, "sweep"), w);
  return out;
}

double SweepGrid::total() const {
  double t = 0.0;
  for (const auto& c : cells) t += c.p;
  return t;
}

SweepGrid sweep(const ErrorProfiles& profiles, std::span<const double> gammas, std::span<const double> epsilons,
                double m, EngineOptions opts) {
  if (gammas.empty() || epsilons.empty()) throw Error("sweep: axes must be nonempty");
  if (!(m >= 1.0)) throw Error("sweep: m must be >= 1");
  if (!std::is_sorted(epsilons.begin(), epsilons.end())) throw Error("sweep: epsilons must be ascending");
  for (double g : gammas) {
    if (!(g >= 0.0 && g <= 1.0)) throw Error("sweep: gamma values must be in [0, 1]");
  }
  const std::size_t n = profiles.points();
  const std::size_t ng = gammas.size();
  const std::size_t ne = epsilons.size();

  // Minimal within-epsilon count required at each gamma.
  std::vector<std::size_t> needed(ng);
  for (std::size_t g = 0; g < ng; ++g) {
    std::size_t k = 0;
    while (k < n && !fraction_meets(k, n, gammas[g])) ++k;
    needed[g] = k;
  }

  // For a fixed path and gamma the agreeing epsilons form an up-set of the
  // ascending axis: the k-th smallest error and max/m both bound epsilon from
  // below. Record the first agreeing index, then prefix-sum along epsilon.
  const std::size_t chunk = 8192;
  const std::size_t chunks = chunk_count(profiles.size(), chunk);
  std::vector<std::vector<double>> partial(chunks);
  parallel_for(chunks, opts.threads, [&](std::size_t c) {
    auto& diff = partial[c];
    diff.assign(ng * (ne + 1), 0.0);
    const std::size_t end = std::min(profiles.size(), (c + 1) * chunk);
    for (std::size_t p = c * chunk; p < end; ++p) {
      const double w = profiles.weight(p);
      if (w == 0.0) continue;
      const auto errs = profiles.sorted_errors(p);
      const double worst = errs.back();
      for (std::size_t g = 0; g < ng; ++g) {
        const double kth = needed[g] == 0 ? -INFINITY : errs[needed[g] - 1];
        const auto first = std::partition_point(epsilons.begin(), epsilons.end(), [&](double eps) {
          return !(kth <= eps && worst <= m * eps);
        });
        diff[g * (ne + 1) + static_cast<std::size_t>(first - epsilons.begin())] += w;
      }
    }
  });

  SweepGrid grid;
  grid.gammas.assign(gammas.begin(), gammas.end());
  grid.epsilons.assign(epsilons.begin(), epsilons.end());
  grid.cells.resize(ng * ne);
  const double count = static_cast<double>(profiles.size());
  for (std::size_t g = 0; g < ng; ++g) {
    double running = 0.0;
    for (std::size_t e = 0; e < ne; ++e) {
      for (std::size_t c = 0; c < chunks; ++c) running += partial[c][g * (ne + 1) + e];
      BvmEstimate& cell = grid.cells[g * ne + e];
      cell.p = std::clamp(running, 0.0, 1.0);
      cell.method = profiles.method();
      cell.seed = profiles.seed();
      cell.samples = profiles.size();
      if (profiles.method() == EstimateMethod::mc) cell.std_error = std::sqrt(cell.p * (1.0 - cell.p) / count);
    }
  }
  return grid;
}

SweepGrid sweep(const Scenario& s, std::span<const double> gammas, std::span<const double> epsilons, double m,
                const SweepEstimator& estimator, EngineOptions opts) {
  if (estimator.method == EstimateMethod::mc) {
    return sweep(profiles_from_mc(s, estimator.samples, estimator.seed, opts), gammas, epsilons, m, opts);
  }
  if (estimator.method == EstimateMethod::grid) {
    return sweep(profiles_from_grid(discretize(s.model, estimator.grid), discretize(s.data, estimator.grid), opts),
                 gammas, epsilons, m, opts);
  }
  throw Error("sweep: estimator must be mc or grid");
}

Ratio averaged_boolean_ratio(const SweepGrid& g1, const SweepGrid& g2) {
  if (g1.gammas != g2.gammas || g1.epsilons != g2.epsilons) throw Error("averaged ratio: grid axes differ");
  return ratio_of(g1.total(), g2.total());
}

std::vector<Ratio> cell_ratios(const SweepGrid& g1, const SweepGrid& g2) {
  if (g1.gammas != g2.gammas || g1.epsilons != g2.epsilons) throw Error("cell ratios: grid axes differ");
  std::vector<Ratio> out(g1.cells.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ratio_of(g1.cells[i].p, g2.cells[i].p);
  return out;
}

}  // namespace bvm
