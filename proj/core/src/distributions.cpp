#include "bvm/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "bvm/error.hpp"
#include "overloaded.hpp"

namespace bvm {

namespace {

using detail::Overloaded;

constexpr double kPi = 3.14159265358979323846;

bool is_real_vector(const Value& v) { return std::holds_alternative<Path>(v); }

std::size_t value_dimension(const Value& v) {
  if (const auto* p = std::get_if<Path>(&v)) return p->size();
  return 1;
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(what);
}

const Value& draw_categorical(const Categorical& c, DrawRng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < c.probs.size(); ++i) {
    if (c.probs[i] <= 0.0) continue;
    last = i;
    acc += c.probs[i];
    if (u < acc) return c.values[i];
  }
  return c.values[last];
}

}  // namespace

InputGrid::InputGrid(std::vector<double> points) : points_(std::move(points)) {
  require(!points_.empty(), "input grid: at least one point is required");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    require(points_[i] > points_[i - 1], "input grid: points must be strictly increasing");
  }
}

InputGrid InputGrid::linspace(double lo, double hi, std::size_t n) {
  require(n >= 1, "input grid: n must be >= 1");
  if (n == 1) return InputGrid({lo});
  std::vector<double> pts(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) pts[i] = lo + step * static_cast<double>(i);
  pts.back() = hi;
  return InputGrid(std::move(pts));
}

ModelFunction ModelFunction::polynomial(std::vector<double> powers) {
  require(!powers.empty(), "polynomial model: at least one power is required");
  std::vector<std::string> names;
  for (std::size_t k = 0; k < powers.size(); ++k) names.push_back("c" + std::to_string(k));
  ModelFunction fn(Family::polynomial, std::move(names));
  fn.powers_ = std::move(powers);
  return fn;
}

ModelFunction ModelFunction::damped_oscillator() {
  return ModelFunction(Family::damped_oscillator, {"a", "b", "c", "d", "f", "g"});
}

ModelFunction ModelFunction::tabulated(std::vector<double> knots, std::vector<std::vector<double>> basis) {
  require(!basis.empty(), "tabulated model: at least one basis column is required");
  InputGrid check(knots);  // validates ordering
  for (const auto& col : basis) {
    require(col.size() == knots.size(), "tabulated model: basis column length must equal knot count");
  }
  std::vector<std::string> names;
  for (std::size_t k = 0; k < basis.size(); ++k) names.push_back("w" + std::to_string(k));
  ModelFunction fn(Family::tabulated, std::move(names));
  fn.knots_ = std::move(knots);
  fn.basis_ = std::move(basis);
  return fn;
}

Path ModelFunction::evaluate(std::span<const double> params, const InputGrid& grid) const {
  Path out(grid.size());
  evaluate_into(params, grid, out);
  return out;
}

void ModelFunction::evaluate_into(std::span<const double> params, const InputGrid& grid,
                                  std::span<double> out) const {
  if (params.size() != parameter_count()) throw Error("model function: parameter count mismatch");
  if (out.size() != grid.size()) throw Error("model function: output length must equal grid length");
  const auto xs = grid.points();
  switch (family_) {
    case Family::polynomial:
      for (std::size_t i = 0; i < xs.size(); ++i) {
        double y = 0.0;
        for (std::size_t k = 0; k < powers_.size(); ++k) {
          y += params[k] * (powers_[k] == 0.0 ? 1.0 : std::pow(xs[i], powers_[k]));
        }
        out[i] = y;
      }
      break;
    case Family::damped_oscillator: {
      const double a = params[0], b = params[1], c = params[2], d = params[3], f = params[4], g = params[5];
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        out[i] = a + b * x * std::exp(-c * std::cos(d * x)) + f * std::sin(g * x);
      }
      break;
    }
    case Family::tabulated:
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
        std::size_t hi = std::clamp<std::size_t>(static_cast<std::size_t>(it - knots_.begin()), 1,
                                                 std::max<std::size_t>(knots_.size() - 1, 1));
        double y = 0.0;
        for (std::size_t k = 0; k < basis_.size(); ++k) {
          double phi = basis_[k][0];
          if (knots_.size() > 1) {
            const double t = (x - knots_[hi - 1]) / (knots_[hi] - knots_[hi - 1]);
            phi = basis_[k][hi - 1] + std::clamp(t, 0.0, 1.0) * (basis_[k][hi] - basis_[k][hi - 1]);
          }
          y += params[k] * phi;
        }
        out[i] = y;
      }
      break;
  }
}

Distribution::Distribution(Variant v) : v_(std::move(v)) {
  std::visit(
      Overloaded{
          [](const DiracDelta& d) {
            require(std::holds_alternative<double>(d.value) || is_real_vector(d.value),
                    "dirac: value must be a real or a real vector");
          },
          [](const Normal& d) { require(d.std > 0.0 && std::isfinite(d.mean), "normal: std must be > 0"); },
          [](const StudentT& d) {
            require(d.dof > 0.0 && d.scale > 0.0, "student_t: dof and scale must be > 0");
          },
          [](const Uniform& d) { require(d.lo < d.hi, "uniform: lo must be < hi"); },
          [](const ShiftedExponential& d) { require(d.rate > 0.0, "shifted_exponential: rate must be > 0"); },
          [](const Categorical& d) {
            require(!d.values.empty(), "categorical: at least one value is required");
            require(d.values.size() == d.probs.size(), "categorical: values and probs differ in length");
            double total = 0.0;
            for (const auto& v : d.values) {
              require(std::holds_alternative<double>(v) || std::holds_alternative<std::string>(v),
                      "categorical: values must be numbers or labels");
            }
            for (double p : d.probs) {
              require(p >= 0.0, "categorical: probs must be nonnegative");
              total += p;
            }
            require(std::abs(total - 1.0) <= 1e-12, "categorical: probs must sum to 1");
          },
          [](const Empirical& d) {
            require(!d.samples.empty(), "empirical: at least one sample is required");
            const std::size_t dim = value_dimension(d.samples.front());
            for (const auto& s : d.samples) {
              require(std::holds_alternative<double>(s) || is_real_vector(s),
                      "empirical: samples must be reals or real vectors");
              require(value_dimension(s) == dim && s.index() == d.samples.front().index(),
                      "empirical: samples must share one shape");
            }
          },
          [](const IndependentProduct& d) {
            require(!d.components.empty(), "independent_product: at least one component is required");
            for (const auto& c : d.components) {
              require(!c.get_if<Categorical>() || std::all_of(c.get_if<Categorical>()->values.begin(),
                                                              c.get_if<Categorical>()->values.end(),
                                                              [](const Value& v) {
                                                                return std::holds_alternative<double>(v);
                                                              }),
                      "independent_product: components must be real-valued");
            }
          },
          [](const PushForward& d) {
            require(d.prior != nullptr, "push_forward: prior is required");
            require(d.prior->dimension() == d.model.parameter_count(),
                    "push_forward: prior dimension must equal model parameter count");
          },
      },
      v_);
}

bool Distribution::is_scalar() const {
  return std::visit(Overloaded{
                        [](const DiracDelta& d) { return std::holds_alternative<double>(d.value); },
                        [](const Categorical& d) { return std::holds_alternative<double>(d.values.front()); },
                        [](const Empirical& d) { return std::holds_alternative<double>(d.samples.front()); },
                        [](const IndependentProduct&) { return false; },
                        [](const PushForward&) { return false; },
                        [](const auto&) { return true; },
                    },
                    v_);
}

std::size_t Distribution::dimension() const {
  return std::visit(Overloaded{
                        [](const DiracDelta& d) { return value_dimension(d.value); },
                        [](const Empirical& d) { return value_dimension(d.samples.front()); },
                        [](const IndependentProduct& d) {
                          std::size_t n = 0;
                          for (const auto& c : d.components) n += c.dimension();
                          return n;
                        },
                        [](const PushForward& d) { return d.grid.size(); },
                        [](const auto&) { return std::size_t{1}; },
                    },
                    v_);
}

const char* Distribution::type_name() const {
  static constexpr const char* kNames[] = {"dirac",       "normal",   "student_t",           "uniform",
                                           "shifted_exponential", "categorical", "empirical",
                                           "independent_product", "push_forward"};
  return kNames[v_.index()];
}

double Distribution::draw_scalar(DrawRng& rng) const {
  return std::visit(
      Overloaded{
          [](const DiracDelta& d) -> double {
            if (const auto* x = std::get_if<double>(&d.value)) return *x;
            throw Error("dirac: not scalar");
          },
          [&](const Normal& d) { return d.mean + d.std * rng.normal(); },
          [&](const StudentT& d) {
            const double z = rng.normal();
            const double v = 2.0 * rng.gamma(0.5 * d.dof);
            return d.location + d.scale * z / std::sqrt(v / d.dof);
          },
          [&](const Uniform& d) { return d.lo + (d.hi - d.lo) * rng.uniform(); },
          [&](const ShiftedExponential& d) { return d.shift - std::log(rng.uniform()) / d.rate; },
          [&](const Categorical& d) -> double {
            const Value& v = draw_categorical(d, rng);
            if (const auto* x = std::get_if<double>(&v)) return *x;
            throw Error("categorical: labels are not scalar");
          },
          [&](const Empirical& d) -> double {
            const auto& s = d.samples[rng.below(d.samples.size())];
            if (const auto* x = std::get_if<double>(&s)) return *x;
            throw Error("empirical: samples are not scalar");
          },
          [](const auto&) -> double { throw Error("draw_scalar: distribution is not scalar"); },
      },
      v_);
}

void Distribution::draw_into(DrawRng& rng, std::span<double> out) const {
  if (out.size() != dimension()) throw Error("draw_into: output size mismatch");
  std::visit(Overloaded{
                 [&](const DiracDelta& d) {
                   if (const auto* p = std::get_if<Path>(&d.value)) {
                     std::copy(p->begin(), p->end(), out.begin());
                   } else {
                     out[0] = std::get<double>(d.value);
                   }
                 },
                 [&](const Empirical& d) {
                   const auto& s = d.samples[rng.below(d.samples.size())];
                   if (const auto* p = std::get_if<Path>(&s)) {
                     std::copy(p->begin(), p->end(), out.begin());
                   } else {
                     out[0] = std::get<double>(s);
                   }
                 },
                 [&](const IndependentProduct& d) {
                   std::size_t offset = 0;
                   for (const auto& c : d.components) {
                     const std::size_t n = c.dimension();
                     c.draw_into(rng, out.subspan(offset, n));
                     offset += n;
                   }
                 },
                 [&](const PushForward& d) {
                   std::vector<double> theta(d.prior->dimension());
                   d.prior->draw_into(rng, theta);
                   d.model.evaluate_into(theta, d.grid, out);
                 },
                 [&](const auto&) { out[0] = draw_scalar(rng); },
             },
             v_);
}

Value Distribution::draw(DrawRng& rng) const {
  if (const auto* c = get_if<Categorical>()) return draw_categorical(*c, rng);
  if (is_scalar()) return draw_scalar(rng);
  Path out(dimension());
  draw_into(rng, out);
  return out;
}

std::vector<Value> sample(const Distribution& dist, RngSeed seed, std::size_t n, std::uint32_t stream) {
  if (n == 0) throw Error("sample: n must be >= 1");
  std::vector<Value> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    DrawRng rng(seed, stream, i);
    out.push_back(dist.draw(rng));
  }
  return out;
}

std::vector<double> sample_scalar(const Distribution& dist, RngSeed seed, std::size_t n, std::uint32_t stream) {
  if (n == 0) throw Error("sample: n must be >= 1");
  if (!dist.is_scalar()) throw Error("sample_scalar: distribution is not scalar");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    DrawRng rng(seed, stream, i);
    out[i] = dist.draw_scalar(rng);
  }
  return out;
}

namespace {

double scalar_density(const Distribution& dist, double x) {
  return std::visit(
      Overloaded{
          [&](const DiracDelta& d) { return std::get<double>(d.value) == x ? 1.0 : 0.0; },
          [&](const Normal& d) {
            const double z = (x - d.mean) / d.std;
            return std::exp(-0.5 * z * z) / (d.std * std::sqrt(2.0 * kPi));
          },
          [&](const StudentT& d) {
            boost::math::students_t_distribution<double> t(d.dof);
            return boost::math::pdf(t, (x - d.location) / d.scale) / d.scale;
          },
          [&](const Uniform& d) { return (x >= d.lo && x <= d.hi) ? 1.0 / (d.hi - d.lo) : 0.0; },
          [&](const ShiftedExponential& d) { return x >= d.shift ? d.rate * std::exp(-d.rate * (x - d.shift)) : 0.0; },
          [](const auto&) -> double { throw Error("density: unreachable"); },
      },
      dist.variant());
}

}  // namespace

std::optional<double> density(const Distribution& dist, const Value& x) {
  if (dist.get_if<Empirical>() || dist.get_if<PushForward>()) return std::nullopt;
  if (const auto* c = dist.get_if<Categorical>()) {
    double mass = 0.0;
    for (std::size_t i = 0; i < c->values.size(); ++i) {
      if (c->values[i] == x) mass += c->probs[i];
    }
    return mass;
  }
  if (const auto* d = dist.get_if<DiracDelta>()) return d->value == x ? 1.0 : 0.0;
  if (const auto* prod = dist.get_if<IndependentProduct>()) {
    const auto* path = std::get_if<Path>(&x);
    if (!path || path->size() != dist.dimension()) throw Error("density: dimension mismatch");
    double result = 1.0;
    std::size_t offset = 0;
    for (const auto& c : prod->components) {
      const std::size_t n = c.dimension();
      Value part = n == 1 && c.is_scalar() ? Value((*path)[offset])
                                           : Value(Path(path->begin() + static_cast<std::ptrdiff_t>(offset),
                                                        path->begin() + static_cast<std::ptrdiff_t>(offset + n)));
      const auto d = density(c, part);
      if (!d) return std::nullopt;
      result *= *d;
      offset += n;
    }
    return result;
  }
  const auto* xs = std::get_if<double>(&x);
  if (!xs) throw Error("density: scalar distribution evaluated at a non-scalar value");
  return scalar_density(dist, *xs);
}

std::optional<double> cdf(const Distribution& dist, double x) {
  return std::visit(
      Overloaded{
          [&](const DiracDelta& d) -> std::optional<double> {
            if (const auto* v = std::get_if<double>(&d.value)) return x >= *v ? 1.0 : 0.0;
            return std::nullopt;
          },
          [&](const Normal& d) -> std::optional<double> {
            return 0.5 * std::erfc(-(x - d.mean) / (d.std * std::sqrt(2.0)));
          },
          [&](const StudentT& d) -> std::optional<double> {
            boost::math::students_t_distribution<double> t(d.dof);
            return boost::math::cdf(t, (x - d.location) / d.scale);
          },
          [&](const Uniform& d) -> std::optional<double> { return std::clamp((x - d.lo) / (d.hi - d.lo), 0.0, 1.0); },
          [&](const ShiftedExponential& d) -> std::optional<double> {
            return x < d.shift ? 0.0 : -std::expm1(-d.rate * (x - d.shift));
          },
          [&](const Categorical& d) -> std::optional<double> {
            double acc = 0.0;
            for (std::size_t i = 0; i < d.values.size(); ++i) {
              const auto* v = std::get_if<double>(&d.values[i]);
              if (!v) return std::nullopt;
              if (*v <= x) acc += d.probs[i];
            }
            return std::min(acc, 1.0);
          },
          [](const auto&) -> std::optional<double> { return std::nullopt; },
      },
      dist.variant());
}

std::optional<double> quantile(const Distribution& dist, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("quantile: p must be in [0, 1]");
  return std::visit(
      Overloaded{
          [&](const DiracDelta& d) -> std::optional<double> {
            if (const auto* v = std::get_if<double>(&d.value)) return *v;
            return std::nullopt;
          },
          [&](const Normal& d) -> std::optional<double> {
            if (p == 0.0) return -INFINITY;
            if (p == 1.0) return INFINITY;
            return boost::math::quantile(boost::math::normal_distribution<double>(d.mean, d.std), p);
          },
          [&](const StudentT& d) -> std::optional<double> {
            if (p == 0.0) return -INFINITY;
            if (p == 1.0) return INFINITY;
            boost::math::students_t_distribution<double> t(d.dof);
            return d.location + d.scale * boost::math::quantile(t, p);
          },
          [&](const Uniform& d) -> std::optional<double> { return d.lo + p * (d.hi - d.lo); },
          [&](const ShiftedExponential& d) -> std::optional<double> {
            if (p == 1.0) return INFINITY;
            return d.shift - std::log1p(-p) / d.rate;
          },
          [](const auto&) -> std::optional<double> { return std::nullopt; },
      },
      dist.variant());
}

double sorted_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error("quantile: no samples");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Distribution push_forward(const Distribution& prior, const ModelFunction& model, const InputGrid& grid) {
  if (prior.dimension() != model.parameter_count()) {
    throw Error("push_forward: prior dimension " + std::to_string(prior.dimension()) +
                " does not match model parameter count " + std::to_string(model.parameter_count()));
  }
  return Distribution(PushForward{std::make_shared<const Distribution>(prior), model, grid});
}

bool ConfidenceRegion::contains(double x) const {
  if (!labels.empty()) return contains(Value(x));
  for (const auto& iv : intervals) {
    if (x >= iv.lo && x <= iv.hi) return true;
  }
  return false;
}

bool ConfidenceRegion::contains(const Value& v) const {
  if (!labels.empty()) return std::find(labels.begin(), labels.end(), v) != labels.end();
  if (const auto* x = std::get_if<double>(&v)) return contains(*x);
  throw Error("confidence region: membership test needs a scalar");
}

ConfidenceRegion ConfidenceRegion::interval(double lo, double hi, double level) {
  ConfidenceRegion r;
  r.kind = Kind::interval;
  r.level = level;
  r.intervals.push_back({lo, hi});
  return r;
}

namespace {

constexpr std::size_t kMinEmpiricalSamples = 1000;

/// Sorted scalar samples backing the empirical fallback.
std::vector<double> empirical_sorted(const Distribution& dist, const EmpiricalOptions& opts) {
  std::vector<double> xs;
  if (const auto* e = dist.get_if<Empirical>()) {
    for (const auto& s : e->samples) xs.push_back(std::get<double>(s));
  } else {
    xs = sample_scalar(dist, opts.seed, opts.samples, streams::kAuxiliary);
  }
  if (xs.size() < kMinEmpiricalSamples) {
    throw Error("insufficient samples for an empirical region (" + std::to_string(xs.size()) + " < 1000)");
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

}  // namespace

ConfidenceRegion confidence_interval(const Distribution& dist, double level, EmpiricalOptions opts) {
  if (!dist.is_scalar()) throw Error("confidence_interval: distribution must be scalar");
  if (!(level > 0.0 && level <= 1.0)) throw Error("confidence_interval: level must be in (0, 1]");
  const double alpha = 1.0 - level;
  const auto lo = quantile(dist, 0.5 * alpha);
  const auto hi = quantile(dist, 1.0 - 0.5 * alpha);
  if (lo && hi) return ConfidenceRegion::interval(*lo, *hi, level);
  const auto xs = empirical_sorted(dist, opts);
  return ConfidenceRegion::interval(sorted_quantile(xs, 0.5 * alpha), sorted_quantile(xs, 1.0 - 0.5 * alpha),
                                    level);
}

std::vector<std::size_t> select_highest_mass(std::span<const double> masses, double level) {
  std::vector<std::size_t> order(masses.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return masses[a] > masses[b]; });
  std::vector<std::size_t> chosen;
  double acc = 0.0;
  for (std::size_t idx : order) {
    if (acc >= level - 1e-12) break;
    if (masses[idx] <= 0.0) break;
    chosen.push_back(idx);
    acc += masses[idx];
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

ConfidenceRegion confidence_set(const Distribution& dist, double level, std::size_t bins, EmpiricalOptions opts) {
  if (!(level > 0.0 && level <= 1.0)) throw Error("confidence_set: level must be in (0, 1]");
  if (bins == 0) throw Error("confidence_set: bin count must be positive");
  ConfidenceRegion region;
  region.kind = ConfidenceRegion::Kind::set;
  region.level = level;

  if (const auto* c = dist.get_if<Categorical>()) {
    for (std::size_t idx : select_highest_mass(c->probs, level)) region.labels.push_back(c->values[idx]);
    region.bin_count = region.labels.size();
    return region;
  }
  if (!dist.is_scalar()) throw Error("confidence_set: distribution must be scalar");
  if (const auto* d = dist.get_if<DiracDelta>()) {
    const double v = std::get<double>(d->value);
    region.intervals.push_back({v, v});
    region.bin_count = 1;
    return region;
  }
  if (level >= 1.0) {
    // Whole support.
    const auto lo = quantile(dist, 0.0);
    const auto hi = quantile(dist, 1.0);
    if (lo && hi) {
      region.intervals.push_back({*lo, *hi});
    } else {
      const auto xs = empirical_sorted(dist, opts);
      region.intervals.push_back({xs.front(), xs.back()});
    }
    region.bin_count = 1;
    return region;
  }

  // Probability window: the [0.001, 0.999] quantile range, widened when the
  // level needs more than the window holds.
  const double tail = std::min(0.001, 0.25 * (1.0 - level));
  std::vector<double> masses(bins);
  double lo = 0.0;
  double hi = 0.0;
  const auto qlo = quantile(dist, tail);
  const auto qhi = quantile(dist, 1.0 - tail);
  const bool closed = qlo && qhi && cdf(dist, 0.0).has_value() && std::isfinite(*qlo) && std::isfinite(*qhi);
  std::vector<double> xs;
  if (closed) {
    lo = *qlo;
    hi = *qhi;
  } else {
    xs = empirical_sorted(dist, opts);
    lo = sorted_quantile(xs, tail);
    hi = sorted_quantile(xs, 1.0 - tail);
  }
  if (!(hi > lo)) {
    region.intervals.push_back({lo, hi});
    region.bin_count = 1;
    return region;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  auto edge = [&](std::size_t i) { return i == bins ? hi : lo + width * static_cast<double>(i); };
  if (closed) {
    double prev = *cdf(dist, lo);
    for (std::size_t i = 0; i < bins; ++i) {
      const double next = *cdf(dist, edge(i + 1));
      masses[i] = std::max(0.0, next - prev);
      prev = next;
    }
  } else {
    for (double x : xs) {
      if (x < lo || x > hi) continue;
      const auto idx = std::min(static_cast<std::size_t>((x - lo) / width), bins - 1);
      masses[idx] += 1.0;
    }
    for (double& m : masses) m /= static_cast<double>(xs.size());
  }
  const auto chosen = select_highest_mass(masses, level);
  region.bin_count = chosen.size();
  for (std::size_t idx : chosen) {
    if (!region.intervals.empty() && region.intervals.back().hi == edge(idx)) {
      region.intervals.back().hi = edge(idx + 1);
    } else {
      region.intervals.push_back({edge(idx), edge(idx + 1)});
    }
  }
  return region;
}

double probability_in(const Distribution& dist, const ConfidenceRegion& region, EmpiricalOptions opts) {
  if (!region.labels.empty()) {
    if (const auto* c = dist.get_if<Categorical>()) {
      double mass = 0.0;
      for (std::size_t i = 0; i < c->values.size(); ++i) {
        if (region.contains(c->values[i])) mass += c->probs[i];
      }
      return mass;
    }
  }
  if (!dist.is_scalar()) throw Error("probability_in: distribution must be scalar");
  if (const auto* d = dist.get_if<DiracDelta>()) return region.contains(std::get<double>(d->value)) ? 1.0 : 0.0;
  if (region.labels.empty() && !dist.get_if<Categorical>() && cdf(dist, 0.0)) {
    double mass = 0.0;
    for (const auto& iv : region.intervals) {
      // Closed intervals: for continuous distributions the endpoints carry no mass.
      mass += *cdf(dist, iv.hi) - *cdf(dist, std::nextafter(iv.lo, -INFINITY));
    }
    return std::clamp(mass, 0.0, 1.0);
  }
  if (const auto* c = dist.get_if<Categorical>()) {
    double mass = 0.0;
    for (std::size_t i = 0; i < c->values.size(); ++i) {
      if (region.contains(c->values[i])) mass += c->probs[i];
    }
    return mass;
  }
  std::size_t inside = 0;
  for (std::size_t i = 0; i < opts.samples; ++i) {
    DrawRng rng(opts.seed, streams::kAuxiliary, i);
    if (region.contains(dist.draw_scalar(rng))) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(opts.samples);
}

}  // namespace bvm
