#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bvm/agreement.hpp"
#include "bvm/comparison.hpp"
#include "bvm/distributions.hpp"
#include "bvm/engine.hpp"

namespace bvm {

/// Sample mean, sample standard deviation and size of a measured data set.
struct DataSummary {
  double mean = 0.0;
  double std = 1.0;
  std::size_t n = 2;

  /// Student-t for the population mean: location mean, dof n - 1, scale std / sqrt(n).
  Distribution mean_distribution() const;
};

struct GaussianLikelihoodSpec {
  double sigma = 1.0;
  Path data;
  InputGrid grid;
};

/// P(|zhat - z| <= eps) for scalar model and data means. Closed form when
/// both sides are Normal/Dirac, or when one side is Dirac and the other has
/// a CDF; Monte Carlo otherwise.
BvmEstimate reliability(const Distribution& model_mean, const Distribution& data_mean, double epsilon,
                        std::size_t samples, RngSeed seed, EngineOptions opts = {});

/// Conjunction of per-point thresholds |yhat_i - y_i| <= eps_i over paths.
BvmEstimate improved_reliability(const Distribution& model_path, const Distribution& data_path,
                                 std::span<const double> tolerances, std::size_t samples, RngSeed seed,
                                 EngineOptions opts = {});

/// Certain model mean against the Student-t distribution of the data mean,
/// integrated over the rule's acceptance region by adaptive quadrature. The
/// rule sees zhat = model mean and z = population mean.
BvmEstimate frequentist(double model_mean, const DataSummary& data, const AgreementRule& rule);

struct BootstrapOptions {
  std::size_t resamples = 1000;
  RngSeed seed = 0;
};

/// Indicator of the rule on the model and data ECDFs (rule normally a
/// Threshold on area_metric). With `bootstrap`, the data samples are
/// resampled with replacement and the indicator averaged.
BvmEstimate area_metric_validation(std::span<const double> model_samples, std::span<const double> data_samples,
                                   const AgreementRule& rule, std::optional<BootstrapOptions> bootstrap = {});

/// Data bin probabilities ~ Dirichlet(counts + 1); averages the rule (normally
/// a Threshold on binned_prob_diff) between the model pdf and each draw.
BvmEstimate binned_pdf_metric(const BinnedPdf& model_pdf, std::span<const double> data_counts,
                              const AgreementRule& rule, std::size_t draws, RngSeed seed);

/// Draws one probability vector from Dirichlet(alpha).
std::vector<double> dirichlet_draw(std::span<const double> alpha, DrawRng& rng);

/// Indicator of the rule on the divergence between certain pdfs.
BvmEstimate divergence_validation(const BinnedPdf& model_pdf, const BinnedPdf& data_pdf, const AgreementRule& rule);

/// Uncertain-pdf mode: averages the indicator over `draws` sampled pdf pairs.
using PdfSampler = std::function<BinnedPdf(DrawRng&)>;
BvmEstimate divergence_validation(const PdfSampler& model_pdf, const PdfSampler& data_pdf, const AgreementRule& rule,
                                  std::size_t draws, RngSeed seed);

struct HypothesisTestResult {
  BvmEstimate estimate;
  ConfidenceRegion acceptance;  // [-c_alpha, c_alpha] of the data distribution
};

/// Classical test under the null hypothesis M = D: always 1 - alpha.
HypothesisTestResult classical_hypothesis(const Distribution& data, double alpha);

enum class RegionKind { interval, set };

struct StatisticalPowerResult {
  BvmEstimate estimate;     // (1 - beta_M) (1 - beta_D)
  double model_power = 0.0;  // 1 - beta_M: model mass inside the data region
  double data_power = 0.0;   // 1 - beta_D: data mass inside the model region
  double systematic_error = 0.0;  // alpha + alpha_hat - alpha alpha_hat
  ConfidenceRegion data_region;
  ConfidenceRegion model_region;
};

StatisticalPowerResult statistical_power_bvm(const Distribution& model, const Distribution& data, double alpha,
                                             double alpha_hat, RegionKind kind, EmpiricalOptions opts = {});

struct EvidenceEstimate {
  double log_evidence = 0.0;
  double log_std_error = 0.0;  // delta method: se(mean L) / mean L
  std::size_t samples = 0;
  RngSeed seed = 0;
};

/// Gaussian log-likelihood with the full normalizer (2 pi sigma^2)^(N/2).
double gaussian_log_likelihood(std::span<const double> yhat, const GaussianLikelihoodSpec& lik);

/// log p(Y | M) by Monte Carlo over the parameter prior.
EvidenceEstimate bayesian_evidence(const ModelFunction& model, const Distribution& prior,
                                   const GaussianLikelihoodSpec& lik, std::size_t samples, RngSeed seed,
                                   EngineOptions opts = {});

struct BayesFactor {
  RatioStatus status = RatioStatus::ok;
  double log_value = 0.0;
  double value = 0.0;
};

/// Ratio of evidences given as logs (-infinity for a zero evidence).
BayesFactor bayes_factor(double log_evidence, double log_evidence_alt);

}  // namespace bvm
