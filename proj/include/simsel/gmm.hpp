#pragma once

#include "simsel/kernels.hpp"
#include "simsel/repr.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace simsel {

const char* to_string(CovarianceType type);
CovarianceType parse_covariance_type(const std::string& text);

struct FitMeta
{
  int iterations = 0;
  double final_mean_log_likelihood = 0.0;
  bool converged = false;
  std::uint64_t seed = 0;
  double tol_nats = 0.0;
  int max_iters = 0;
  int n_init = 1;
  double reg_covar = 0.0;
  // Lower bound every variance (or covariance eigenvalue) satisfies. Equals
  // reg_covar unless the model was mapped back from standardized space.
  double variance_floor = 0.0;
  std::size_t sample_count = 0;
  std::string provenance;
  bool standardized = false;
  int best_init = 0;
  // Iterations at which a collapsed component was re-seeded.
  std::vector<int> reinit_iterations;
  // Mean per-sample log-likelihood after the initial E-step and after every
  // subsequent iteration.
  std::vector<double> trace;
};

/// Fitted mixture parameters. Covariances are stored flat: Spherical k,
/// Diagonal k x dim, Full k x dim x dim (row-major, symmetric).
struct GmmModel
{
  std::size_t k = 0;
  std::size_t dim = 0;
  CovarianceType covariance_type = CovarianceType::Diagonal;
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> covariances;
  FitMeta fit_meta;

  std::span<const double> mean(std::size_t j) const { return {means.data() + j * dim, dim}; }

  // Checks shapes, weight normalization and the variance floor.
  void validate() const;
};

struct FitConfig
{
  std::size_t k = 5;
  CovarianceType covariance_type = CovarianceType::Diagonal;
  double tol_nats = 0.001;
  int max_iters = 500;
  int n_init = 1;
  double reg_covar = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
};

MixtureTerms precompute(const GmmModel& model);

GmmModel fit(const SampleSet& samples, const FitConfig& config);

double log_pdf(const GmmModel& model, std::span<const double> x);

// Sum of log_pdf over all samples.
double total_log_likelihood(const GmmModel& model, const SampleSet& samples);

std::size_t free_parameter_count(const GmmModel& model);

// p ln(n) - 2 L
double bic(const GmmModel& model, const SampleSet& samples);

struct SweepEntry
{
  std::size_t k = 0;
  GmmModel model;
  double bic = 0.0;
};

std::vector<SweepEntry> sweep_components(const SampleSet& samples, std::span<const std::size_t> ks,
                                         const FitConfig& config);

// Rewrites a model fitted on standardized samples into original coordinates.
GmmModel unstandardize(const GmmModel& model, const Standardizer& standardizer);

std::string to_json(const GmmModel& model);
GmmModel model_from_json(const std::string& text);
void write_model(const std::string& path, const GmmModel& model);
GmmModel read_model(const std::string& path);

} // namespace simsel
