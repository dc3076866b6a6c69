#pragma once

// Data-parallel inner loops of the mixture model. Every kernel exists twice:
// `serial::` is the plain reference used by the tests, `omp::` is the OpenMP
// version used in production. Both write each output element from exactly one
// fixed-order loop, so results do not depend on the thread count.

#include <cstddef>
#include <span>
#include <vector>

namespace simsel {

enum class CovarianceType
{
  Spherical,
  Diagonal,
  Full
};

/// Per-component quantities precomputed from a mixture so that a component
/// log-density is a dot product (or a triangular solve for Full).
struct MixtureTerms
{
  CovarianceType type = CovarianceType::Diagonal;
  std::size_t k = 0;
  std::size_t dim = 0;
  // log(pi_j) - 0.5 * (dim * log(2 pi) + log det Sigma_j)
  std::vector<double> log_coef;
  std::vector<double> means;     // k x dim
  std::vector<double> precision; // k x dim, Spherical/Diagonal only
  std::vector<double> chol;      // k x dim x dim lower factor, Full only
};

/// Sufficient statistics of one M-step. `spread` is k x dim (weighted
/// per-dimension variance) for Spherical/Diagonal and k x dim x dim for Full.
struct Moments
{
  std::vector<double> mass; // k
  std::vector<double> means;
  std::vector<double> spread;
};

namespace kernels {

// Number of OpenMP threads used by the omp:: kernels; 0 restores the default.
void set_workers(int workers);
int workers();

namespace serial {

// log(pi_j) + log N(x; mu_j, Sigma_j) for all j, written to `out` (size k).
void log_joint(const MixtureTerms& terms, std::span<const double> x, std::span<double> out);

// Responsibilities (n x k) and per-sample log-likelihood (n).
void estep(const MixtureTerms& terms, std::span<const double> samples,
           std::span<double> resp, std::span<double> loglik);

void log_pdf_batch(const MixtureTerms& terms, std::span<const double> samples,
                   std::span<double> out);

double max_log_pdf(const MixtureTerms& terms, std::span<const float> cells);

Moments moments(CovarianceType type, std::span<const double> resp,
                std::span<const double> samples, std::size_t k, std::size_t dim);

} // namespace serial

namespace omp {

void estep(const MixtureTerms& terms, std::span<const double> samples,
           std::span<double> resp, std::span<double> loglik);

void log_pdf_batch(const MixtureTerms& terms, std::span<const double> samples,
                   std::span<double> out);

double max_log_pdf(const MixtureTerms& terms, std::span<const float> cells);

Moments moments(CovarianceType type, std::span<const double> resp,
                std::span<const double> samples, std::size_t k, std::size_t dim);

} // namespace omp

} // namespace kernels
} // namespace simsel
