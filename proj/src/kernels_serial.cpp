#include "kernels_common.hpp"

#include <omp.h>

namespace simsel::kernels {

void set_workers(int workers)
{
  omp_set_num_threads(workers > 0 ? workers : omp_get_num_procs());
}

int workers()
{
  return omp_get_max_threads();
}

namespace serial {

void log_joint(const MixtureTerms& terms, std::span<const double> x, std::span<double> out)
{
  std::vector<double> scratch(terms.dim);
  for (std::size_t j = 0; j < terms.k; ++j)
    out[j] = detail::component_log_density(terms, j, x.data(), scratch.data());
}

void estep(const MixtureTerms& terms, std::span<const double> samples, std::span<double> resp,
           std::span<double> loglik)
{
  const std::size_t k = terms.k;
  const std::size_t dim = terms.dim;
  const std::size_t n = samples.size() / dim;
  std::vector<double> scratch(dim);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = resp.data() + i * k;
    const double ll = detail::mixture_log_pdf(terms, samples.data() + i * dim, row, scratch.data());
    loglik[i] = ll;
    for (std::size_t j = 0; j < k; ++j)
      row[j] = std::exp(row[j] - ll);
  }
}

void log_pdf_batch(const MixtureTerms& terms, std::span<const double> samples,
                   std::span<double> out)
{
  const std::size_t dim = terms.dim;
  const std::size_t n = samples.size() / dim;
  std::vector<double> joint(terms.k), scratch(dim);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = detail::mixture_log_pdf(terms, samples.data() + i * dim, joint.data(), scratch.data());
}

double max_log_pdf(const MixtureTerms& terms, std::span<const float> cells)
{
  const std::size_t dim = terms.dim;
  const std::size_t n = cells.size() / dim;
  std::vector<double> joint(terms.k), scratch(dim);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    best = std::max(best, detail::mixture_log_pdf(terms, cells.data() + i * dim, joint.data(),
                                                  scratch.data()));
  return best;
}

Moments moments(CovarianceType type, std::span<const double> resp, std::span<const double> samples,
                std::size_t k, std::size_t dim)
{
  const detail::MomentBlocks p(samples.size() / dim, k, dim, type == CovarianceType::Full);
  Moments m;
  std::vector<double> part(p.count * p.first, 0.0);
  for (std::size_t b = 0; b < p.count; ++b)
    detail::first_moments_block(p, b, resp.data(), samples.data(), part.data() + b * p.first);
  detail::finish_first_moments(p, detail::sum_blocks(part, p.count, p.first), m);

  part.assign(p.count * p.second, 0.0);
  for (std::size_t b = 0; b < p.count; ++b)
    detail::second_moments_block(p, b, resp.data(), samples.data(), m.means.data(),
                                 part.data() + b * p.second);
  detail::finish_second_moments(p, detail::sum_blocks(part, p.count, p.second), m);
  return m;
}

} // namespace serial
} // namespace simsel::kernels
