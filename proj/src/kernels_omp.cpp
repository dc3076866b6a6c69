#include "kernels_common.hpp"

#include <algorithm>
#include <omp.h>

namespace simsel::kernels::omp {

namespace {

// Below this many rows the fork/join overhead dominates.
constexpr std::ptrdiff_t kParallelRows = 64;

} // namespace

void estep(const MixtureTerms& terms, std::span<const double> samples, std::span<double> resp,
           std::span<double> loglik)
{
  const std::size_t k = terms.k;
  const std::size_t dim = terms.dim;
  const auto n = static_cast<std::ptrdiff_t>(samples.size() / dim);
#pragma omp parallel if (n >= kParallelRows)
  {
    std::vector<double> scratch(dim);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      double* row = resp.data() + i * k;
      const double ll =
        detail::mixture_log_pdf(terms, samples.data() + i * dim, row, scratch.data());
      loglik[i] = ll;
      for (std::size_t j = 0; j < k; ++j)
        row[j] = std::exp(row[j] - ll);
    }
  }
}

void log_pdf_batch(const MixtureTerms& terms, std::span<const double> samples,
                   std::span<double> out)
{
  const std::size_t dim = terms.dim;
  const auto n = static_cast<std::ptrdiff_t>(samples.size() / dim);
#pragma omp parallel if (n >= kParallelRows)
  {
    std::vector<double> joint(terms.k), scratch(dim);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
      out[i] =
        detail::mixture_log_pdf(terms, samples.data() + i * dim, joint.data(), scratch.data());
  }
}

double max_log_pdf(const MixtureTerms& terms, std::span<const float> cells)
{
  const std::size_t dim = terms.dim;
  const auto n = static_cast<std::ptrdiff_t>(cells.size() / dim);
  double best = -std::numeric_limits<double>::infinity();
#pragma omp parallel if (n >= kParallelRows) reduction(max : best)
  {
    std::vector<double> joint(terms.k), scratch(dim);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
      best = std::max(best, detail::mixture_log_pdf(terms, cells.data() + i * dim, joint.data(),
                                                    scratch.data()));
  }
  return best;
}

Moments moments(CovarianceType type, std::span<const double> resp, std::span<const double> samples,
                std::size_t k, std::size_t dim)
{
  const detail::MomentBlocks p(samples.size() / dim, k, dim, type == CovarianceType::Full);
  const auto blocks = static_cast<std::ptrdiff_t>(p.count);
  Moments m;
  std::vector<double> part(p.count * p.first, 0.0);
#pragma omp parallel for schedule(static) if (blocks > 1)
  for (std::ptrdiff_t b = 0; b < blocks; ++b)
    detail::first_moments_block(p, std::size_t(b), resp.data(), samples.data(),
                                part.data() + b * p.first);
  detail::finish_first_moments(p, detail::sum_blocks(part, p.count, p.first), m);

  part.assign(p.count * p.second, 0.0);
#pragma omp parallel for schedule(static) if (blocks > 1)
  for (std::ptrdiff_t b = 0; b < blocks; ++b)
    detail::second_moments_block(p, std::size_t(b), resp.data(), samples.data(), m.means.data(),
                                 part.data() + b * p.second);
  detail::finish_second_moments(p, detail::sum_blocks(part, p.count, p.second), m);
  return m;
}

} // namespace simsel::kernels::omp
