#pragma once

#include "simsel/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace simsel::kernels::detail {

template <typename T>
inline double component_log_density(const MixtureTerms& terms, std::size_t j, const T* x,
                                     double* scratch)
{
  const std::size_t dim = terms.dim;
  const double* mu = terms.means.data() + j * dim;
  double maha = 0.0;
  if (terms.type == CovarianceType::Full) {
    // Forward substitution L y = x - mu; maha = |y|^2.
    const double* L = terms.chol.data() + j * dim * dim;
    for (std::size_t a = 0; a < dim; ++a) {
      double v = static_cast<double>(x[a]) - mu[a];
      const double* row = L + a * dim;
      for (std::size_t b = 0; b < a; ++b)
        v -= row[b] * scratch[b];
      scratch[a] = v / row[a];
      maha += scratch[a] * scratch[a];
    }
  } else {
    const double* prec = terms.precision.data() + j * dim;
    for (std::size_t a = 0; a < dim; ++a) {
      const double d = static_cast<double>(x[a]) - mu[a];
      maha += d * d * prec[a];
    }
  }
  return terms.log_coef[j] - 0.5 * maha;
}

inline double log_sum_exp(const double* v, std::size_t n)
{
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j)
    hi = std::max(hi, v[j]);
  if (!std::isfinite(hi))
    return hi;
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    sum += std::exp(v[j] - hi);
  return hi + std::log(sum);
}

template <typename T>
inline double mixture_log_pdf(const MixtureTerms& terms, const T* x, double* joint,
                              double* scratch)
{
  for (std::size_t j = 0; j < terms.k; ++j)
    joint[j] = component_log_density(terms, j, x, scratch);
  return log_sum_exp(joint, terms.k);
}

// M-step statistics are summed over fixed blocks of samples and the block
// partials are then added in block order. The blocking depends only on the
// problem shape, so serial and threaded kernels produce identical bits.
struct MomentBlocks
{
  std::size_t n, k, dim;
  bool full;
  std::size_t count; // number of sample blocks
  std::size_t first; // mass + means per block
  std::size_t second;

  MomentBlocks(std::size_t n_, std::size_t k_, std::size_t dim_, bool full_)
    : n(n_), k(k_), dim(dim_), full(full_)
  {
    first = k * (1 + dim);
    second = full ? k * dim * dim : k * dim;
    constexpr std::size_t kMaxBlocks = 64, kMinRows = 256, kScratch = std::size_t{1} << 22;
    count = std::min({kMaxBlocks, std::max<std::size_t>(1, n / kMinRows),
                      std::max<std::size_t>(1, kScratch / second)});
  }

  std::size_t begin(std::size_t b) const { return n * b / count; }
  std::size_t end(std::size_t b) const { return n * (b + 1) / count; }
};

// Block b's mass (k) followed by its weighted sums (k x dim).
inline void first_moments_block(const MomentBlocks& p, std::size_t b, const double* resp,
                                const double* samples, double* out)
{
  double* mass = out;
  double* sums = out + p.k;
  for (std::size_t i = p.begin(b); i < p.end(b); ++i) {
    const double* x = samples + i * p.dim;
    for (std::size_t j = 0; j < p.k; ++j) {
      const double r = resp[i * p.k + j];
      mass[j] += r;
      double* s = sums + j * p.dim;
      for (std::size_t a = 0; a < p.dim; ++a)
        s[a] += r * x[a];
    }
  }
}

// Block b's weighted scatter about `means`; lower triangle only for Full.
inline void second_moments_block(const MomentBlocks& p, std::size_t b, const double* resp,
                                 const double* samples, const double* means, double* out)
{
  for (std::size_t i = p.begin(b); i < p.end(b); ++i) {
    const double* x = samples + i * p.dim;
    for (std::size_t j = 0; j < p.k; ++j) {
      const double r = resp[i * p.k + j];
      const double* mu = means + j * p.dim;
      if (p.full) {
        double* S = out + j * p.dim * p.dim;
        for (std::size_t a = 0; a < p.dim; ++a) {
          const double da = r * (x[a] - mu[a]);
          for (std::size_t c = 0; c <= a; ++c)
            S[a * p.dim + c] += da * (x[c] - mu[c]);
        }
      } else {
        double* S = out + j * p.dim;
        for (std::size_t a = 0; a < p.dim; ++a) {
          const double d = x[a] - mu[a];
          S[a] += r * d * d;
        }
      }
    }
  }
}

// Adds block partials (block-major, `stride` values each) in block order.
inline std::vector<double> sum_blocks(const std::vector<double>& partials, std::size_t blocks,
                                      std::size_t stride)
{
  std::vector<double> total(partials.begin(), partials.begin() + stride);
  for (std::size_t b = 1; b < blocks; ++b)
    for (std::size_t v = 0; v < stride; ++v)
      total[v] += partials[b * stride + v];
  return total;
}

inline void finish_first_moments(const MomentBlocks& p, const std::vector<double>& total,
                                 Moments& m)
{
  m.mass.assign(total.begin(), total.begin() + p.k);
  m.means.assign(total.begin() + p.k, total.end());
  for (std::size_t j = 0; j < p.k; ++j)
    for (std::size_t a = 0; a < p.dim; ++a)
      m.means[j * p.dim + a] = m.mass[j] > 0.0 ? m.means[j * p.dim + a] / m.mass[j] : 0.0;
}

inline void finish_second_moments(const MomentBlocks& p, std::vector<double> total, Moments& m)
{
  for (std::size_t j = 0; j < p.k; ++j) {
    const double inv = m.mass[j] > 0.0 ? 1.0 / m.mass[j] : 0.0;
    if (p.full) {
      double* S = total.data() + j * p.dim * p.dim;
      for (std::size_t a = 0; a < p.dim; ++a)
        for (std::size_t c = 0; c <= a; ++c) {
          S[a * p.dim + c] *= inv;
          S[c * p.dim + a] = S[a * p.dim + c];
        }
    } else {
      for (std::size_t a = 0; a < p.dim; ++a)
        total[j * p.dim + a] *= inv;
    }
  }
  m.spread = std::move(total);
}

} // namespace simsel::kernels::detail
