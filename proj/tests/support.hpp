#pragma once

// Test-only helpers: temporary directories and oracles that are written
// independently of the library's computation paths.

#include "simsel/gmm.hpp"
#include "simsel/rank.hpp"
#include "simsel/rng.hpp"
#include "simsel/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

namespace simsel::test {

class TempDir
{
public:
  TempDir()
  {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("simsel_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& name) const { return (path_ / name).string(); }

private:
  std::filesystem::path path_;
};

// Determinant and inverse by Gauss-Jordan elimination with partial pivoting.
inline double invert(std::vector<double> a, std::size_t n, std::vector<double>& inv)
{
  inv.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    inv[i * n + i] = 1.0;
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[p * n + c]))
        p = r;
    if (p != c) {
      for (std::size_t k = 0; k < n; ++k) {
        std::swap(a[p * n + k], a[c * n + k]);
        std::swap(inv[p * n + k], inv[c * n + k]);
      }
      det = -det;
    }
    const double piv = a[c * n + c];
    det *= piv;
    for (std::size_t k = 0; k < n; ++k) {
      a[c * n + k] /= piv;
      inv[c * n + k] /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c)
        continue;
      const double f = a[r * n + c];
      for (std::size_t k = 0; k < n; ++k) {
        a[r * n + k] -= f * a[c * n + k];
        inv[r * n + k] -= f * inv[c * n + k];
      }
    }
  }
  return det;
}

// Mixture density evaluated directly as a sum of exponentials.
inline double brute_force_pdf(const GmmModel& m, const std::vector<double>& x)
{
  const std::size_t d = m.dim;
  double total = 0.0;
  for (std::size_t j = 0; j < m.k; ++j) {
    std::vector<double> cov(d * d, 0.0);
    for (std::size_t a = 0; a < d; ++a) {
      if (m.covariance_type == CovarianceType::Spherical)
        cov[a * d + a] = m.covariances[j];
      else if (m.covariance_type == CovarianceType::Diagonal)
        cov[a * d + a] = m.covariances[j * d + a];
      else
        for (std::size_t b = 0; b < d; ++b)
          cov[a * d + b] = m.covariances[(j * d + a) * d + b];
    }
    std::vector<double> inv;
    const double det = invert(cov, d, inv);
    double q = 0.0;
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b)
        q += (x[a] - m.means[j * d + a]) * inv[a * d + b] * (x[b] - m.means[j * d + b]);
    total += m.weights[j] * std::exp(-0.5 * q) /
             std::sqrt(std::pow(2.0 * std::numbers::pi, double(d)) * det);
  }
  return total;
}

// Alternate-with-skip merge, written as a plain two-queue loop.
inline std::vector<std::string> reference_interleave(const std::vector<std::string>& a,
                                                     const std::vector<std::string>& b,
                                                     std::size_t k)
{
  std::vector<std::string> out;
  std::set<std::string> chosen;
  std::size_t ia = 0, ib = 0;
  bool from_a = true;
  while (out.size() < k && (ia < a.size() || ib < b.size())) {
    const std::vector<std::string>& src = from_a ? a : b;
    std::size_t& idx = from_a ? ia : ib;
    while (idx < src.size() && chosen.count(src[idx]))
      ++idx;
    if (idx < src.size()) {
      chosen.insert(src[idx]);
      out.push_back(src[idx]);
      ++idx;
    }
    from_a = !from_a;
    // drop trailing duplicates so the loop condition sees true exhaustion
    while (ia < a.size() && chosen.count(a[ia]))
      ++ia;
    while (ib < b.size() && chosen.count(b[ib]))
      ++ib;
  }
  return out;
}

// Fraction of (positive, negative) pairs ranked correctly; ties count half.
inline double auc(const std::vector<double>& positives, const std::vector<double>& negatives)
{
  double wins = 0.0;
  for (double p : positives)
    for (double n : negatives)
      wins += p > n ? 1.0 : p == n ? 0.5 : 0.0;
  return wins / (double(positives.size()) * double(negatives.size()));
}

// For each true mean, the fitted component with the nearest mean.
inline std::vector<std::size_t> match_components(const GmmModel& fitted,
                                                 const std::vector<double>& true_means,
                                                 std::size_t k)
{
  const std::size_t d = fitted.dim;
  std::vector<std::size_t> match(k);
  for (std::size_t t = 0; t < k; ++t) {
    double best = INFINITY;
    for (std::size_t j = 0; j < fitted.k; ++j) {
      double dist = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        const double diff = fitted.means[j * d + a] - true_means[t * d + a];
        dist += diff * diff;
      }
      if (dist < best) {
        best = dist;
        match[t] = j;
      }
    }
  }
  return match;
}

// Diagonal-covariance spec with unit variances and the given means.
inline SynthSpec make_spec(std::size_t dim, std::vector<double> means, std::vector<double> weights,
                           std::uint64_t seed)
{
  SynthSpec s;
  s.dim = dim;
  s.true_k = weights.size();
  s.covariance_type = CovarianceType::Diagonal;
  s.weights = std::move(weights);
  s.means = std::move(means);
  s.covariances.assign(s.true_k * dim, 1.0);
  s.seed = seed;
  return s;
}

// k means placed on a scaled simplex-like lattice so every pair is at least
// `separation` apart.
inline std::vector<double> separated_means(std::size_t k, std::size_t dim, double separation,
                                           Rng& rng)
{
  std::vector<double> means;
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t a = 0; a < dim; ++a) {
      double v = 0.0;
      if (dim == 1)
        v = separation * double(j);
      else if (a == j % dim)
        v = separation * double(1 + j / dim);
      v += 0.1 * (uniform01(rng) - 0.5);
      means.push_back(v);
    }
  }
  return means;
}

} // namespace simsel::test
