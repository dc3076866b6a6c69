#include "simsel/gmm.hpp"

#include "kernels_common.hpp"
#include "simsel/error.hpp"
#include "simsel/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace simsel {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112; // ln(2 pi)

// Components whose total responsibility falls below this many samples are
// treated as collapsed and re-seeded.
constexpr double kCollapsedMass = 1e-8;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::size_t covariance_stride(CovarianceType type, std::size_t dim)
{
  switch (type) {
    case CovarianceType::Spherical: return 1;
    case CovarianceType::Diagonal: return dim;
    case CovarianceType::Full: return dim * dim;
  }
  return dim;
}

} // namespace

const char* to_string(CovarianceType type)
{
  switch (type) {
    case CovarianceType::Spherical: return "spherical";
    case CovarianceType::Diagonal: return "diagonal";
    case CovarianceType::Full: return "full";
  }
  return "diagonal";
}

CovarianceType parse_covariance_type(const std::string& text)
{
  if (text == "spherical")
    return CovarianceType::Spherical;
  if (text == "diagonal" || text == "diag")
    return CovarianceType::Diagonal;
  if (text == "full")
    return CovarianceType::Full;
  fail(ErrorKind::Validation, "unknown covariance type '" + text + "'");
}

void FitConfig::validate() const
{
  if (k < 1)
    fail(ErrorKind::Argument, "component count must be positive");
  if (!(tol_nats > 0.0) || !std::isfinite(tol_nats))
    fail(ErrorKind::Argument, "tolerance must be a positive number of nats");
  if (max_iters < 1)
    fail(ErrorKind::Argument, "max_iters must be at least 1");
  if (n_init < 1)
    fail(ErrorKind::Argument, "n_init must be at least 1");
  if (!(reg_covar > 0.0) || !std::isfinite(reg_covar))
    fail(ErrorKind::Argument, "reg_covar must be positive");
}

void GmmModel::validate() const
{
  if (k < 1 || dim < 1)
    fail(ErrorKind::Validation, "model must have k >= 1 and dim >= 1");
  if (weights.size() != k || means.size() != k * dim ||
      covariances.size() != k * covariance_stride(covariance_type, dim))
    fail(ErrorKind::Validation, "model parameter arrays have inconsistent shapes");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w))
      fail(ErrorKind::Validation, "mixture weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    fail(ErrorKind::Validation, "mixture weights do not sum to 1");
  for (double m : means) {
    if (!std::isfinite(m))
      fail(ErrorKind::Validation, "model means must be finite");
  }
  const double floor = fit_meta.variance_floor;
  if (covariance_type != CovarianceType::Full) {
    for (double v : covariances) {
      if (!std::isfinite(v) || !(v > 0.0) || v < floor)
        fail(ErrorKind::Validation, "variance below the floor");
    }
    return;
  }
  for (std::size_t j = 0; j < k; ++j) {
    Eigen::Map<const RowMatrix> cov(covariances.data() + j * dim * dim, dim, dim);
    if (!cov.allFinite())
      fail(ErrorKind::Validation, "covariance has non-finite entries");
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < a; ++b)
        if (cov(a, b) != cov(b, a))
          fail(ErrorKind::Validation, "covariance matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<RowMatrix> eig(cov, Eigen::EigenvaluesOnly);
    const double min_eig = eig.eigenvalues().minCoeff();
    const double slack = 1e-12 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (!(min_eig > 0.0) || min_eig < floor - slack)
      fail(ErrorKind::Validation, "covariance eigenvalue below the floor");
  }
}

MixtureTerms precompute(const GmmModel& model)
{
  const std::size_t k = model.k;
  const std::size_t dim = model.dim;
  MixtureTerms t;
  t.type = model.covariance_type;
  t.k = k;
  t.dim = dim;
  t.means = model.means;
  t.log_coef.resize(k);
  if (t.type == CovarianceType::Full) {
    t.chol.assign(k * dim * dim, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      Eigen::Map<const RowMatrix> cov(model.covariances.data() + j * dim * dim, dim, dim);
      Eigen::LLT<RowMatrix> llt(cov);
      if (llt.info() != Eigen::Success)
        fail(ErrorKind::Numerical,
             "covariance of component " + std::to_string(j) + " is not positive definite");
      Eigen::Map<RowMatrix> L(t.chol.data() + j * dim * dim, dim, dim);
      L = llt.matrixL();
      double logdet = 0.0;
      for (std::size_t a = 0; a < dim; ++a)
        logdet += 2.0 * std::log(L(a, a));
      t.log_coef[j] = std::log(model.weights[j]) - 0.5 * (dim * kLog2Pi + logdet);
    }
    return t;
  }
  t.precision.resize(k * dim);
  for (std::size_t j = 0; j < k; ++j) {
    double logdet = 0.0;
    for (std::size_t a = 0; a < dim; ++a) {
      const double var = model.covariance_type == CovarianceType::Spherical
                           ? model.covariances[j]
                           : model.covariances[j * dim + a];
      t.precision[j * dim + a] = 1.0 / var;
      logdet += std::log(var);
    }
    t.log_coef[j] = std::log(model.weights[j]) - 0.5 * (dim * kLog2Pi + logdet);
  }
  return t;
}

namespace {

struct GlobalMoments
{
  std::vector<double> mean;
  std::vector<double> spread; // dim (variance) or dim x dim (covariance)
};

GlobalMoments global_moments(const SampleSet& samples, bool full)
{
  const std::size_t n = samples.count();
  const std::size_t dim = samples.dim;
  const std::vector<double> ones(n, 1.0);
  const Moments m = kernels::omp::moments(full ? CovarianceType::Full : CovarianceType::Diagonal,
                                          ones, samples.values, 1, dim);
  return {m.means, m.spread};
}

// Initial covariance for one component, derived from the global spread.
std::vector<double> initial_covariance(const GlobalMoments& g, CovarianceType type, double reg)
{
  const std::size_t dim = g.mean.size();
  switch (type) {
    case CovarianceType::Spherical: {
      const double avg = std::accumulate(g.spread.begin(), g.spread.end(), 0.0) / dim;
      return {std::max(avg, reg)};
    }
    case CovarianceType::Diagonal: {
      std::vector<double> v(dim);
      for (std::size_t a = 0; a < dim; ++a)
        v[a] = std::max(g.spread[a], reg);
      return v;
    }
    case CovarianceType::Full: {
      std::vector<double> v = g.spread;
      for (std::size_t a = 0; a < dim; ++a)
        v[a * dim + a] += reg;
      return v;
    }
  }
  return {};
}

// k-means++ style seeding: first center uniform, the rest drawn with
// probability proportional to squared distance to the nearest chosen center.
std::vector<double> seed_means(const SampleSet& samples, std::size_t k, Rng& rng)
{
  const std::size_t n = samples.count();
  const std::size_t dim = samples.dim;
  std::vector<double> centers;
  centers.reserve(k * dim);
  auto take = [&](std::size_t i) {
    const auto s = samples.sample(i);
    centers.insert(centers.end(), s.begin(), s.end());
  };
  take(uniform_index(rng, n));
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < k; ++c) {
    const double* last = centers.data() + (c - 1) * dim;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* x = samples.values.data() + i * dim;
      double dist = 0.0;
      for (std::size_t a = 0; a < dim; ++a)
        dist += (x[a] - last[a]) * (x[a] - last[a]);
      d2[i] = std::min(d2[i], dist);
      total += d2[i];
    }
    if (!(total > 0.0)) {
      take(uniform_index(rng, n));
      continue;
    }
    const double target = uniform01(rng) * total;
    double run = 0.0;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      run += d2[i];
      if (run > target) {
        pick = i;
        break;
      }
    }
    take(pick);
  }
  return centers;
}

double mean_of(const std::vector<double>& v)
{
  double s = 0.0;
  for (double x : v)
    s += x;
  return s / static_cast<double>(v.size());
}

GmmModel fit_once(const SampleSet& samples, const FitConfig& config, std::uint64_t seed,
                  const GlobalMoments& global)
{
  const std::size_t n = samples.count();
  const std::size_t dim = samples.dim;
  const std::size_t k = config.k;
  const CovarianceType type = config.covariance_type;
  const std::size_t stride = covariance_stride(type, dim);
  Rng rng(seed);

  const std::vector<double> init_cov = initial_covariance(global, type, config.reg_covar);
  GmmModel model;
  model.k = k;
  model.dim = dim;
  model.covariance_type = type;
  model.weights.assign(k, 1.0 / static_cast<double>(k));
  model.means = seed_means(samples, k, rng);
  model.covariances.reserve(k * stride);
  for (std::size_t j = 0; j < k; ++j)
    model.covariances.insert(model.covariances.end(), init_cov.begin(), init_cov.end());

  FitMeta& meta = model.fit_meta;
  std::vector<double> resp(n * k);
  std::vector<double> loglik(n);

  auto expectation = [&](int iteration) {
    MixtureTerms terms;
    try {
      terms = precompute(model);
    } catch (const Error& e) {
      fail(ErrorKind::Numerical, std::string(e.what()) + " at iteration " + std::to_string(iteration));
    }
    kernels::omp::estep(terms, samples.values, resp, loglik);
    const double ll = mean_of(loglik);
    if (!std::isfinite(ll))
      fail(ErrorKind::Numerical, "non-finite log-likelihood at iteration " + std::to_string(iteration));
    return ll;
  };

  double previous = expectation(0);
  meta.trace.push_back(previous);
  for (int it = 1; it <= config.max_iters; ++it) {
    const Moments m = kernels::omp::moments(type, resp, samples.values, k, dim);

    std::vector<std::size_t> collapsed;
    for (std::size_t j = 0; j < k; ++j) {
      if (!(m.mass[j] >= kCollapsedMass))
        collapsed.push_back(j);
    }
    std::vector<double> mass = m.mass;
    model.means = m.means;
    for (std::size_t j = 0; j < k; ++j) {
      double* cov = model.covariances.data() + j * stride;
      const double* spread = m.spread.data() + j * (type == CovarianceType::Full ? dim * dim : dim);
      switch (type) {
        case CovarianceType::Spherical: {
          double avg = 0.0;
          for (std::size_t a = 0; a < dim; ++a)
            avg += spread[a];
          cov[0] = std::max(avg / dim, config.reg_covar);
          break;
        }
        case CovarianceType::Diagonal:
          for (std::size_t a = 0; a < dim; ++a)
            cov[a] = std::max(spread[a], config.reg_covar);
          break;
        case CovarianceType::Full:
          std::copy(spread, spread + dim * dim, cov);
          for (std::size_t a = 0; a < dim; ++a)
            cov[a * dim + a] += config.reg_covar;
          break;
      }
    }
    if (!collapsed.empty()) {
      // Re-seed at the samples the current model explains worst.
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::partial_sort(order.begin(), order.begin() + std::min(n, collapsed.size()), order.end(),
                        [&](std::size_t a, std::size_t b) {
                          return loglik[a] < loglik[b] || (loglik[a] == loglik[b] && a < b);
                        });
      for (std::size_t c = 0; c < collapsed.size(); ++c) {
        const std::size_t j = collapsed[c];
        const auto s = samples.sample(order[c % n]);
        std::copy(s.begin(), s.end(), model.means.begin() + j * dim);
        std::copy(init_cov.begin(), init_cov.end(), model.covariances.begin() + j * stride);
        mass[j] = 1.0;
      }
      meta.reinit_iterations.push_back(it);
    }
    const double total_mass = std::accumulate(mass.begin(), mass.end(), 0.0);
    for (std::size_t j = 0; j < k; ++j)
      model.weights[j] = mass[j] / total_mass;

    const double current = expectation(it);
    meta.trace.push_back(current);
    meta.iterations = it;
    // a re-seeded iteration may lower the likelihood; never stop on it
    if (collapsed.empty() && current - previous <= config.tol_nats) {
      meta.converged = true;
      break;
    }
    previous = current;
  }
  meta.final_mean_log_likelihood = meta.trace.back();
  meta.seed = seed;
  return model;
}

} // namespace

GmmModel fit(const SampleSet& samples, const FitConfig& config)
{
  config.validate();
  samples.validate();
  if (samples.count() < config.k)
    fail(ErrorKind::Argument, "fewer samples (" + std::to_string(samples.count()) +
                                ") than components (" + std::to_string(config.k) + ")");

  const GlobalMoments global = global_moments(samples, config.covariance_type == CovarianceType::Full);
  GmmModel best;
  for (int r = 0; r < config.n_init; ++r) {
    GmmModel candidate = fit_once(samples, config, derive_seed(config.seed, r), global);
    candidate.fit_meta.best_init = r;
    if (r == 0 ||
        candidate.fit_meta.final_mean_log_likelihood > best.fit_meta.final_mean_log_likelihood)
      best = std::move(candidate);
  }
  FitMeta& meta = best.fit_meta;
  meta.seed = config.seed;
  meta.tol_nats = config.tol_nats;
  meta.max_iters = config.max_iters;
  meta.n_init = config.n_init;
  meta.reg_covar = config.reg_covar;
  meta.variance_floor = config.reg_covar;
  meta.sample_count = samples.count();
  meta.provenance = to_string(samples.provenance);
  best.validate();
  return best;
}

double log_pdf(const GmmModel& model, std::span<const double> x)
{
  if (x.size() != model.dim)
    fail(ErrorKind::Argument, "vector has dimension " + std::to_string(x.size()) +
                                ", model expects " + std::to_string(model.dim));
  const MixtureTerms terms = precompute(model);
  std::vector<double> joint(model.k), scratch(model.dim);
  return kernels::detail::mixture_log_pdf(terms, x.data(), joint.data(), scratch.data());
}

double total_log_likelihood(const GmmModel& model, const SampleSet& samples)
{
  if (samples.dim != model.dim)
    fail(ErrorKind::Argument, "sample dimension " + std::to_string(samples.dim) +
                                " does not match model dimension " + std::to_string(model.dim));
  const MixtureTerms terms = precompute(model);
  std::vector<double> ll(samples.count());
  kernels::omp::log_pdf_batch(terms, samples.values, ll);
  double total = 0.0;
  for (double v : ll)
    total += v;
  return total;
}

std::size_t free_parameter_count(const GmmModel& model)
{
  const std::size_t k = model.k;
  const std::size_t d = model.dim;
  std::size_t cov = 0;
  switch (model.covariance_type) {
    case CovarianceType::Spherical: cov = k; break;
    case CovarianceType::Diagonal: cov = k * d; break;
    case CovarianceType::Full: cov = k * d * (d + 1) / 2; break;
  }
  return (k - 1) + k * d + cov;
}

double bic(const GmmModel& model, const SampleSet& samples)
{
  const double n = static_cast<double>(samples.count());
  return static_cast<double>(free_parameter_count(model)) * std::log(n) -
         2.0 * total_log_likelihood(model, samples);
}

std::vector<SweepEntry> sweep_components(const SampleSet& samples, std::span<const std::size_t> ks,
                                         const FitConfig& config)
{
  std::vector<SweepEntry> out;
  out.reserve(ks.size());
  for (std::size_t k : ks) {
    FitConfig c = config;
    c.k = k;
    GmmModel model = fit(samples, c);
    const double score = bic(model, samples);
    out.push_back({k, std::move(model), score});
  }
  return out;
}

GmmModel unstandardize(const GmmModel& model, const Standardizer& standardizer)
{
  const std::size_t dim = model.dim;
  if (standardizer.scale.size() != dim)
    fail(ErrorKind::Argument, "standardizer dimension mismatch");
  const auto& s = standardizer.scale;
  GmmModel out = model;
  if (model.covariance_type == CovarianceType::Spherical &&
      std::any_of(s.begin(), s.end(), [&](double v) { return v != s.front(); }))
    fail(ErrorKind::Argument, "spherical covariance cannot absorb per-dimension scaling");
  for (std::size_t j = 0; j < model.k; ++j)
    for (std::size_t a = 0; a < dim; ++a)
      out.means[j * dim + a] = model.means[j * dim + a] * s[a] + standardizer.center[a];
  double log_jacobian = 0.0;
  double min_s2 = std::numeric_limits<double>::infinity();
  for (double v : s) {
    log_jacobian += std::log(v);
    min_s2 = std::min(min_s2, v * v);
  }
  for (std::size_t j = 0; j < model.k; ++j) {
    switch (model.covariance_type) {
      case CovarianceType::Spherical: out.covariances[j] *= s.front() * s.front(); break;
      case CovarianceType::Diagonal:
        for (std::size_t a = 0; a < dim; ++a)
          out.covariances[j * dim + a] *= s[a] * s[a];
        break;
      case CovarianceType::Full:
        for (std::size_t a = 0; a < dim; ++a)
          for (std::size_t b = 0; b < dim; ++b)
            out.covariances[(j * dim + a) * dim + b] *= s[a] * s[b];
        break;
    }
  }
  for (double& v : out.fit_meta.trace)
    v -= log_jacobian;
  out.fit_meta.final_mean_log_likelihood -= log_jacobian;
  out.fit_meta.variance_floor = model.fit_meta.variance_floor * min_s2;
  out.fit_meta.standardized = true;
  out.validate();
  return out;
}

} // namespace simsel
