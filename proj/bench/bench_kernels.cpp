// Serial reference vs OpenMP kernels at production shapes (24000 samples, dim 256, K 5).
#include "simsel/gmm.hpp"
#include "simsel/kernels.hpp"
#include "simsel/rng.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace simsel;

struct Fixture
{
  GmmModel model;
  MixtureTerms terms;
  std::vector<double> samples;
  std::vector<float> cells;
  std::vector<double> resp, loglik;
};

Fixture make_fixture(std::size_t n, std::size_t dim, std::size_t k)
{
  Fixture f;
  Rng rng(42);
  f.model.k = k;
  f.model.dim = dim;
  f.model.covariance_type = CovarianceType::Diagonal;
  f.model.weights.assign(k, 1.0 / k);
  for (std::size_t i = 0; i < k * dim; ++i) {
    f.model.means.push_back(standard_normal(rng));
    f.model.covariances.push_back(0.5 + uniform01(rng));
  }
  f.terms = precompute(f.model);
  for (std::size_t i = 0; i < n * dim; ++i) {
    f.samples.push_back(standard_normal(rng));
    f.cells.push_back(static_cast<float>(f.samples.back()));
  }
  f.resp.resize(n * k);
  f.loglik.resize(n);
  return f;
}

Fixture& shared()
{
  static Fixture f = make_fixture(24000, 256, 5);
  return f;
}

void BM_EStepSerial(benchmark::State& state)
{
  auto& f = shared();
  for (auto _ : state)
    kernels::serial::estep(f.terms, f.samples, f.resp, f.loglik);
}

void BM_EStepOmp(benchmark::State& state)
{
  auto& f = shared();
  for (auto _ : state)
    kernels::omp::estep(f.terms, f.samples, f.resp, f.loglik);
}

void BM_MomentsSerial(benchmark::State& state)
{
  auto& f = shared();
  for (auto _ : state)
    benchmark::DoNotOptimize(
      kernels::serial::moments(CovarianceType::Diagonal, f.resp, f.samples, 5, 256));
}

void BM_MomentsOmp(benchmark::State& state)
{
  auto& f = shared();
  for (auto _ : state)
    benchmark::DoNotOptimize(
      kernels::omp::moments(CovarianceType::Diagonal, f.resp, f.samples, 5, 256));
}

// One 256 x 512 grid is 131072 cells; a 4096-cell slice keeps runs short.
void BM_MaxLogPdfSerial(benchmark::State& state)
{
  auto& f = shared();
  std::span<const float> cells(f.cells.data(), 4096 * 256);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::serial::max_log_pdf(f.terms, cells));
}

void BM_MaxLogPdfOmp(benchmark::State& state)
{
  auto& f = shared();
  std::span<const float> cells(f.cells.data(), 4096 * 256);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::omp::max_log_pdf(f.terms, cells));
}

} // namespace

BENCHMARK(BM_EStepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EStepOmp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MomentsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MomentsOmp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MaxLogPdfSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MaxLogPdfOmp)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
