#include "simsel/error.hpp"
#include "simsel/repr.hpp"
#include "simsel/rng.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace simsel;

namespace {

RepresentationGrid make_grid(std::string id, std::uint32_t h, std::uint32_t w, std::uint32_t c,
                             std::vector<float> values)
{
  RepresentationGrid g;
  g.image_id = std::move(id);
  g.height = h;
  g.width = w;
  g.channels = c;
  g.values = std::move(values);
  return g;
}

RepresentationGrid random_grid(Rng& rng, std::uint32_t h, std::uint32_t w, std::uint32_t c)
{
  std::vector<float> v(std::size_t(h) * w * c);
  for (auto& x : v)
    x = static_cast<float>(standard_normal(rng));
  return make_grid("g", h, w, c, std::move(v));
}

// Writes grids and a manifest; cell values encode (image, cell, channel).
DatasetManifest write_dataset(const test::TempDir& dir, const std::vector<std::pair<int, int>>& shapes,
                              std::uint32_t channels)
{
  DatasetManifest m;
  m.base_dir = dir.path();
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    auto [h, w] = shapes[i];
    std::vector<float> v;
    for (int cell = 0; cell < h * w; ++cell)
      for (std::uint32_t c = 0; c < channels; ++c)
        v.push_back(static_cast<float>(1000 * i + 10 * cell + c));
    const std::string id = "img" + std::to_string(i);
    write_representation(dir.path() / (id + ".repr"),
                         make_grid(id, std::uint32_t(h), std::uint32_t(w), channels, v));
    m.entries.push_back({id, id + ".repr", std::nullopt});
  }
  return m;
}

} // namespace

TEST_CASE("mean_representation averages cells per channel")
{
  CHECK(mean_representation(make_grid("a", 1, 2, 2, {1, 2, 3, 4})).vector ==
        std::vector<double>{2.0, 3.0});
  CHECK(mean_representation(make_grid("a", 1, 1, 3, {5, 6, 7})).vector ==
        std::vector<double>{5.0, 6.0, 7.0});
  const auto constant = mean_representation(make_grid("a", 3, 2, 2, {1.5f, -2, 1.5f, -2, 1.5f, -2,
                                                                      1.5f, -2, 1.5f, -2, 1.5f, -2}));
  CHECK(constant.vector == std::vector<double>{1.5, -2.0});
}

TEST_CASE("mean_representation is invariant to cell order and affine maps")
{
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = random_grid(rng, 1 + uniform_index(rng, 6), 1 + uniform_index(rng, 6),
                         1 + uniform_index(rng, 5));
    const auto base = mean_representation(g);

    // shuffle whole cells
    auto shuffled = g;
    const std::size_t cells = g.cell_count();
    for (std::size_t i = cells; i > 1; --i) {
      const std::size_t j = uniform_index(rng, i);
      for (std::size_t c = 0; c < g.channels; ++c)
        std::swap(shuffled.values[(i - 1) * g.channels + c], shuffled.values[j * g.channels + c]);
    }
    const auto perm = mean_representation(shuffled);
    for (std::size_t c = 0; c < g.channels; ++c)
      CHECK(perm.vector[c] == doctest::Approx(base.vector[c]).epsilon(1e-12));

    const float a = 0.5f + float(uniform01(rng)) * 3.0f;
    const float b = float(standard_normal(rng));
    auto mapped = g;
    for (auto& v : mapped.values)
      v = a * v + b;
    const auto lin = mean_representation(mapped);
    for (std::size_t c = 0; c < g.channels; ++c) {
      const double expected = a * base.vector[c] + b;
      CHECK(std::abs(lin.vector[c] - expected) <= 1e-6 * std::max(1.0, std::abs(expected)));
    }
  }
}

TEST_CASE("build_sample_set in per-image-mean mode")
{
  test::TempDir dir;
  const auto m = write_dataset(dir, {{1, 2}, {2, 2}, {1, 1}}, 3);
  const auto set = build_sample_set(m, SamplingMode::PerImageMean, 999, 1);
  CHECK(set.count() == 3);
  CHECK(set.dim == 3);
  CHECK_FALSE(set.seed.has_value());
  CHECK(set.provenance == SamplingMode::PerImageMean);
  // image 0: cells 0 and 1 -> mean cell index 0.5
  CHECK(set.sample(0)[0] == doctest::Approx(5.0));
  CHECK(set.sample(1)[2] == doctest::Approx(1000 + 15 + 2));
}

TEST_CASE("build_sample_set in per-cell mode")
{
  test::TempDir dir;
  SUBCASE("exhaustive draw returns every cell once")
  {
    const auto m = write_dataset(dir, {{2, 2}}, 2);
    const auto set = build_sample_set(m, SamplingMode::PerCellSubsample, 4, 17);
    REQUIRE(set.count() == 4);
    std::multiset<double> firsts;
    for (std::size_t i = 0; i < 4; ++i)
      firsts.insert(set.sample(i)[0]);
    CHECK(firsts == std::multiset<double>{0, 10, 20, 30});
    CHECK(set.seed == 17u);
  }
  SUBCASE("draws span images, are distinct and reproducible")
  {
    const auto m = write_dataset(dir, {{3, 4}, {1, 1}, {2, 5}, {4, 4}}, 2);
    const std::size_t population = 12 + 1 + 10 + 16;
    const auto a = build_sample_set(m, SamplingMode::PerCellSubsample, 20, 5);
    const auto b = build_sample_set(m, SamplingMode::PerCellSubsample, 20, 5);
    CHECK(a.values == b.values);
    std::set<double> ids;
    for (std::size_t i = 0; i < a.count(); ++i) {
      ids.insert(a.sample(i)[0]);
      CHECK(a.sample(i)[1] == a.sample(i)[0] + 1);
    }
    CHECK(ids.size() == 20);
    const auto all = build_sample_set(m, SamplingMode::PerCellSubsample, population, 8);
    std::set<double> every;
    for (std::size_t i = 0; i < all.count(); ++i)
      every.insert(all.sample(i)[0]);
    CHECK(every.size() == population);
    CHECK_THROWS_AS(build_sample_set(m, SamplingMode::PerCellSubsample, population + 1, 8), Error);
  }
  SUBCASE("result does not depend on the worker count")
  {
    const auto m = write_dataset(dir, {{3, 4}, {1, 1}, {2, 5}, {4, 4}, {2, 2}}, 3);
    kernels::set_workers(1);
    const auto one = build_sample_set(m, SamplingMode::PerCellSubsample, 25, 99);
    kernels::set_workers(4);
    const auto four = build_sample_set(m, SamplingMode::PerCellSubsample, 25, 99);
    kernels::set_workers(0);
    CHECK(one.values == four.values);
  }
  SUBCASE("unreadable file is reported with its image id")
  {
    auto m = write_dataset(dir, {{1, 1}, {1, 1}}, 2);
    m.entries[1].feature_path = "missing.repr";
    try {
      build_sample_set(m, SamplingMode::PerCellSubsample, 1, 0);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("img1") != std::string::npos);
    }
  }
}

TEST_CASE("sample_without_replacement is uniform enough and exact in size")
{
  std::vector<int> hits(10, 0);
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const auto picks = sample_without_replacement(10, 3, seed);
    REQUIRE(picks.size() == 3);
    CHECK(std::set<std::uint64_t>(picks.begin(), picks.end()).size() == 3);
    for (auto p : picks)
      ++hits[p];
  }
  // each value expected 600 times; binomial sd ~ 20
  for (int h : hits)
    CHECK(std::abs(h - 600) < 120);
}

TEST_CASE("sample set persists as a REPR grid")
{
  SampleSet s;
  s.dim = 2;
  s.values = {1.0, 2.0, 3.5, -4.0, 0.25, 8.0};
  const auto back = from_grid(decode_representation(encode_representation(to_grid(s))));
  CHECK(back.values == s.values);
  CHECK(to_grid(s).height == 3);
  CHECK(to_grid(s).width == 1);
}

TEST_CASE("standardizer centers and scales")
{
  SampleSet s;
  s.dim = 2;
  s.values = {1, 10, 3, 10, 5, 10};
  const auto st = fit_standardizer(s);
  CHECK(st.center[0] == doctest::Approx(3.0));
  CHECK(st.scale[1] == 1.0); // constant dimension
  st.apply(s);
  CHECK(s.values[0] == doctest::Approx(-1.224744871391589));
  CHECK(s.values[1] == 0.0);
}
