#include "simsel/error.hpp"
#include "simsel/similarity.hpp"
#include "simsel/synth.hpp"
#include "support.hpp"

#include <doctest.h>

#include <fstream>
#include <numeric>

using namespace simsel;

namespace {

GmmModel standard_normal_model(std::size_t dim)
{
  GmmModel m;
  m.k = 1;
  m.dim = dim;
  m.weights = {1.0};
  m.means.assign(dim, 0.0);
  m.covariances.assign(dim, 1.0);
  return m;
}

RepresentationGrid grid_of(std::vector<float> cells, std::uint32_t channels, std::string id = "g")
{
  RepresentationGrid g;
  g.image_id = std::move(id);
  g.height = static_cast<std::uint32_t>(cells.size() / channels);
  g.width = 1;
  g.channels = channels;
  g.values = std::move(cells);
  return g;
}

} // namespace

TEST_CASE("single-cell grid scores the cell's log-density")
{
  const auto model = standard_normal_model(2);
  const auto g = grid_of({0.5f, -1.0f}, 2);
  const auto s = similarity_score(model, g, ScoreMode::MaxOverCells);
  CHECK(s.score == doctest::Approx(log_pdf(model, std::vector<double>{0.5, -1.0})).epsilon(1e-12));
  CHECK(s.image_id == "g");
  const auto mean = similarity_score(model, g, ScoreMode::MeanRepresentation);
  CHECK(mean.score == s.score);
}

TEST_CASE("max over cells")
{
  const auto model = standard_normal_model(1);
  const auto g = grid_of({0.0f, 4.0f}, 1);
  CHECK(similarity_score(model, g, ScoreMode::MaxOverCells).score ==
        doctest::Approx(-0.918939).epsilon(1e-6));
  // mean vector is 2
  CHECK(similarity_score(model, g, ScoreMode::MeanRepresentation).score ==
        doctest::Approx(-0.9189385332046727 - 2.0).epsilon(1e-12));

  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<float> cells(30);
    for (auto& c : cells)
      c = static_cast<float>(3.0 * standard_normal(rng));
    const auto grid = grid_of(cells, 3);
    const auto m3 = standard_normal_model(3);
    const double best = similarity_score(m3, grid, ScoreMode::MaxOverCells).score;
    for (std::size_t i = 0; i < grid.cell_count(); ++i) {
      const auto c = grid.cell(i);
      CHECK(best >= log_pdf(m3, std::vector<double>(c.begin(), c.end())));
    }
  }
}

TEST_CASE("channel mismatch is an error")
{
  const auto model = standard_normal_model(2);
  CHECK_THROWS_AS(similarity_score(model, grid_of({1.0f, 2.0f, 3.0f}, 3), ScoreMode::MaxOverCells),
                  Error);
}

TEST_CASE("histogram examples")
{
  const std::vector<double> v{0, 1, 2, 3};
  const auto h = histogram(v, 2, "x");
  CHECK(h.bin_edges == std::vector<double>{0.0, 1.5, 3.0});
  CHECK(h.counts == std::vector<std::size_t>{2, 2});
  CHECK(h.dataset_tag == "x");

  const std::vector<double> same{-7.0, -7.0, -7.0};
  const auto d = histogram(same, 4, "d");
  CHECK(d.counts.size() == 4);
  CHECK(std::accumulate(d.counts.begin(), d.counts.end(), std::size_t{0}) == 3);
  CHECK(d.bin_edges.front() < -7.0);
  CHECK(d.bin_edges.back() > -7.0);

  CHECK_THROWS_AS(histogram(v, 0, "x"), Error);

  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> xs(1 + uniform_index(rng, 500));
    for (auto& x : xs)
      x = -50.0 * uniform01(rng);
    const auto hh = histogram(xs, 1 + uniform_index(rng, 100), "r");
    CHECK(std::accumulate(hh.counts.begin(), hh.counts.end(), std::size_t{0}) == xs.size());
    CHECK(hh.bin_edges.size() == hh.counts.size() + 1);
  }
}

TEST_CASE("shifting a grid away from the mean lowers the score")
{
  const auto model = standard_normal_model(2);
  const std::vector<float> base{0.1f, -0.2f, 0.3f, 0.4f};
  double previous = similarity_score(model, grid_of(base, 2), ScoreMode::MaxOverCells).score;
  for (float shift : {1.0f, 2.0f, 5.0f, 10.0f}) {
    auto cells = base;
    for (auto& c : cells)
      c += shift;
    const double s = similarity_score(model, grid_of(cells, 2), ScoreMode::MaxOverCells).score;
    CHECK(s < previous);
    previous = s;
  }
}

TEST_CASE("score and histogram CSV round trip")
{
  std::vector<SimilarityScore> scores{{"a", -1.25, ScoreMode::MaxOverCells},
                                      {"b,c", -3.0e-7, ScoreMode::MaxOverCells},
                                      {"d", -123456.789, ScoreMode::MaxOverCells}};
  const auto text = format_scores_csv(scores);
  const auto parsed = parse_scores_csv(text);
  REQUIRE(parsed.size() == 3);
  CHECK(parsed[1].first == "b,c");
  CHECK(parsed[2].second == -123456.789);

  std::vector<double> vals;
  for (auto& s : scores)
    vals.push_back(s.score);
  const auto h = histogram(vals, 5, "cand");
  const auto ht = format_histogram_csv(h);
  const auto back = parse_histogram_csv(ht);
  CHECK(back.bin_edges == h.bin_edges);
  CHECK(back.counts == h.counts);
  CHECK(back.dataset_tag == "cand");
  CHECK(format_histogram_csv(back) == ht);
}

TEST_CASE("score_dataset keeps manifest order and handles failures")
{
  test::TempDir dir;
  const auto model = standard_normal_model(2);
  DatasetManifest manifest;
  manifest.base_dir = dir.path().string();
  for (int i = 0; i < 5; ++i) {
    const std::string id = "img" + std::to_string(i);
    auto g = grid_of({float(i), 0.0f, float(-i), 1.0f}, 2, id);
    write_representation(dir.str(id + ".repr"), g);
    manifest.entries.push_back({id, id + ".repr", std::nullopt});
  }
  const auto all = score_dataset(model, manifest, ScoreMode::MaxOverCells);
  REQUIRE(all.scores.size() == 5);
  for (int i = 0; i < 5; ++i)
    CHECK(all.scores[i].image_id == "img" + std::to_string(i));

  std::ofstream(dir.str("img2.repr"), std::ios::binary | std::ios::trunc) << "REPRjunk";
  try {
    score_dataset(model, manifest, ScoreMode::MaxOverCells);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("img2") != std::string::npos);
  }
  const auto partial = score_dataset(model, manifest, ScoreMode::MaxOverCells, true);
  CHECK(partial.scores.size() == 4);
  REQUIRE(partial.failures.size() == 1);
  CHECK(partial.failures[0].image_id == "img2");
}

TEST_CASE("scores are identical across worker counts")
{
  test::TempDir dir;
  Rng rng(5);
  auto spec = test::make_spec(4, test::separated_means(3, 4, 4.0, rng), {0.2, 0.3, 0.5}, 17);
  spec.grid_height = 6;
  spec.grid_width = 5;
  spec.image_count = 40;
  const auto manifest = generate_domain(spec, dir.path(), "img", 0);
  const auto model = spec.model();
  kernels::set_workers(1);
  const auto one = format_scores_csv(score_dataset(model, manifest, ScoreMode::MaxOverCells).scores);
  kernels::set_workers(4);
  const auto four = format_scores_csv(score_dataset(model, manifest, ScoreMode::MaxOverCells).scores);
  kernels::set_workers(0);
  CHECK(one == four);
}
