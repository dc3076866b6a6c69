#include "simsel/error.hpp"
#include "simsel/synth.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace simsel;

TEST_CASE("single-component samples have the expected mean")
{
  const auto spec = test::make_spec(3, {1.0, -2.0, 5.0}, {1.0}, 42);
  const auto data = generate_samples(spec, 1000);
  REQUIRE(data.samples.count() == 1000);
  for (std::size_t a = 0; a < 3; ++a) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 1000; ++i)
      mean += data.samples.values[i * 3 + a];
    mean /= 1000.0;
    CHECK(std::abs(mean - spec.means[a]) <= 4.0 / std::sqrt(1000.0));
  }
}

TEST_CASE("generation is deterministic")
{
  const auto spec = test::make_spec(2, {0.0, 0.0, 5.0, 5.0}, {0.4, 0.6}, 7);
  CHECK(generate_samples(spec, 100).samples.values == generate_samples(spec, 100).samples.values);
  CHECK(generate_samples(spec, 1).samples.count() == 1);
  CHECK(encode_representation(generate_grid(spec, 1, 3, "x")) ==
        encode_representation(generate_grid(spec, 1, 3, "x")));
  CHECK(generate_grid(spec, 0, 3, "x").values != generate_grid(spec, 1, 3, "x").values);
}

TEST_CASE("spec validation")
{
  auto spec = test::make_spec(2, {0.0, 0.0, 5.0, 5.0}, {0.4, 0.6}, 7);
  spec.weights = {0.5, 0.6};
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = test::make_spec(2, {0.0, 0.0}, {1.0}, 1);
  spec.covariances = {1.0, -1.0};
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = test::make_spec(2, {0.0, 0.0}, {1.0}, 1);
  CHECK(to_json(parse_synth_spec(to_json(spec))) == to_json(spec));
}

TEST_CASE("labels follow the class frequencies")
{
  test::TempDir dir;
  auto spec = test::make_spec(1, {0.0}, {1.0}, 3);
  spec.image_count = 400;
  const auto manifest = generate_domain(spec, dir.path(), "img", 0);
  CHECK(manifest.entries.size() == 400);
  spec.class_frequencies = {{"car", 0.0}, {"person", 0.0}};
  CHECK(generate_labels(spec, manifest).empty());

  spec.class_frequencies = {{"car", 5.0}, {"person", 0.0}};
  const auto labels = generate_labels(spec, manifest);
  const double rate = double(labels.size()) / 400.0;
  CHECK(std::abs(rate - 5.0) <= 0.25);
  for (const auto& b : labels) {
    CHECK(b.class_name == "car");
    CHECK_NOTHROW(b.validate());
  }
}
