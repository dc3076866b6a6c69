#pragma once

#include "simsel/ingest.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace simsel {

/// Per-image average of all receptive-field vectors.
struct MeanRepresentation
{
  std::string image_id;
  std::vector<double> vector;
};

enum class SamplingMode
{
  PerImageMean,
  PerCellSubsample
};

const char* to_string(SamplingMode mode);
SamplingMode parse_sampling_mode(const std::string& text);

/// The training set handed to EM: `count()` vectors of length `dim`, stored
/// contiguously.
struct SampleSet
{
  std::size_t dim = 0;
  std::vector<double> values;
  SamplingMode provenance = SamplingMode::PerImageMean;
  std::optional<std::uint64_t> seed; // present iff subsampled

  std::size_t count() const { return dim ? values.size() / dim : 0; }
  std::span<const double> sample(std::size_t i) const { return {values.data() + i * dim, dim}; }

  void validate() const;
};

inline constexpr std::size_t kDefaultSampleCount = 24000;

MeanRepresentation mean_representation(const RepresentationGrid& grid);

std::vector<MeanRepresentation> mean_representations(const DatasetManifest& manifest);

// PerImageMean ignores `sample_count`. PerCellSubsample draws `sample_count`
// cells uniformly without replacement from the concatenation of all images'
// cells; the result depends only on the manifest and the seed.
SampleSet build_sample_set(const DatasetManifest& manifest, SamplingMode mode,
                           std::size_t sample_count, std::uint64_t seed);

// `count` distinct values from [0, population), in random order.
std::vector<std::uint64_t> sample_without_replacement(std::uint64_t population, std::size_t count,
                                                      std::uint64_t seed);

/// Per-dimension affine map x -> (x - center) / scale.
struct Standardizer
{
  std::vector<double> center;
  std::vector<double> scale;

  void apply(SampleSet& samples) const;
};

// Dimensions with zero spread get scale 1.
Standardizer fit_standardizer(const SampleSet& samples);

// A sample set persisted as REPR with H = count, W = 1 (float precision).
RepresentationGrid to_grid(const SampleSet& samples, std::string id = "samples");
SampleSet from_grid(const RepresentationGrid& grid);

} // namespace simsel
