#pragma once

#include "simsel/gmm.hpp"
#include "simsel/ingest.hpp"
#include "simsel/repr.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace simsel {

/// Ground truth for one synthetic domain: a Gaussian mixture in
/// representation space, a grid shape, an image count and per-class box
/// rates for label generation.
struct SynthSpec
{
  std::size_t dim = 1;
  std::size_t true_k = 1;
  CovarianceType covariance_type = CovarianceType::Diagonal;
  std::vector<double> weights;
  std::vector<double> means;       // true_k x dim
  std::vector<double> covariances; // same layout as GmmModel
  std::uint32_t grid_height = 1;
  std::uint32_t grid_width = 1;
  std::size_t image_count = 1;
  std::map<std::string, double> class_frequencies; // mean boxes per image
  std::uint64_t seed = 0;

  void validate() const;
  GmmModel model() const;
};

SynthSpec parse_synth_spec(std::string_view json_text);
SynthSpec read_synth_spec(const std::string& path);
std::string to_json(const SynthSpec& spec);

struct SyntheticSamples
{
  SampleSet samples;
  std::vector<std::size_t> components; // true component of each sample
};

SyntheticSamples generate_samples(const SynthSpec& spec, std::size_t n);

// Grid `index` of domain stream `domain`; depends only on (seed, domain, index).
RepresentationGrid generate_grid(const SynthSpec& spec, std::uint64_t domain, std::size_t index,
                                 std::string image_id);

// Writes spec.image_count REPR files plus manifest.csv into `dir`.
DatasetManifest generate_domain(const SynthSpec& spec, const std::filesystem::path& dir,
                                const std::string& id_prefix, std::uint64_t domain);

struct DomainPair
{
  DatasetManifest reference;
  DatasetManifest candidates;
};

// Domain A goes to <out>/reference, domain B to <out>/candidates.
DomainPair generate_domain_pair(const SynthSpec& spec_a, const SynthSpec& spec_b,
                                const std::filesystem::path& out);

std::vector<BBoxRecord> generate_labels(const SynthSpec& spec, const DatasetManifest& manifest);

} // namespace simsel
