#include "simsel/repr.hpp"

#include "parallel.hpp"
#include "simsel/error.hpp"
#include "simsel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace simsel {

const char* to_string(SamplingMode mode)
{
  return mode == SamplingMode::PerImageMean ? "per_image_mean" : "per_cell_subsample";
}

SamplingMode parse_sampling_mode(const std::string& text)
{
  if (text == "per_image_mean" || text == "mean")
    return SamplingMode::PerImageMean;
  if (text == "per_cell_subsample" || text == "cells" || text == "subsample")
    return SamplingMode::PerCellSubsample;
  fail(ErrorKind::Validation, "unknown sampling mode '" + text + "'");
}

void SampleSet::validate() const
{
  if (dim == 0)
    fail(ErrorKind::Validation, "sample set has zero dimension");
  if (values.empty() || values.size() % dim != 0)
    fail(ErrorKind::Validation, "sample set is empty or ragged");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      fail(ErrorKind::Data, "sample set has a non-finite value at index " + std::to_string(i));
  }
}

MeanRepresentation mean_representation(const RepresentationGrid& grid)
{
  grid.validate();
  MeanRepresentation out;
  out.image_id = grid.image_id;
  out.vector.assign(grid.channels, 0.0);
  const std::size_t cells = grid.cell_count();
  for (std::size_t i = 0; i < cells; ++i) {
    const auto cell = grid.cell(i);
    for (std::size_t c = 0; c < grid.channels; ++c)
      out.vector[c] += cell[c];
  }
  const double inv = 1.0 / static_cast<double>(cells);
  for (double& v : out.vector)
    v *= inv;
  return out;
}

namespace {

std::string with_id(const std::string& image_id, const char* what)
{
  return "image '" + image_id + "': " + what;
}

} // namespace

std::vector<MeanRepresentation> mean_representations(const DatasetManifest& manifest)
{
  std::vector<MeanRepresentation> out(manifest.size());
  detail::parallel_for(manifest.size(), [&](std::size_t i) {
    const auto& id = manifest.entries[i].image_id;
    try {
      out[i] = mean_representation(read_representation(manifest.resolve(i), id));
    } catch (const Error& e) {
      throw Error(e.kind(), with_id(id, e.what()));
    }
  });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].vector.size() != out[0].vector.size())
      fail(ErrorKind::Data, with_id(out[i].image_id, "channel count differs from the first image"));
  }
  return out;
}

std::vector<std::uint64_t> sample_without_replacement(std::uint64_t population, std::size_t count,
                                                      std::uint64_t seed)
{
  if (count > population)
    fail(ErrorKind::Argument, "sample count " + std::to_string(count) + " exceeds population " +
                                std::to_string(population));
  Rng rng(seed);
  std::vector<std::uint64_t> picked;
  picked.reserve(count);
  std::unordered_set<std::uint64_t> taken;
  taken.reserve(count * 2);
  // Floyd's algorithm: exactly `count` draws, uniform over all subsets.
  for (std::uint64_t j = population - count; j < population; ++j) {
    const std::uint64_t t = uniform_index(rng, j + 1);
    const std::uint64_t v = taken.insert(t).second ? t : j;
    if (v == j)
      taken.insert(j);
    picked.push_back(v);
  }
  for (std::size_t i = picked.size(); i > 1; --i)
    std::swap(picked[i - 1], picked[uniform_index(rng, i)]);
  return picked;
}

SampleSet build_sample_set(const DatasetManifest& manifest, SamplingMode mode,
                           std::size_t sample_count, std::uint64_t seed)
{
  if (manifest.entries.empty())
    fail(ErrorKind::Validation, "manifest has no entries");

  SampleSet set;
  set.provenance = mode;
  if (mode == SamplingMode::PerImageMean) {
    const auto means = mean_representations(manifest);
    set.dim = means.front().vector.size();
    set.values.reserve(means.size() * set.dim);
    for (const auto& m : means)
      set.values.insert(set.values.end(), m.vector.begin(), m.vector.end());
    return set;
  }

  if (sample_count == 0)
    fail(ErrorKind::Argument, "sample count must be positive");
  const std::size_t images = manifest.size();
  std::vector<ReprHeader> headers(images);
  detail::parallel_for(images, [&](std::size_t i) {
    try {
      headers[i] = read_representation_header(manifest.resolve(i));
    } catch (const Error& e) {
      throw Error(e.kind(), with_id(manifest.entries[i].image_id, e.what()));
    }
  });
  const std::uint32_t channels = headers.front().channels;
  // Global cell index of each image's first cell.
  std::vector<std::uint64_t> offsets(images + 1, 0);
  for (std::size_t i = 0; i < images; ++i) {
    if (headers[i].channels != channels)
      fail(ErrorKind::Data,
           with_id(manifest.entries[i].image_id, "channel count differs from the first image"));
    offsets[i + 1] = offsets[i] + headers[i].cell_count();
  }

  const auto picks = sample_without_replacement(offsets.back(), sample_count, seed);
  // (global cell, output slot) sorted by cell so each file is read once.
  std::vector<std::pair<std::uint64_t, std::size_t>> order(picks.size());
  for (std::size_t p = 0; p < picks.size(); ++p)
    order[p] = {picks[p], p};
  std::sort(order.begin(), order.end());

  std::vector<std::size_t> group_begin{0};
  std::vector<std::size_t> group_image;
  {
    std::size_t image = 0;
    for (std::size_t p = 0; p < order.size(); ++p) {
      while (order[p].first >= offsets[image + 1])
        ++image;
      if (group_image.empty() || group_image.back() != image) {
        if (!group_image.empty())
          group_begin.push_back(p);
        group_image.push_back(image);
      }
    }
    group_begin.push_back(order.size());
  }

  set.dim = channels;
  set.seed = seed;
  set.values.assign(sample_count * channels, 0.0);
  detail::parallel_for(group_image.size(), [&](std::size_t g) {
    const std::size_t image = group_image[g];
    const auto& id = manifest.entries[image].image_id;
    RepresentationGrid grid;
    try {
      grid = read_representation(manifest.resolve(image), id);
    } catch (const Error& e) {
      throw Error(e.kind(), with_id(id, e.what()));
    }
    if (grid.channels != channels || grid.cell_count() != headers[image].cell_count())
      fail(ErrorKind::Data, with_id(id, "file changed while sampling"));
    for (std::size_t p = group_begin[g]; p < group_begin[g + 1]; ++p) {
      const auto cell = grid.cell(order[p].first - offsets[image]);
      std::copy(cell.begin(), cell.end(), set.values.begin() + order[p].second * channels);
    }
  });
  return set;
}

void Standardizer::apply(SampleSet& samples) const
{
  if (center.size() != samples.dim)
    fail(ErrorKind::Argument, "standardizer dimension mismatch");
  for (std::size_t i = 0; i < samples.count(); ++i)
    for (std::size_t d = 0; d < samples.dim; ++d) {
      double& v = samples.values[i * samples.dim + d];
      v = (v - center[d]) / scale[d];
    }
}

Standardizer fit_standardizer(const SampleSet& samples)
{
  samples.validate();
  const std::size_t n = samples.count();
  const std::size_t dim = samples.dim;
  Standardizer s;
  s.center.assign(dim, 0.0);
  s.scale.assign(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dim; ++d)
      s.center[d] += samples.values[i * dim + d];
  for (double& c : s.center)
    c /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = samples.values[i * dim + d] - s.center[d];
      s.scale[d] += diff * diff;
    }
  for (double& v : s.scale) {
    v = std::sqrt(v / static_cast<double>(n));
    if (!(v > 0.0))
      v = 1.0;
  }
  return s;
}

RepresentationGrid to_grid(const SampleSet& samples, std::string id)
{
  samples.validate();
  RepresentationGrid grid;
  grid.image_id = std::move(id);
  grid.height = static_cast<std::uint32_t>(samples.count());
  grid.width = 1;
  grid.channels = static_cast<std::uint32_t>(samples.dim);
  grid.values.assign(samples.values.begin(), samples.values.end());
  return grid;
}

SampleSet from_grid(const RepresentationGrid& grid)
{
  grid.validate();
  SampleSet set;
  set.dim = grid.channels;
  set.values.assign(grid.values.begin(), grid.values.end());
  return set;
}

} // namespace simsel
