#include "simsel/synth.hpp"

#include "parallel.hpp"
#include "simsel/csv.hpp"
#include "simsel/error.hpp"
#include "simsel/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>

namespace simsel {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSampleStream = 0x5a4d504c45ULL;
constexpr std::uint64_t kLabelStream = 0x4c4142454cULL;

std::size_t cov_stride(CovarianceType type, std::size_t dim)
{
  return type == CovarianceType::Spherical ? 1 : type == CovarianceType::Diagonal ? dim : dim * dim;
}

std::size_t pick_component(const std::vector<double>& weights, Rng& rng)
{
  const double u = uniform01(rng);
  double run = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    run += weights[j];
    if (u < run)
      return j;
  }
  return weights.size() - 1;
}

// Draws one vector from component j into `out`.
template <typename T>
void draw(const SynthSpec& spec, const MixtureTerms& terms, std::size_t j, Rng& rng, T* out,
          std::vector<double>& z)
{
  const std::size_t dim = spec.dim;
  for (std::size_t a = 0; a < dim; ++a)
    z[a] = standard_normal(rng);
  const double* mu = spec.means.data() + j * dim;
  if (spec.covariance_type == CovarianceType::Full) {
    const double* L = terms.chol.data() + j * dim * dim;
    for (std::size_t a = 0; a < dim; ++a) {
      double v = mu[a];
      for (std::size_t b = 0; b <= a; ++b)
        v += L[a * dim + b] * z[b];
      out[a] = static_cast<T>(v);
    }
  } else {
    for (std::size_t a = 0; a < dim; ++a)
      out[a] = static_cast<T>(mu[a] + z[a] / std::sqrt(terms.precision[j * dim + a]));
  }
}

std::size_t poisson(double rate, Rng& rng)
{
  // Knuth's method in chunks so exp(-rate) never underflows.
  std::size_t total = 0;
  while (rate > 0.0) {
    const double chunk = std::min(rate, 30.0);
    rate -= chunk;
    const double limit = std::exp(-chunk);
    double p = 1.0;
    std::size_t k = 0;
    do {
      ++k;
      p *= uniform01(rng);
    } while (p > limit);
    total += k - 1;
  }
  return total;
}

} // namespace

GmmModel SynthSpec::model() const
{
  GmmModel m;
  m.k = true_k;
  m.dim = dim;
  m.covariance_type = covariance_type;
  m.weights = weights;
  m.means = means;
  m.covariances = covariances;
  return m;
}

void SynthSpec::validate() const
{
  if (dim < 1 || true_k < 1)
    fail(ErrorKind::Validation, "synthetic spec needs dim >= 1 and true_k >= 1");
  if (grid_height < 1 || grid_width < 1 || image_count < 1)
    fail(ErrorKind::Validation, "synthetic spec needs a non-empty grid and at least one image");
  for (const auto& [cls, rate] : class_frequencies) {
    if (cls.empty() || !(rate >= 0.0) || !std::isfinite(rate))
      fail(ErrorKind::Validation, "class frequencies must be non-negative with non-empty names");
  }
  model().validate();
}

SynthSpec parse_synth_spec(std::string_view json_text)
{
  SynthSpec spec;
  try {
    const auto j = nlohmann::json::parse(json_text);
    spec.dim = j.at("dim").get<std::size_t>();
    spec.true_k = j.at("true_k").get<std::size_t>();
    spec.covariance_type = parse_covariance_type(j.value("covariance_type", std::string("diagonal")));
    spec.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& row : j.at("means")) {
      const auto v = row.get<std::vector<double>>();
      spec.means.insert(spec.means.end(), v.begin(), v.end());
    }
    for (const auto& c : j.at("covariances")) {
      if (c.is_number()) {
        spec.covariances.push_back(c.get<double>());
      } else {
        for (const auto& row : c) {
          if (row.is_number()) {
            spec.covariances.push_back(row.get<double>());
          } else {
            const auto v = row.get<std::vector<double>>();
            spec.covariances.insert(spec.covariances.end(), v.begin(), v.end());
          }
        }
      }
    }
    if (j.contains("grid")) {
      spec.grid_height = j["grid"].at("height").get<std::uint32_t>();
      spec.grid_width = j["grid"].at("width").get<std::uint32_t>();
    }
    spec.image_count = j.value("image_count", std::size_t{1});
    if (j.contains("class_frequencies"))
      spec.class_frequencies = j["class_frequencies"].get<std::map<std::string, double>>();
    spec.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed synthetic spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

SynthSpec read_synth_spec(const std::string& path)
{
  return parse_synth_spec(csv::read_text_file(path));
}

std::string to_json(const SynthSpec& spec)
{
  nlohmann::ordered_json j;
  j["dim"] = spec.dim;
  j["true_k"] = spec.true_k;
  j["covariance_type"] = to_string(spec.covariance_type);
  j["weights"] = spec.weights;
  const std::size_t dim = spec.dim;
  const std::size_t stride = cov_stride(spec.covariance_type, dim);
  auto means = nlohmann::ordered_json::array();
  auto covs = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < spec.true_k; ++c) {
    means.push_back(std::vector<double>(spec.means.begin() + c * dim, spec.means.begin() + (c + 1) * dim));
    if (stride == 1)
      covs.push_back(spec.covariances[c]);
    else
      covs.push_back(std::vector<double>(spec.covariances.begin() + c * stride,
                                         spec.covariances.begin() + (c + 1) * stride));
  }
  j["means"] = std::move(means);
  j["covariances"] = std::move(covs);
  j["grid"] = {{"height", spec.grid_height}, {"width", spec.grid_width}};
  j["image_count"] = spec.image_count;
  j["class_frequencies"] = spec.class_frequencies;
  j["seed"] = spec.seed;
  return j.dump(2) + "\n";
}

SyntheticSamples generate_samples(const SynthSpec& spec, std::size_t n)
{
  spec.validate();
  GmmModel model = spec.model();
  const MixtureTerms terms = precompute(model);
  Rng rng(derive_seed(spec.seed, kSampleStream));
  SyntheticSamples out;
  out.samples.dim = spec.dim;
  out.samples.values.resize(n * spec.dim);
  out.components.resize(n);
  std::vector<double> z(spec.dim);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = pick_component(spec.weights, rng);
    out.components[i] = j;
    draw(spec, terms, j, rng, out.samples.values.data() + i * spec.dim, z);
  }
  return out;
}

RepresentationGrid generate_grid(const SynthSpec& spec, std::uint64_t domain, std::size_t index,
                                 std::string image_id)
{
  const MixtureTerms terms = precompute(spec.model());
  Rng rng(derive_seed(derive_seed(spec.seed, domain), index));
  RepresentationGrid grid;
  grid.image_id = std::move(image_id);
  grid.height = spec.grid_height;
  grid.width = spec.grid_width;
  grid.channels = static_cast<std::uint32_t>(spec.dim);
  grid.values.resize(grid.cell_count() * spec.dim);
  std::vector<double> z(spec.dim);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const std::size_t j = pick_component(spec.weights, rng);
    draw(spec, terms, j, rng, grid.values.data() + c * spec.dim, z);
  }
  return grid;
}

DatasetManifest generate_domain(const SynthSpec& spec, const fs::path& dir,
                                const std::string& id_prefix, std::uint64_t domain)
{
  spec.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    fail(ErrorKind::Io, "cannot create '" + dir.string() + "': " + ec.message());
  DatasetManifest manifest;
  manifest.base_dir = dir;
  manifest.entries.resize(spec.image_count);
  for (std::size_t i = 0; i < spec.image_count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu", i);
    manifest.entries[i].image_id = id_prefix + "_" + name;
    manifest.entries[i].feature_path = manifest.entries[i].image_id + ".repr";
  }
  detail::parallel_for(spec.image_count, [&](std::size_t i) {
    const auto& e = manifest.entries[i];
    write_representation(dir / e.feature_path, generate_grid(spec, domain, i, e.image_id));
  });
  write_manifest(dir / "manifest.csv", manifest);
  return manifest;
}

DomainPair generate_domain_pair(const SynthSpec& spec_a, const SynthSpec& spec_b, const fs::path& out)
{
  if (spec_a.dim != spec_b.dim)
    fail(ErrorKind::Validation, "domain specs must share the representation dimension");
  return {generate_domain(spec_a, out / "reference", "ref", 0),
          generate_domain(spec_b, out / "candidates", "cand", 1)};
}

std::vector<BBoxRecord> generate_labels(const SynthSpec& spec, const DatasetManifest& manifest)
{
  std::vector<std::vector<BBoxRecord>> per_image(manifest.size());
  detail::parallel_for(manifest.size(), [&](std::size_t i) {
    Rng rng(derive_seed(derive_seed(spec.seed, kLabelStream), i));
    auto coord_pair = [&rng] {
      double a, b;
      do {
        a = uniform01(rng);
        b = uniform01(rng);
      } while (a == b);
      return std::pair{std::min(a, b), std::max(a, b)};
    };
    for (const auto& [cls, rate] : spec.class_frequencies) {
      const std::size_t count = poisson(rate, rng);
      for (std::size_t b = 0; b < count; ++b) {
        const auto [x0, x1] = coord_pair();
        const auto [y0, y1] = coord_pair();
        per_image[i].push_back({manifest.entries[i].image_id, cls, x0, x1, y0, y1});
      }
    }
  });
  std::vector<BBoxRecord> out;
  for (auto& boxes : per_image)
    out.insert(out.end(), boxes.begin(), boxes.end());
  return out;
}

} // namespace simsel
