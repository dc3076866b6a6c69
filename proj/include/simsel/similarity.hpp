#pragma once

#include "simsel/gmm.hpp"
#include "simsel/ingest.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace simsel {

enum class ScoreMode
{
  MaxOverCells,
  MeanRepresentation
};

const char* to_string(ScoreMode mode);
ScoreMode parse_score_mode(const std::string& text);

struct SimilarityScore
{
  std::string image_id;
  double score = 0.0; // nats
  ScoreMode mode = ScoreMode::MaxOverCells;
};

// MaxOverCells: the best log-density over all receptive fields of the grid.
// MeanRepresentation: the log-density of the averaged vector.
SimilarityScore similarity_score(const GmmModel& model, const RepresentationGrid& grid,
                                 ScoreMode mode);
SimilarityScore similarity_score(const MixtureTerms& terms, const RepresentationGrid& grid,
                                 ScoreMode mode);

struct ScoreFailure
{
  std::string image_id;
  std::string message;
};

struct DatasetScores
{
  std::vector<SimilarityScore> scores; // manifest order
  std::vector<ScoreFailure> failures;  // only populated when partial
};

// Images are read and scored one at a time per worker; only the scores are
// kept. Without `partial`, the first failing image (in manifest order) aborts
// with an error naming it.
DatasetScores score_dataset(const GmmModel& model, const DatasetManifest& manifest, ScoreMode mode,
                            bool partial = false);

struct LogProbHistogram
{
  std::vector<double> bin_edges;
  std::vector<std::size_t> counts;
  std::string dataset_tag;
};

inline constexpr std::size_t kDefaultHistogramBins = 100;

LogProbHistogram histogram(std::span<const SimilarityScore> scores, std::size_t bin_count,
                           std::string dataset_tag);
LogProbHistogram histogram(std::span<const double> values, std::size_t bin_count,
                           std::string dataset_tag);

std::string format_scores_csv(std::span<const SimilarityScore> scores);
std::vector<std::pair<std::string, double>> parse_scores_csv(std::string_view text);

std::string format_histogram_csv(const LogProbHistogram& hist);
LogProbHistogram parse_histogram_csv(std::string_view text);

// Mean representations as a REPR grid (H = image count, W = 1) plus an id
// list, for external embedding tools.
struct VectorExport
{
  RepresentationGrid vectors;
  std::vector<std::string> image_ids;
};

VectorExport export_mean_vectors(const DatasetManifest& manifest);
void write_vector_export(const std::string& repr_path, const std::string& ids_path,
                         const VectorExport& exported);

} // namespace simsel
