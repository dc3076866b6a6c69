#pragma once

#include "simsel/ingest.hpp"

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace simsel {

enum class UnknownClassPolicy
{
  Ignore,
  Error
};

struct ScoreCategory
{
  std::string name;
  std::set<std::string> classes;
  double weight = 0.0;
};

/// Maps label classes to weighted categories. An image's diversity score is
/// the sum of its boxes' category weights.
struct ScoringConfig
{
  std::vector<ScoreCategory> categories;
  UnknownClassPolicy unknown_class_policy = UnknownClassPolicy::Ignore;

  void validate() const;
  // Category index of a class, or -1.
  int category_of(const std::string& class_name) const;
};

// Traffic objects 100, vehicles 10, humans 1.
ScoringConfig open_images_scoring();
// Vehicles 10, humans 1; traffic objects are not instance-labeled there.
ScoringConfig cityscapes_scoring();

ScoringConfig parse_scoring_config(std::string_view json_text);
ScoringConfig read_scoring_config(const std::string& path);
std::string to_json(const ScoringConfig& config);

struct DiversityScore
{
  std::string image_id;
  double score = 0.0;
  std::size_t object_count = 0;

  bool operator==(const DiversityScore&) const = default;
};

// All boxes must belong to `image_id` (or to one shared id if it is empty).
DiversityScore diversity_score(std::span<const BBoxRecord> boxes, const ScoringConfig& config,
                               std::string image_id = {});

// One score per distinct image id, sorted by id.
std::vector<DiversityScore> score_label_table(std::span<const BBoxRecord> records,
                                              const ScoringConfig& config);

// Scores in manifest order; images without labels get score 0.
std::vector<DiversityScore> join_with_manifest(std::span<const DiversityScore> scores,
                                               const DatasetManifest& manifest);

std::string format_diversity_csv(std::span<const DiversityScore> scores);
std::vector<DiversityScore> parse_diversity_csv(std::string_view text);

} // namespace simsel
