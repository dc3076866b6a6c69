#pragma once

#include "simsel/gmm.hpp"
#include "simsel/repr.hpp"
#include "simsel/similarity.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace simsel {

enum class MergePolicy
{
  SimilarityOnly,
  DiversityOnly,
  Interleave
};

const char* to_string(MergePolicy policy);
MergePolicy parse_merge_policy(const std::string& text);

/// Everything one run of the command-line pipeline needs. Relative paths
/// read from a config file are resolved against that file's directory.
struct PipelineConfig
{
  std::string reference_manifest;
  std::string candidate_manifest;
  std::string label_table;
  std::string mask_summaries;
  // A JSON file, or one of the presets "open_images" / "cityscapes".
  std::string scoring_config = "open_images";
  std::string model_path; // defaults to <output_dir>/model.json
  std::string similarity_scores;
  std::string diversity_scores;

  FitConfig fit;
  SamplingMode sampling_mode = SamplingMode::PerCellSubsample;
  std::size_t sample_count = kDefaultSampleCount;
  bool standardize = false;
  std::uint64_t seed = 0;

  ScoreMode similarity_mode = ScoreMode::MaxOverCells;
  std::size_t histogram_bins = kDefaultHistogramBins;
  bool partial = false;
  bool export_vectors = false;
  bool score_reference = false;

  std::vector<std::size_t> selection_sizes{1000};
  MergePolicy merge_policy = MergePolicy::Interleave;
  std::vector<std::size_t> sweep_ks{5, 20, 50};

  std::string spec_a;
  std::string spec_b;

  std::string output_dir = "out";
  int workers = 0; // 0 = all cores

  std::string resolved_model_path() const;
  void validate_for(std::string_view command) const;
};

PipelineConfig parse_pipeline_config(std::string_view json_text, const std::string& base_dir = {});
PipelineConfig read_pipeline_config(const std::string& path);
std::string to_json(const PipelineConfig& config);

void cmd_fit(const PipelineConfig& config);
void cmd_score_similarity(const PipelineConfig& config);
void cmd_score_diversity(const PipelineConfig& config);
void cmd_select(const PipelineConfig& config);
void cmd_sweep_k(const PipelineConfig& config);
void cmd_synth(const PipelineConfig& config);

// Exit code for an error: 2 config/validation, 3 data, 4 numerical.
int exit_code_for(const std::exception& error);

// Entry point of the `simsel` tool; args exclude the program name.
int run_cli(const std::vector<std::string>& args);

} // namespace simsel
