#include "simsel/pipeline.hpp"

#include "simsel/csv.hpp"
#include "simsel/diversity.hpp"
#include "simsel/error.hpp"
#include "simsel/rank.hpp"
#include "simsel/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <optional>
#include <unordered_map>
#include <iostream>
#include <set>
#include <sstream>

namespace simsel {

namespace fs = std::filesystem;

namespace {

void log(const std::string& message)
{
  std::cerr << "simsel: " << message << '\n';
}

std::string join_path(const std::string& dir, const std::string& name)
{
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    fail(ErrorKind::Io, "cannot create output directory '" + dir + "': " + ec.message());
}

std::string resolve_against(const std::string& base, const std::string& path)
{
  if (path.empty() || base.empty() || fs::path(path).is_absolute())
    return path;
  if (path == "open_images" || path == "cityscapes")
    return path;
  return (fs::path(base) / path).lexically_normal().string();
}

std::vector<std::size_t> parse_size_list(const std::string& text)
{
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty())
      continue;
    const auto v = csv::parse_int(item);
    if (v <= 0)
      fail(ErrorKind::Validation, "list entries must be positive integers, got '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

} // namespace

const char* to_string(MergePolicy policy)
{
  switch (policy) {
    case MergePolicy::SimilarityOnly: return "sim";
    case MergePolicy::DiversityOnly: return "div";
    case MergePolicy::Interleave: return "interleave";
  }
  return "interleave";
}

MergePolicy parse_merge_policy(const std::string& text)
{
  if (text == "sim" || text == "similarity")
    return MergePolicy::SimilarityOnly;
  if (text == "div" || text == "diversity")
    return MergePolicy::DiversityOnly;
  if (text == "interleave")
    return MergePolicy::Interleave;
  fail(ErrorKind::Validation, "unknown merge policy '" + text + "' (expected sim, div or interleave)");
}

std::string PipelineConfig::resolved_model_path() const
{
  return model_path.empty() ? join_path(output_dir, "model.json") : model_path;
}

void PipelineConfig::validate_for(std::string_view command) const
{
  auto require = [](const std::string& value, const char* what) {
    if (value.empty())
      fail(ErrorKind::Validation, std::string(what) + " is required");
  };
  require(output_dir, "output directory");
  if (workers < 0)
    fail(ErrorKind::Validation, "workers must be non-negative");
  if (command == "fit" || command == "sweep-k") {
    require(reference_manifest, "reference_manifest");
    fit.validate();
    if (sampling_mode == SamplingMode::PerCellSubsample && sample_count == 0)
      fail(ErrorKind::Validation, "sample count must be positive");
    if (command == "sweep-k" && sweep_ks.empty())
      fail(ErrorKind::Validation, "sweep_ks must list at least one component count");
  } else if (command == "score-sim") {
    require(candidate_manifest, "candidate_manifest");
    if (histogram_bins < 1)
      fail(ErrorKind::Validation, "histogram_bins must be positive");
  } else if (command == "score-div") {
    if (label_table.empty() && mask_summaries.empty())
      fail(ErrorKind::Validation, "label_table or mask_summaries is required");
  } else if (command == "select") {
    if (selection_sizes.empty())
      fail(ErrorKind::Validation, "selection_sizes must not be empty");
    for (std::size_t s : selection_sizes) {
      if (s == 0)
        fail(ErrorKind::Validation, "selection sizes must be positive");
      if (merge_policy == MergePolicy::Interleave && s % 2 != 0)
        fail(ErrorKind::Validation,
             "selection size " + std::to_string(s) +
               " is odd; interleaving takes half of the selection from each ranking");
    }
    const bool sim_source = !similarity_scores.empty() || !candidate_manifest.empty();
    const bool div_source = !diversity_scores.empty() || !label_table.empty() || !mask_summaries.empty();
    if (merge_policy != MergePolicy::DiversityOnly && !sim_source)
      fail(ErrorKind::Validation, "select needs similarity_scores or a model with candidate_manifest");
    if (merge_policy != MergePolicy::SimilarityOnly && !div_source)
      fail(ErrorKind::Validation, "select needs diversity_scores or a label table");
  } else if (command == "synth") {
    require(spec_a, "spec_a");
    require(spec_b, "spec_b");
  }
}

// ---------------------------------------------------------------- config file

PipelineConfig parse_pipeline_config(std::string_view json_text, const std::string& base_dir)
{
  static const std::set<std::string> known = {
    "reference_manifest", "candidate_manifest", "label_table", "mask_summaries", "scoring_config",
    "model",  "similarity_scores", "diversity_scores", "fit", "sampling", "seed", "similarity",
    "selection_sizes", "merge_policy", "sweep_ks", "output_dir", "workers", "synth"};
  PipelineConfig c;
  try {
    const auto j = nlohmann::json::parse(json_text);
    if (!j.is_object())
      fail(ErrorKind::Validation, "pipeline config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (!known.count(key))
        fail(ErrorKind::Validation, "unknown pipeline config key '" + key + "'");
    }
    auto path = [&](const char* key, std::string& out) {
      if (j.contains(key))
        out = resolve_against(base_dir, j[key].get<std::string>());
    };
    path("reference_manifest", c.reference_manifest);
    path("candidate_manifest", c.candidate_manifest);
    path("label_table", c.label_table);
    path("mask_summaries", c.mask_summaries);
    path("scoring_config", c.scoring_config);
    path("model", c.model_path);
    path("similarity_scores", c.similarity_scores);
    path("diversity_scores", c.diversity_scores);
    path("output_dir", c.output_dir);
    if (j.contains("fit")) {
      const auto& f = j["fit"];
      c.fit.k = f.value("k", c.fit.k);
      c.fit.covariance_type =
        parse_covariance_type(f.value("covariance_type", std::string(to_string(c.fit.covariance_type))));
      c.fit.tol_nats = f.value("tol_nats", c.fit.tol_nats);
      c.fit.max_iters = f.value("max_iters", c.fit.max_iters);
      c.fit.n_init = f.value("n_init", c.fit.n_init);
      c.fit.reg_covar = f.value("reg_covar", c.fit.reg_covar);
    }
    if (j.contains("sampling")) {
      const auto& s = j["sampling"];
      c.sampling_mode = parse_sampling_mode(s.value("mode", std::string(to_string(c.sampling_mode))));
      c.sample_count = s.value("count", c.sample_count);
      c.standardize = s.value("standardize", c.standardize);
    }
    c.seed = j.value("seed", c.seed);
    if (j.contains("similarity")) {
      const auto& s = j["similarity"];
      c.similarity_mode = parse_score_mode(s.value("mode", std::string(to_string(c.similarity_mode))));
      c.histogram_bins = s.value("histogram_bins", c.histogram_bins);
      c.partial = s.value("partial", c.partial);
      c.export_vectors = s.value("export_vectors", c.export_vectors);
      c.score_reference = s.value("score_reference", c.score_reference);
    }
    c.selection_sizes = j.value("selection_sizes", c.selection_sizes);
    if (j.contains("merge_policy"))
      c.merge_policy = parse_merge_policy(j["merge_policy"].get<std::string>());
    c.sweep_ks = j.value("sweep_ks", c.sweep_ks);
    c.workers = j.value("workers", c.workers);
    if (j.contains("synth")) {
      const auto& s = j["synth"];
      if (s.contains("spec_a"))
        c.spec_a = resolve_against(base_dir, s["spec_a"].get<std::string>());
      if (s.contains("spec_b"))
        c.spec_b = resolve_against(base_dir, s["spec_b"].get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Validation, std::string("malformed pipeline config: ") + e.what());
  }
  return c;
}

PipelineConfig read_pipeline_config(const std::string& path)
{
  if (!fs::exists(path))
    fail(ErrorKind::Validation, "config file not found: '" + path + "'");
  return parse_pipeline_config(csv::read_text_file(path), fs::path(path).parent_path().string());
}

std::string to_json(const PipelineConfig& c)
{
  nlohmann::ordered_json j;
  auto put = [&](const char* key, const std::string& v) {
    if (!v.empty())
      j[key] = v;
  };
  put("reference_manifest", c.reference_manifest);
  put("candidate_manifest", c.candidate_manifest);
  put("label_table", c.label_table);
  put("mask_summaries", c.mask_summaries);
  put("scoring_config", c.scoring_config);
  put("model", c.model_path);
  put("similarity_scores", c.similarity_scores);
  put("diversity_scores", c.diversity_scores);
  j["fit"] = {{"k", c.fit.k},
              {"covariance_type", to_string(c.fit.covariance_type)},
              {"tol_nats", c.fit.tol_nats},
              {"max_iters", c.fit.max_iters},
              {"n_init", c.fit.n_init},
              {"reg_covar", c.fit.reg_covar}};
  j["sampling"] = {{"mode", to_string(c.sampling_mode)},
                   {"count", c.sample_count},
                   {"standardize", c.standardize}};
  j["seed"] = c.seed;
  j["similarity"] = {{"mode", to_string(c.similarity_mode)},
                     {"histogram_bins", c.histogram_bins},
                     {"partial", c.partial},
                     {"export_vectors", c.export_vectors},
                     {"score_reference", c.score_reference}};
  j["selection_sizes"] = c.selection_sizes;
  j["merge_policy"] = to_string(c.merge_policy);
  j["sweep_ks"] = c.sweep_ks;
  j["output_dir"] = c.output_dir;
  j["workers"] = c.workers;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- commands

namespace {

SampleSet training_set(const PipelineConfig& c, Standardizer* standardizer)
{
  const DatasetManifest manifest = read_manifest(c.reference_manifest);
  SampleSet samples = build_sample_set(manifest, c.sampling_mode, c.sample_count, c.seed);
  log("built " + std::to_string(samples.count()) + " training samples of dim " +
      std::to_string(samples.dim) + " (" + to_string(c.sampling_mode) + ")");
  if (c.standardize) {
    *standardizer = fit_standardizer(samples);
    standardizer->apply(samples);
  }
  return samples;
}

FitConfig fit_config(const PipelineConfig& c)
{
  FitConfig f = c.fit;
  f.seed = c.seed;
  return f;
}

ScoringConfig load_scoring(const std::string& source)
{
  if (source == "open_images")
    return open_images_scoring();
  if (source == "cityscapes")
    return cityscapes_scoring();
  return read_scoring_config(source);
}

std::vector<BBoxRecord> load_boxes(const PipelineConfig& c)
{
  if (!c.label_table.empty())
    return read_bbox_table(c.label_table);
  std::vector<BBoxRecord> boxes;
  for (const auto& summary : read_mask_summaries(c.mask_summaries)) {
    auto b = bbox_from_mask(summary);
    boxes.insert(boxes.end(), b.begin(), b.end());
  }
  return boxes;
}

std::vector<DiversityScore> diversity_scores(const PipelineConfig& c)
{
  const ScoringConfig scoring = load_scoring(c.scoring_config);
  const auto boxes = load_boxes(c);
  auto scores = score_label_table(boxes, scoring);
  if (!c.candidate_manifest.empty())
    scores = join_with_manifest(scores, read_manifest(c.candidate_manifest));
  return scores;
}

Ranking similarity_ranking(const PipelineConfig& c)
{
  if (!c.similarity_scores.empty())
    return make_ranking(parse_scores_csv(csv::read_text_file(c.similarity_scores)), "similarity");
  const GmmModel model = read_model(c.resolved_model_path());
  const auto result = score_dataset(model, read_manifest(c.candidate_manifest), c.similarity_mode);
  std::vector<std::pair<std::string, double>> pairs;
  for (const auto& s : result.scores)
    pairs.emplace_back(s.image_id, s.score);
  return make_ranking(pairs, "similarity");
}

Ranking diversity_ranking(const PipelineConfig& c)
{
  std::vector<std::pair<std::string, double>> pairs;
  if (!c.diversity_scores.empty()) {
    for (const auto& s : parse_diversity_csv(csv::read_text_file(c.diversity_scores)))
      pairs.emplace_back(s.image_id, s.score);
  } else {
    for (const auto& s : diversity_scores(c))
      pairs.emplace_back(s.image_id, s.score);
  }
  return make_ranking(pairs, "diversity");
}

void write_scores_and_histogram(const PipelineConfig& c, const DatasetManifest& manifest,
                                const GmmModel& model, const std::string& prefix,
                                const std::string& tag)
{
  const auto result = score_dataset(model, manifest, c.similarity_mode, c.partial);
  csv::write_text_file(join_path(c.output_dir, prefix + "_scores.csv"),
                       format_scores_csv(result.scores));
  if (!result.failures.empty()) {
    std::ostringstream out;
    csv::write_row(out, {"image_id", "error"});
    for (const auto& f : result.failures)
      csv::write_row(out, {f.image_id, f.message});
    csv::write_text_file(join_path(c.output_dir, prefix + "_failures.csv"), out.str());
    log(std::to_string(result.failures.size()) + " images of " + tag + " could not be scored");
  }
  if (result.scores.empty())
    fail(ErrorKind::Data, "no image of " + tag + " could be scored");
  csv::write_text_file(join_path(c.output_dir, prefix + "_histogram.csv"),
                       format_histogram_csv(histogram(result.scores, c.histogram_bins, tag)));
  log("scored " + std::to_string(result.scores.size()) + " images of " + tag);
}

} // namespace

void cmd_fit(const PipelineConfig& c)
{
  c.validate_for("fit");
  ensure_dir(c.output_dir);
  Standardizer standardizer;
  const SampleSet samples = training_set(c, &standardizer);
  GmmModel model = fit(samples, fit_config(c));
  if (c.standardize)
    model = unstandardize(model, standardizer);
  const auto& meta = model.fit_meta;
  log("fit k=" + std::to_string(model.k) + " in " + std::to_string(meta.iterations) +
      " iterations, mean log-likelihood " + csv::format_double(meta.final_mean_log_likelihood) +
      (meta.converged ? " (converged)" : " (not converged)"));
  write_model(c.resolved_model_path(), model);
}

void cmd_score_similarity(const PipelineConfig& c)
{
  c.validate_for("score-sim");
  ensure_dir(c.output_dir);
  const GmmModel model = read_model(c.resolved_model_path());
  const DatasetManifest candidates = read_manifest(c.candidate_manifest);
  write_scores_and_histogram(c, candidates, model, "similarity", "candidates");
  if (c.score_reference && !c.reference_manifest.empty())
    write_scores_and_histogram(c, read_manifest(c.reference_manifest), model, "reference", "reference");
  if (c.export_vectors)
    write_vector_export(join_path(c.output_dir, "mean_vectors.repr"),
                        join_path(c.output_dir, "mean_vectors_ids.csv"),
                        export_mean_vectors(candidates));
}

void cmd_score_diversity(const PipelineConfig& c)
{
  c.validate_for("score-div");
  ensure_dir(c.output_dir);
  const auto scores = diversity_scores(c);
  csv::write_text_file(join_path(c.output_dir, "diversity_scores.csv"), format_diversity_csv(scores));
  log("scored " + std::to_string(scores.size()) + " images by object diversity");
}

void cmd_select(const PipelineConfig& c)
{
  c.validate_for("select");
  ensure_dir(c.output_dir);
  const bool want_sim = c.merge_policy != MergePolicy::DiversityOnly;
  const bool want_div = c.merge_policy != MergePolicy::SimilarityOnly;
  Ranking sim, div;
  if (want_sim) {
    sim = similarity_ranking(c);
    csv::write_text_file(join_path(c.output_dir, "ranking_similarity.csv"), format_ranking_csv(sim));
  }
  if (want_div) {
    div = diversity_ranking(c);
    csv::write_text_file(join_path(c.output_dir, "ranking_diversity.csv"), format_ranking_csv(div));
  }

  std::optional<DatasetManifest> manifest;
  if (!c.candidate_manifest.empty())
    manifest = read_manifest(c.candidate_manifest);
  std::unordered_map<std::string, std::size_t> index;
  if (manifest) {
    for (std::size_t i = 0; i < manifest->size(); ++i)
      index.emplace(manifest->entries[i].image_id, i);
  }

  const std::string policy = to_string(c.merge_policy);
  for (std::size_t s : c.selection_sizes) {
    Ranking selected;
    switch (c.merge_policy) {
      case MergePolicy::SimilarityOnly: selected = top_k(sim, s); break;
      case MergePolicy::DiversityOnly: selected = top_k(div, s); break;
      case MergePolicy::Interleave: selected = interleave(sim, div, s); break;
    }
    if (selected.size() < s)
      log("selection of size " + std::to_string(s) + " holds only " +
          std::to_string(selected.size()) + " images");
    const std::string stem = "selection_" + policy + "_" + std::to_string(s);
    csv::write_text_file(join_path(c.output_dir, stem + ".csv"), format_ranking_csv(selected));
    if (manifest) {
      DatasetManifest subset;
      for (const auto& item : selected.items) {
        const auto it = index.find(item.image_id);
        if (it == index.end())
          fail(ErrorKind::Data, "selected image '" + item.image_id + "' is not in the candidate manifest");
        ManifestEntry e = manifest->entries[it->second];
        e.feature_path = fs::absolute(manifest->resolve(it->second)).lexically_normal().string();
        subset.entries.push_back(std::move(e));
      }
      write_manifest(join_path(c.output_dir, stem + "_manifest.csv"), subset);
    }
  }

  if (want_sim && want_div) {
    std::vector<std::size_t> even;
    for (std::size_t s : c.selection_sizes) {
      if (s % 2 == 0)
        even.push_back(s);
      else
        log("overlap skipped for odd selection size " + std::to_string(s));
    }
    const OverlapReport report = overlap(sim, div, even);
    for (const auto& w : report.warnings)
      log(w);
    csv::write_text_file(join_path(c.output_dir, "overlap.csv"), format_overlap_csv(report));
  }
}

void cmd_sweep_k(const PipelineConfig& c)
{
  c.validate_for("sweep-k");
  ensure_dir(c.output_dir);
  Standardizer standardizer;
  const SampleSet samples = training_set(c, &standardizer);
  const auto results = sweep_components(samples, c.sweep_ks, fit_config(c));
  std::ostringstream out;
  csv::write_row(out, {"k", "bic", "mean_log_likelihood", "iterations", "converged"});
  for (const auto& r : results) {
    csv::write_row(out, {std::to_string(r.k), csv::format_double(r.bic),
                         csv::format_double(r.model.fit_meta.final_mean_log_likelihood),
                         std::to_string(r.model.fit_meta.iterations),
                         r.model.fit_meta.converged ? "1" : "0"});
    const GmmModel model = c.standardize ? unstandardize(r.model, standardizer) : r.model;
    write_model(join_path(c.output_dir, "model_k" + std::to_string(r.k) + ".json"), model);
    log("k=" + std::to_string(r.k) + " bic=" + csv::format_double(r.bic));
  }
  csv::write_text_file(join_path(c.output_dir, "bic_sweep.csv"), out.str());
}

void cmd_synth(const PipelineConfig& c)
{
  c.validate_for("synth");
  ensure_dir(c.output_dir);
  const SynthSpec a = read_synth_spec(c.spec_a);
  const SynthSpec b = read_synth_spec(c.spec_b);
  const fs::path out(c.output_dir);
  const DomainPair pair = generate_domain_pair(a, b, out);
  csv::write_text_file((out / "reference" / "labels.csv").string(),
                       format_bbox_table(generate_labels(a, pair.reference)));
  csv::write_text_file((out / "candidates" / "labels.csv").string(),
                       format_bbox_table(generate_labels(b, pair.candidates)));

  PipelineConfig next = c;
  next.reference_manifest = "reference/manifest.csv";
  next.candidate_manifest = "candidates/manifest.csv";
  next.label_table = "candidates/labels.csv";
  next.mask_summaries.clear();
  next.model_path.clear();
  next.similarity_scores.clear();
  next.diversity_scores.clear();
  next.output_dir = "results";
  csv::write_text_file((out / "pipeline.json").string(), to_json(next));
  log("wrote " + std::to_string(pair.reference.size()) + " reference and " +
      std::to_string(pair.candidates.size()) + " candidate images to " + c.output_dir);
}

// ---------------------------------------------------------------- CLI

int exit_code_for(const std::exception& error)
{
  if (const auto* e = dynamic_cast<const Error*>(&error)) {
    switch (e->kind()) {
      case ErrorKind::Validation:
      case ErrorKind::Argument: return 2;
      case ErrorKind::Format:
      case ErrorKind::Truncation:
      case ErrorKind::Data:
      case ErrorKind::Io: return 3;
      case ErrorKind::Numerical: return 4;
    }
  }
  return 3;
}

namespace {

struct Overrides
{
  std::string config;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string mode;
  std::size_t k = 0;
  double tol = 0.0;
  std::string sizes;
  std::string policy;
  std::string out;
  std::string reference, candidates, labels, masks, scoring, model, sim_scores, div_scores;
  std::size_t samples = 0;
  std::string sampling;
  std::string covariance;
  int max_iters = 0;
  int n_init = 0;
  double reg_covar = 0.0;
  std::size_t bins = 0;
  std::string ks;
  std::string spec_a, spec_b;
  bool standardize = false, partial = false, export_vectors = false, score_reference = false;
};

void add_options(CLI::App* cmd, Overrides& o)
{
  cmd->add_option("--config", o.config, "Pipeline config JSON");
  cmd->add_option("--seed", o.seed, "Seed for sampling and EM initialization");
  cmd->add_option("--workers", o.workers, "Worker threads (0 = all cores)");
  cmd->add_option("--mode", o.mode, "Similarity mode: max|mean");
  cmd->add_option("--k", o.k, "GMM component count");
  cmd->add_option("--tol", o.tol, "EM stopping tolerance in nats per sample");
  cmd->add_option("--sizes", o.sizes, "Selection sizes, comma separated");
  cmd->add_option("--policy", o.policy, "Merge policy: sim|div|interleave");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--reference", o.reference, "Reference dataset manifest");
  cmd->add_option("--candidates", o.candidates, "Candidate pool manifest");
  cmd->add_option("--labels", o.labels, "Bounding-box label table");
  cmd->add_option("--masks", o.masks, "Instance-mask summaries (JSON lines)");
  cmd->add_option("--scoring", o.scoring, "Scoring config JSON or preset");
  cmd->add_option("--model", o.model, "Model JSON path");
  cmd->add_option("--sim-scores", o.sim_scores, "Precomputed similarity scores CSV");
  cmd->add_option("--div-scores", o.div_scores, "Precomputed diversity scores CSV");
  cmd->add_option("--samples", o.samples, "Number of subsampled cells");
  cmd->add_option("--sampling", o.sampling, "Sampling mode: per_cell_subsample|per_image_mean");
  cmd->add_option("--covariance", o.covariance, "Covariance: spherical|diagonal|full");
  cmd->add_option("--max-iters", o.max_iters, "EM iteration cap");
  cmd->add_option("--n-init", o.n_init, "EM restarts");
  cmd->add_option("--reg-covar", o.reg_covar, "Variance floor");
  cmd->add_option("--bins", o.bins, "Histogram bin count");
  cmd->add_option("--ks", o.ks, "Component counts for sweep-k, comma separated");
  cmd->add_option("--spec-a", o.spec_a, "Synthetic spec of the reference domain");
  cmd->add_option("--spec-b", o.spec_b, "Synthetic spec of the candidate domain");
  cmd->add_flag("--standardize", o.standardize, "Standardize features before EM");
  cmd->add_flag("--partial", o.partial, "Skip unreadable images instead of failing");
  cmd->add_flag("--export-vectors", o.export_vectors, "Export mean vectors of the candidates");
  cmd->add_flag("--score-reference", o.score_reference, "Also score the reference dataset");
}

PipelineConfig resolve_config(const CLI::App* cmd, const Overrides& o)
{
  PipelineConfig c = o.config.empty() ? PipelineConfig{} : read_pipeline_config(o.config);
  auto given = [cmd](const char* name) { return cmd->get_option(name)->count() > 0; };
  if (given("--seed")) c.seed = o.seed;
  if (given("--workers")) c.workers = o.workers;
  if (given("--mode")) c.similarity_mode = parse_score_mode(o.mode);
  if (given("--k")) c.fit.k = o.k;
  if (given("--tol")) c.fit.tol_nats = o.tol;
  if (given("--sizes")) c.selection_sizes = parse_size_list(o.sizes);
  if (given("--policy")) c.merge_policy = parse_merge_policy(o.policy);
  if (given("--out")) c.output_dir = o.out;
  if (given("--reference")) c.reference_manifest = o.reference;
  if (given("--candidates")) c.candidate_manifest = o.candidates;
  if (given("--labels")) c.label_table = o.labels;
  if (given("--masks")) c.mask_summaries = o.masks;
  if (given("--scoring")) c.scoring_config = o.scoring;
  if (given("--model")) c.model_path = o.model;
  if (given("--sim-scores")) c.similarity_scores = o.sim_scores;
  if (given("--div-scores")) c.diversity_scores = o.div_scores;
  if (given("--samples")) c.sample_count = o.samples;
  if (given("--sampling")) c.sampling_mode = parse_sampling_mode(o.sampling);
  if (given("--covariance")) c.fit.covariance_type = parse_covariance_type(o.covariance);
  if (given("--max-iters")) c.fit.max_iters = o.max_iters;
  if (given("--n-init")) c.fit.n_init = o.n_init;
  if (given("--reg-covar")) c.fit.reg_covar = o.reg_covar;
  if (given("--bins")) c.histogram_bins = o.bins;
  if (given("--ks")) c.sweep_ks = parse_size_list(o.ks);
  if (given("--spec-a")) c.spec_a = o.spec_a;
  if (given("--spec-b")) c.spec_b = o.spec_b;
  if (o.standardize) c.standardize = true;
  if (o.partial) c.partial = true;
  if (o.export_vectors) c.export_vectors = true;
  if (o.score_reference) c.score_reference = true;
  return c;
}

} // namespace

int run_cli(const std::vector<std::string>& args)
{
  CLI::App app{"Rank a candidate image pool by visual similarity and object diversity", "simsel"};
  app.require_subcommand(1);
  Overrides o;
  using Command = void (*)(const PipelineConfig&);
  const std::pair<const char*, Command> commands[] = {
    {"fit", cmd_fit},
    {"score-sim", cmd_score_similarity},
    {"score-div", cmd_score_diversity},
    {"select", cmd_select},
    {"sweep-k", cmd_sweep_k},
    {"synth", cmd_synth},
  };
  const char* help[] = {
    "Fit the reference-domain GMM",
    "Score candidates by log-density under the GMM",
    "Score candidates by weighted object counts",
    "Rank, merge and select candidates",
    "Fit several component counts and report BIC",
    "Generate a synthetic reference/candidate pair",
  };
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    auto* sub = app.add_subcommand(commands[i].first, help[i]);
    add_options(sub, o);
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, std::cout, std::cerr);
    return code == 0 ? 0 : 2;
  }

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed())
        continue;
      const PipelineConfig config = resolve_config(subs[i], o);
      kernels::set_workers(config.workers);
      commands[i].second(config);
    }
  } catch (const std::exception& e) {
    std::cerr << "simsel: error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}

} // namespace simsel
