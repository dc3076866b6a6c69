#include "simsel/similarity.hpp"

#include "parallel.hpp"
#include "simsel/csv.hpp"
#include "simsel/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace simsel {

const char* to_string(ScoreMode mode)
{
  return mode == ScoreMode::MaxOverCells ? "max" : "mean";
}

ScoreMode parse_score_mode(const std::string& text)
{
  if (text == "max" || text == "max_over_cells")
    return ScoreMode::MaxOverCells;
  if (text == "mean" || text == "mean_representation")
    return ScoreMode::MeanRepresentation;
  fail(ErrorKind::Validation, "unknown similarity mode '" + text + "' (expected max or mean)");
}

SimilarityScore similarity_score(const MixtureTerms& terms, const RepresentationGrid& grid,
                                 ScoreMode mode)
{
  grid.validate();
  if (grid.channels != terms.dim)
    fail(ErrorKind::Argument, "image '" + grid.image_id + "' has " + std::to_string(grid.channels) +
                                " channels, model expects " + std::to_string(terms.dim));
  SimilarityScore out{grid.image_id, 0.0, mode};
  if (mode == ScoreMode::MaxOverCells) {
    out.score = kernels::omp::max_log_pdf(terms, grid.values);
  } else {
    const auto mean = mean_representation(grid);
    double value = 0.0;
    kernels::serial::log_pdf_batch(terms, mean.vector, std::span<double>(&value, 1));
    out.score = value;
  }
  if (!std::isfinite(out.score))
    fail(ErrorKind::Numerical, "non-finite similarity score for image '" + grid.image_id + "'");
  return out;
}

SimilarityScore similarity_score(const GmmModel& model, const RepresentationGrid& grid,
                                 ScoreMode mode)
{
  return similarity_score(precompute(model), grid, mode);
}

DatasetScores score_dataset(const GmmModel& model, const DatasetManifest& manifest, ScoreMode mode,
                            bool partial)
{
  if (manifest.entries.empty())
    fail(ErrorKind::Validation, "manifest has no entries");
  const MixtureTerms terms = precompute(model);
  std::vector<SimilarityScore> slots(manifest.size());
  const auto errors = detail::parallel_for_collect(manifest.size(), [&](std::size_t i) {
    const auto& id = manifest.entries[i].image_id;
    try {
      slots[i] = similarity_score(terms, read_representation(manifest.resolve(i), id), mode);
    } catch (const Error& e) {
      throw Error(e.kind(), "image '" + id + "': " + e.what());
    }
  });

  DatasetScores out;
  if (!errors.empty() && !partial)
    throw Error(errors.front().kind, errors.front().message);
  std::size_t next_error = 0;
  out.scores.reserve(manifest.size() - errors.size());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (next_error < errors.size() && errors[next_error].index == i) {
      out.failures.push_back({manifest.entries[i].image_id, errors[next_error].message});
      ++next_error;
      continue;
    }
    out.scores.push_back(std::move(slots[i]));
  }
  return out;
}

LogProbHistogram histogram(std::span<const double> values, std::size_t bin_count,
                           std::string dataset_tag)
{
  if (values.empty())
    fail(ErrorKind::Argument, "cannot build a histogram of zero scores");
  if (bin_count < 1)
    fail(ErrorKind::Argument, "bin count must be positive");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (!std::isfinite(lo) || !std::isfinite(hi))
    fail(ErrorKind::Argument, "histogram input has non-finite scores");
  if (!(hi > lo)) {
    const double widen = std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lo));
    lo -= widen;
    hi += widen;
  }
  LogProbHistogram h;
  h.dataset_tag = std::move(dataset_tag);
  h.bin_edges.resize(bin_count + 1);
  const double width = (hi - lo) / static_cast<double>(bin_count);
  for (std::size_t b = 0; b < bin_count; ++b)
    h.bin_edges[b] = lo + width * static_cast<double>(b);
  h.bin_edges[bin_count] = hi;
  h.counts.assign(bin_count, 0);
  for (double v : values) {
    // Bins are [left, right) except the last, which also holds the maximum.
    auto it = std::upper_bound(h.bin_edges.begin(), h.bin_edges.end(), v);
    std::size_t b = static_cast<std::size_t>(it - h.bin_edges.begin());
    b = b == 0 ? 0 : b - 1;
    h.counts[std::min(b, bin_count - 1)] += 1;
  }
  return h;
}

LogProbHistogram histogram(std::span<const SimilarityScore> scores, std::size_t bin_count,
                           std::string dataset_tag)
{
  std::vector<double> values;
  values.reserve(scores.size());
  for (const auto& s : scores)
    values.push_back(s.score);
  return histogram(values, bin_count, std::move(dataset_tag));
}

std::string format_scores_csv(std::span<const SimilarityScore> scores)
{
  std::ostringstream out;
  csv::write_row(out, {"image_id", "score"});
  for (const auto& s : scores)
    csv::write_row(out, {s.image_id, csv::format_double(s.score)});
  return out.str();
}

std::vector<std::pair<std::string, double>> parse_scores_csv(std::string_view text)
{
  const csv::Table table = csv::parse(text);
  const int id_col = table.column("image_id");
  const int score_col = table.column("score");
  if (id_col < 0 || score_col < 0)
    fail(ErrorKind::Format, "scores file must have image_id,score columns");
  std::vector<std::pair<std::string, double>> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (static_cast<int>(row.size()) <= std::max(id_col, score_col))
      fail(ErrorKind::Format, "scores file line " + std::to_string(table.line_numbers[r]) +
                                ": too few fields");
    out.emplace_back(row[id_col], csv::parse_double(row[score_col]));
  }
  return out;
}

std::string format_histogram_csv(const LogProbHistogram& hist)
{
  std::ostringstream out;
  out << "# dataset_tag=" << hist.dataset_tag << '\n';
  csv::write_row(out, {"bin_left", "bin_right", "count"});
  for (std::size_t b = 0; b < hist.counts.size(); ++b)
    csv::write_row(out, {csv::format_double(hist.bin_edges[b]),
                         csv::format_double(hist.bin_edges[b + 1]), std::to_string(hist.counts[b])});
  return out.str();
}

LogProbHistogram parse_histogram_csv(std::string_view text)
{
  const csv::Table table = csv::parse(text);
  LogProbHistogram h;
  for (const auto& c : table.comments) {
    constexpr std::string_view key = " dataset_tag=";
    if (c.rfind(key, 0) == 0)
      h.dataset_tag = c.substr(key.size());
  }
  const int l = table.column("bin_left"), r = table.column("bin_right"), n = table.column("count");
  if (l < 0 || r < 0 || n < 0)
    fail(ErrorKind::Format, "histogram file must have bin_left,bin_right,count columns");
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const double left = csv::parse_double(row.at(l));
    if (i == 0)
      h.bin_edges.push_back(left);
    else if (left != h.bin_edges.back())
      fail(ErrorKind::Validation, "histogram bins are not contiguous");
    h.bin_edges.push_back(csv::parse_double(row.at(r)));
    const auto count = csv::parse_int(row.at(n));
    if (count < 0)
      fail(ErrorKind::Validation, "negative histogram count");
    h.counts.push_back(static_cast<std::size_t>(count));
  }
  for (std::size_t i = 1; i < h.bin_edges.size(); ++i) {
    if (!(h.bin_edges[i] > h.bin_edges[i - 1]))
      fail(ErrorKind::Validation, "histogram edges are not strictly ascending");
  }
  return h;
}

VectorExport export_mean_vectors(const DatasetManifest& manifest)
{
  const auto means = mean_representations(manifest);
  VectorExport out;
  out.vectors.image_id = "mean_vectors";
  out.vectors.height = static_cast<std::uint32_t>(means.size());
  out.vectors.width = 1;
  out.vectors.channels = static_cast<std::uint32_t>(means.front().vector.size());
  for (const auto& m : means) {
    out.image_ids.push_back(m.image_id);
    for (double v : m.vector)
      out.vectors.values.push_back(static_cast<float>(v));
  }
  return out;
}

void write_vector_export(const std::string& repr_path, const std::string& ids_path,
                         const VectorExport& exported)
{
  write_representation(repr_path, exported.vectors);
  std::ostringstream ids;
  csv::write_row(ids, {"row", "image_id"});
  for (std::size_t i = 0; i < exported.image_ids.size(); ++i)
    csv::write_row(ids, {std::to_string(i), exported.image_ids[i]});
  csv::write_text_file(ids_path, ids.str());
}

} // namespace simsel
