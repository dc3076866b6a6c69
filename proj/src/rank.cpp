#include "simsel/rank.hpp"

#include "simsel/csv.hpp"
#include "simsel/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace simsel {

namespace {

bool ranks_before(const RankedItem& a, const RankedItem& b)
{
  if (a.score != b.score)
    return a.score > b.score;
  return a.image_id < b.image_id;
}

} // namespace

void Ranking::validate() const
{
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!std::isfinite(items[i].score))
      fail(ErrorKind::Validation, "ranking has a non-finite score for '" + items[i].image_id + "'");
    if (!seen.insert(items[i].image_id).second)
      fail(ErrorKind::Validation, "ranking has duplicate image_id '" + items[i].image_id + "'");
    if (i > 0 && !ranks_before(items[i - 1], items[i]))
      fail(ErrorKind::Validation, "ranking is not sorted at position " + std::to_string(i + 1));
  }
}

Ranking make_ranking(std::span<const std::pair<std::string, double>> scores, std::string method_tag)
{
  Ranking r;
  r.method_tag = std::move(method_tag);
  r.items.reserve(scores.size());
  std::unordered_set<std::string> seen;
  for (const auto& [id, score] : scores) {
    if (!seen.insert(id).second)
      fail(ErrorKind::Validation, "duplicate image_id '" + id + "' in scores");
    if (!std::isfinite(score))
      fail(ErrorKind::Validation, "non-finite score for '" + id + "'");
    r.items.push_back({id, score});
  }
  std::sort(r.items.begin(), r.items.end(), ranks_before);
  return r;
}

Ranking top_k(const Ranking& ranking, std::size_t k)
{
  Ranking out;
  out.method_tag = ranking.method_tag;
  const std::size_t n = std::min(k, ranking.items.size());
  out.items.assign(ranking.items.begin(), ranking.items.begin() + n);
  return out;
}

Ranking interleave(const Ranking& first, const Ranking& second, std::size_t k)
{
  Ranking out;
  out.method_tag = "interleave(" + first.method_tag + "," + second.method_tag + ")";
  std::unordered_set<std::string> taken;
  std::size_t pos[2] = {0, 0};
  const Ranking* src[2] = {&first, &second};
  std::size_t turn = 0;
  while (out.items.size() < k) {
    bool progressed = false;
    for (std::size_t attempt = 0; attempt < 2 && !progressed; ++attempt) {
      const std::size_t s = (turn + attempt) % 2;
      const auto& items = src[s]->items;
      while (pos[s] < items.size() && taken.count(items[pos[s]].image_id))
        ++pos[s];
      if (pos[s] < items.size()) {
        taken.insert(items[pos[s]].image_id);
        out.items.push_back(items[pos[s]]);
        ++pos[s];
        progressed = true;
        turn = s + 1;
      }
    }
    if (!progressed)
      break;
  }
  return out;
}

OverlapReport overlap(const Ranking& first, const Ranking& second,
                      std::span<const std::size_t> sizes)
{
  OverlapReport report;
  const std::size_t available = std::min(first.size(), second.size());
  for (std::size_t s : sizes) {
    if (s == 0)
      fail(ErrorKind::Argument, "selection size must be positive");
    if (s % 2 != 0)
      fail(ErrorKind::Argument, "selection size " + std::to_string(s) +
                                  " is odd; each method must contribute half of the selection");
    const std::size_t half = s / 2;
    if (half > available)
      report.warnings.push_back("selection size " + std::to_string(s) + " exceeds ranking length; " +
                                "prefixes clipped to " + std::to_string(available));
    std::unordered_set<std::string> head;
    for (std::size_t i = 0; i < std::min(half, first.size()); ++i)
      head.insert(first.items[i].image_id);
    std::size_t common = 0;
    for (std::size_t i = 0; i < std::min(half, second.size()); ++i)
      common += head.count(second.items[i].image_id);
    report.rows.push_back({s, common, 100.0 * static_cast<double>(common) / static_cast<double>(s)});
  }
  return report;
}

std::string format_ranking_csv(const Ranking& ranking)
{
  std::ostringstream out;
  csv::write_row(out, {"rank", "image_id", "score", "method_tag"});
  for (std::size_t i = 0; i < ranking.items.size(); ++i)
    csv::write_row(out, {std::to_string(i + 1), ranking.items[i].image_id,
                         csv::format_double(ranking.items[i].score), ranking.method_tag});
  return out.str();
}

Ranking parse_ranking_csv(std::string_view text)
{
  const csv::Table table = csv::parse(text);
  const int rank = table.column("rank"), id = table.column("image_id"),
            score = table.column("score"), tag = table.column("method_tag");
  if (rank < 0 || id < 0 || score < 0 || tag < 0)
    fail(ErrorKind::Format, "ranking file must have rank,image_id,score,method_tag columns");
  Ranking r;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (csv::parse_int(row.at(rank)) != static_cast<std::int64_t>(i + 1))
      fail(ErrorKind::Validation, "ranking rows are not numbered 1..n");
    if (i == 0)
      r.method_tag = row.at(tag);
    else if (row.at(tag) != r.method_tag)
      fail(ErrorKind::Validation, "ranking mixes method tags");
    r.items.push_back({row.at(id), csv::parse_double(row.at(score))});
  }
  return r;
}

std::string format_overlap_csv(const OverlapReport& report)
{
  std::ostringstream out;
  csv::write_row(out, {"selection_size", "common_count", "percentage"});
  for (const auto& row : report.rows)
    csv::write_row(out, {std::to_string(row.selection_size), std::to_string(row.common_count),
                         csv::format_double(row.percentage)});
  return out.str();
}

OverlapReport parse_overlap_csv(std::string_view text)
{
  const csv::Table table = csv::parse(text);
  const int s = table.column("selection_size"), c = table.column("common_count"),
            p = table.column("percentage");
  if (s < 0 || c < 0 || p < 0)
    fail(ErrorKind::Format, "overlap file must have selection_size,common_count,percentage columns");
  OverlapReport report;
  for (const auto& row : table.rows) {
    const auto size = csv::parse_int(row.at(s));
    const auto common = csv::parse_int(row.at(c));
    if (size <= 0 || common < 0 || common > size)
      fail(ErrorKind::Validation, "overlap row violates 0 <= common <= size");
    report.rows.push_back({static_cast<std::size_t>(size), static_cast<std::size_t>(common),
                           csv::parse_double(row.at(p))});
  }
  return report;
}

} // namespace simsel
