#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace simsel {

struct RankedItem
{
  std::string image_id;
  double score = 0.0;

  bool operator==(const RankedItem&) const = default;
};

/// Items sorted by descending score, ties by ascending image id; ids unique.
struct Ranking
{
  std::vector<RankedItem> items;
  std::string method_tag;

  std::size_t size() const { return items.size(); }
  void validate() const;
};

Ranking make_ranking(std::span<const std::pair<std::string, double>> scores, std::string method_tag);

Ranking top_k(const Ranking& ranking, std::size_t k);

// Alternately takes the next unselected item of `first` then `second`,
// skipping ids already selected, until k items or both are exhausted.
Ranking interleave(const Ranking& first, const Ranking& second, std::size_t k);

struct OverlapRow
{
  std::size_t selection_size = 0;
  std::size_t common_count = 0;
  double percentage = 0.0;
};

struct OverlapReport
{
  std::vector<OverlapRow> rows;
  std::vector<std::string> warnings;
};

// For each even size s: |top(s/2, first) n top(s/2, second)| and its share of s.
OverlapReport overlap(const Ranking& first, const Ranking& second,
                      std::span<const std::size_t> sizes);

std::string format_ranking_csv(const Ranking& ranking);
Ranking parse_ranking_csv(std::string_view text);

std::string format_overlap_csv(const OverlapReport& report);
OverlapReport parse_overlap_csv(std::string_view text);

} // namespace simsel
