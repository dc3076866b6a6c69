#include "simsel/diversity.hpp"

#include "parallel.hpp"
#include "simsel/csv.hpp"
#include "simsel/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace simsel {

void ScoringConfig::validate() const
{
  std::set<std::string> names;
  std::set<std::string> classes;
  bool any_positive = false;
  for (const auto& c : categories) {
    if (c.name.empty())
      fail(ErrorKind::Validation, "scoring category with an empty name");
    if (!names.insert(c.name).second)
      fail(ErrorKind::Validation, "duplicate scoring category '" + c.name + "'");
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight))
      fail(ErrorKind::Validation, "category '" + c.name + "' has a negative or non-finite weight");
    any_positive = any_positive || c.weight > 0.0;
    for (const auto& cls : c.classes) {
      if (!classes.insert(cls).second)
        fail(ErrorKind::Validation, "class '" + cls + "' appears in more than one category");
    }
  }
  if (!any_positive)
    fail(ErrorKind::Validation, "scoring config needs at least one category with positive weight");
}

int ScoringConfig::category_of(const std::string& class_name) const
{
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i].classes.count(class_name))
      return static_cast<int>(i);
  }
  return -1;
}

namespace {

const std::set<std::string> kTrafficObjects = {"traffic sign", "traffic light"};
const std::set<std::string> kVehicles = {"car", "truck", "bus", "motorcycle", "bicycle", "train"};
const std::set<std::string> kHumans = {"pedestrian", "person", "rider"};

} // namespace

ScoringConfig open_images_scoring()
{
  return {{{"traffic_objects", kTrafficObjects, 100.0},
           {"vehicles", kVehicles, 10.0},
           {"humans", kHumans, 1.0}},
          UnknownClassPolicy::Ignore};
}

ScoringConfig cityscapes_scoring()
{
  return {{{"vehicles", kVehicles, 10.0}, {"humans", kHumans, 1.0}}, UnknownClassPolicy::Ignore};
}

ScoringConfig parse_scoring_config(std::string_view json_text)
{
  ScoringConfig config;
  try {
    const auto j = nlohmann::json::parse(json_text);
    for (const auto& c : j.at("categories")) {
      ScoreCategory cat;
      cat.name = c.at("name").get<std::string>();
      for (const auto& cls : c.at("classes")) {
        if (!cat.classes.insert(cls.get<std::string>()).second)
          fail(ErrorKind::Validation, "class listed twice in category '" + cat.name + "'");
      }
      cat.weight = c.at("weight").get<double>();
      config.categories.push_back(std::move(cat));
    }
    const std::string policy = j.value("unknown_class_policy", std::string("ignore"));
    if (policy == "ignore")
      config.unknown_class_policy = UnknownClassPolicy::Ignore;
    else if (policy == "error")
      config.unknown_class_policy = UnknownClassPolicy::Error;
    else
      fail(ErrorKind::Validation, "unknown_class_policy must be 'ignore' or 'error'");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed scoring config: ") + e.what());
  }
  config.validate();
  return config;
}

ScoringConfig read_scoring_config(const std::string& path)
{
  return parse_scoring_config(csv::read_text_file(path));
}

std::string to_json(const ScoringConfig& config)
{
  nlohmann::ordered_json j;
  j["categories"] = nlohmann::ordered_json::array();
  for (const auto& c : config.categories) {
    nlohmann::ordered_json cat;
    cat["name"] = c.name;
    cat["classes"] = std::vector<std::string>(c.classes.begin(), c.classes.end());
    cat["weight"] = c.weight;
    j["categories"].push_back(std::move(cat));
  }
  j["unknown_class_policy"] =
    config.unknown_class_policy == UnknownClassPolicy::Ignore ? "ignore" : "error";
  return j.dump(2) + "\n";
}

DiversityScore diversity_score(std::span<const BBoxRecord> boxes, const ScoringConfig& config,
                               std::string image_id)
{
  if (image_id.empty() && !boxes.empty())
    image_id = boxes.front().image_id;
  // Per-category counts, so the score does not depend on box order.
  std::vector<std::size_t> counts(config.categories.size(), 0);
  for (const auto& box : boxes) {
    if (box.image_id != image_id)
      fail(ErrorKind::Argument, "boxes for '" + box.image_id + "' mixed into image '" + image_id + "'");
    const int cat = config.category_of(box.class_name);
    if (cat < 0) {
      if (config.unknown_class_policy == UnknownClassPolicy::Error)
        fail(ErrorKind::Validation, "unknown class '" + box.class_name + "' in image '" + image_id + "'");
      continue;
    }
    ++counts[static_cast<std::size_t>(cat)];
  }
  DiversityScore out{std::move(image_id), 0.0, 0};
  for (std::size_t c = 0; c < counts.size(); ++c) {
    out.score += static_cast<double>(counts[c]) * config.categories[c].weight;
    out.object_count += counts[c];
  }
  return out;
}

std::vector<DiversityScore> score_label_table(std::span<const BBoxRecord> records,
                                              const ScoringConfig& config)
{
  // Group row indices per image, ordered by image id.
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i)
    groups[records[i].image_id].push_back(i);
  std::vector<const std::pair<const std::string, std::vector<std::size_t>>*> order;
  order.reserve(groups.size());
  for (const auto& g : groups)
    order.push_back(&g);

  std::vector<DiversityScore> out(order.size());
  detail::parallel_for(order.size(), [&](std::size_t g) {
    std::vector<BBoxRecord> boxes;
    boxes.reserve(order[g]->second.size());
    for (std::size_t i : order[g]->second)
      boxes.push_back(records[i]);
    out[g] = diversity_score(boxes, config, order[g]->first);
  });
  return out;
}

std::vector<DiversityScore> join_with_manifest(std::span<const DiversityScore> scores,
                                               const DatasetManifest& manifest)
{
  std::unordered_map<std::string, const DiversityScore*> by_id;
  for (const auto& s : scores)
    by_id.emplace(s.image_id, &s);
  std::vector<DiversityScore> out;
  out.reserve(manifest.size());
  for (const auto& e : manifest.entries) {
    const auto it = by_id.find(e.image_id);
    if (it == by_id.end())
      out.push_back({e.image_id, 0.0, 0});
    else
      out.push_back(*it->second);
  }
  return out;
}

std::string format_diversity_csv(std::span<const DiversityScore> scores)
{
  std::ostringstream out;
  csv::write_row(out, {"image_id", "score", "object_count"});
  for (const auto& s : scores)
    csv::write_row(out, {s.image_id, csv::format_double(s.score), std::to_string(s.object_count)});
  return out.str();
}

std::vector<DiversityScore> parse_diversity_csv(std::string_view text)
{
  const csv::Table table = csv::parse(text);
  const int id = table.column("image_id"), score = table.column("score"),
            count = table.column("object_count");
  if (id < 0 || score < 0 || count < 0)
    fail(ErrorKind::Format, "diversity file must have image_id,score,object_count columns");
  std::vector<DiversityScore> out;
  for (const auto& row : table.rows) {
    const auto n = csv::parse_int(row.at(count));
    if (n < 0)
      fail(ErrorKind::Validation, "negative object count");
    out.push_back({row.at(id), csv::parse_double(row.at(score)), static_cast<std::size_t>(n)});
  }
  return out;
}

} // namespace simsel
