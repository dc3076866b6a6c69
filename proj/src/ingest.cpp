#include "simsel/ingest.hpp"

#include "simsel/csv.hpp"
#include "simsel/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace simsel {

namespace fs = std::filesystem;

void RepresentationGrid::validate() const
{
  if (height < 1 || width < 1 || channels < 1)
    fail(ErrorKind::Validation, "representation '" + image_id + "' has a zero dimension");
  if (values.size() != cell_count() * channels)
    fail(ErrorKind::Truncation, "representation '" + image_id + "' holds " +
                                  std::to_string(values.size()) + " values, expected " +
                                  std::to_string(cell_count() * channels));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      fail(ErrorKind::Data, "representation '" + image_id + "' has a non-finite value at index " +
                              std::to_string(i));
  }
}

namespace {

void put_u32(std::string& out, std::uint32_t v)
{
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t offset)
{
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= std::uint32_t(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  return v;
}

ReprHeader decode_header(std::string_view bytes, const std::string& what)
{
  if (bytes.size() < kReprHeaderBytes)
    fail(ErrorKind::Format, what + ": file too short for a REPR header");
  if (bytes.substr(0, 4) != "REPR")
    fail(ErrorKind::Format, what + ": bad magic, expected 'REPR'");
  ReprHeader header;
  header.version = get_u32(bytes, 4);
  if (header.version != kReprVersion)
    fail(ErrorKind::Format, what + ": unsupported REPR version " + std::to_string(header.version));
  header.height = get_u32(bytes, 8);
  header.width = get_u32(bytes, 12);
  header.channels = get_u32(bytes, 16);
  if (header.height < 1 || header.width < 1 || header.channels < 1)
    fail(ErrorKind::Format, what + ": zero dimension in REPR header");
  return header;
}

} // namespace

std::string encode_representation(const RepresentationGrid& grid)
{
  grid.validate();
  std::string out;
  out.reserve(kReprHeaderBytes + grid.values.size() * 4);
  out.append("REPR");
  put_u32(out, kReprVersion);
  put_u32(out, grid.height);
  put_u32(out, grid.width);
  put_u32(out, grid.channels);
  for (float v : grid.values)
    put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

RepresentationGrid decode_representation(std::string_view bytes, std::string image_id)
{
  const std::string what = image_id.empty() ? std::string("representation") : "'" + image_id + "'";
  const ReprHeader header = decode_header(bytes, what);
  const std::size_t count = header.cell_count() * header.channels;
  const std::size_t payload = bytes.size() - kReprHeaderBytes;
  if (payload != count * 4)
    fail(ErrorKind::Truncation, what + ": header declares " + std::to_string(count) +
                                  " floats but payload holds " + std::to_string(payload) + " bytes");
  RepresentationGrid grid;
  grid.image_id = std::move(image_id);
  grid.height = header.height;
  grid.width = header.width;
  grid.channels = header.channels;
  grid.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const float v = std::bit_cast<float>(get_u32(bytes, kReprHeaderBytes + 4 * i));
    if (!std::isfinite(v))
      fail(ErrorKind::Data, what + ": non-finite value at index " + std::to_string(i));
    grid.values[i] = v;
  }
  return grid;
}

RepresentationGrid read_representation(const fs::path& path, std::string image_id)
{
  if (image_id.empty())
    image_id = path.stem().string();
  std::string bytes;
  try {
    bytes = csv::read_text_file(path.string());
  } catch (const Error&) {
    fail(ErrorKind::Io, "cannot read representation '" + image_id + "' from '" + path.string() + "'");
  }
  return decode_representation(bytes, std::move(image_id));
}

ReprHeader read_representation_header(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::string bytes(kReprHeaderBytes, '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  bytes.resize(static_cast<std::size_t>(in.gcount()));
  const ReprHeader header = decode_header(bytes, "'" + path.string() + "'");
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  if (size != kReprHeaderBytes + header.cell_count() * header.channels * 4)
    fail(ErrorKind::Truncation, "'" + path.string() + "': payload size does not match header");
  return header;
}

void write_representation(const fs::path& path, const RepresentationGrid& grid)
{
  csv::write_text_file(path.string(), encode_representation(grid));
}

// ---------------------------------------------------------------- manifest

fs::path DatasetManifest::resolve(std::size_t index) const
{
  fs::path p(entries.at(index).feature_path);
  if (p.is_absolute() || base_dir.empty())
    return p;
  return base_dir / p;
}

namespace {

std::optional<bool> parse_flag(const std::string& text, std::size_t line)
{
  if (text.empty())
    return std::nullopt;
  if (text == "1" || text == "true")
    return true;
  if (text == "0" || text == "false")
    return false;
  fail(ErrorKind::Validation, "manifest line " + std::to_string(line) + ": bad has_labels value '" +
                                text + "'");
}

} // namespace

DatasetManifest parse_manifest(std::string_view text, fs::path base_dir)
{
  const csv::Table table = csv::parse(text);
  if (table.header.empty())
    fail(ErrorKind::Validation, "manifest is empty");
  const int id_col = table.column("image_id");
  const int path_col = table.column("feature_path");
  const int flag_col = table.column("has_labels");
  if (id_col < 0 || path_col < 0)
    fail(ErrorKind::Format, "manifest header must contain image_id,feature_path");
  if (table.rows.empty())
    fail(ErrorKind::Validation, "manifest has no entries");

  DatasetManifest manifest;
  manifest.base_dir = std::move(base_dir);
  manifest.entries.reserve(table.rows.size());
  std::set<std::string> seen;
  std::set<std::string> duplicates;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    if (row.size() < table.header.size())
      fail(ErrorKind::Format, "manifest line " + std::to_string(line) + ": too few fields");
    ManifestEntry entry;
    entry.image_id = row[id_col];
    entry.feature_path = row[path_col];
    if (flag_col >= 0)
      entry.has_labels = parse_flag(row[flag_col], line);
    if (entry.image_id.empty() || entry.feature_path.empty())
      fail(ErrorKind::Validation, "manifest line " + std::to_string(line) + ": empty field");
    if (!seen.insert(entry.image_id).second)
      duplicates.insert(entry.image_id);
    manifest.entries.push_back(std::move(entry));
  }
  if (!duplicates.empty()) {
    std::string list;
    for (const auto& id : duplicates)
      list += (list.empty() ? "" : ", ") + id;
    fail(ErrorKind::Validation, "manifest has duplicate image_id values: " + list);
  }
  return manifest;
}

DatasetManifest read_manifest(const fs::path& path)
{
  if (!fs::exists(path))
    fail(ErrorKind::Io, "manifest not found: '" + path.string() + "'");
  return parse_manifest(csv::read_text_file(path.string()), path.parent_path());
}

std::string format_manifest(const DatasetManifest& manifest)
{
  const bool with_flags = std::any_of(manifest.entries.begin(), manifest.entries.end(),
                                      [](const ManifestEntry& e) { return e.has_labels.has_value(); });
  std::ostringstream out;
  if (with_flags)
    csv::write_row(out, {"image_id", "feature_path", "has_labels"});
  else
    csv::write_row(out, {"image_id", "feature_path"});
  for (const auto& e : manifest.entries) {
    csv::Row row{e.image_id, e.feature_path};
    if (with_flags)
      row.push_back(e.has_labels ? (*e.has_labels ? "1" : "0") : "");
    csv::write_row(out, row);
  }
  return out.str();
}

void write_manifest(const fs::path& path, const DatasetManifest& manifest)
{
  csv::write_text_file(path.string(), format_manifest(manifest));
}

// ---------------------------------------------------------------- boxes

void BBoxRecord::validate() const
{
  if (class_name.empty())
    fail(ErrorKind::Validation, "box for '" + image_id + "' has an empty class name");
  auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (!in_unit(xmin) || !in_unit(xmax) || !in_unit(ymin) || !in_unit(ymax))
    fail(ErrorKind::Validation, "box for '" + image_id + "' has a coordinate outside [0,1]");
  if (!(xmin < xmax) || !(ymin < ymax))
    fail(ErrorKind::Validation, "box for '" + image_id + "' is degenerate (min >= max)");
}

BBoxTableResult parse_bbox_table_lenient(std::string_view text, const BBoxColumns& columns)
{
  const csv::Table table = csv::parse(text);
  const int cols[6] = {table.column(columns.image_id), table.column(columns.label),
                       table.column(columns.xmin),     table.column(columns.xmax),
                       table.column(columns.ymin),     table.column(columns.ymax)};
  const std::string names[6] = {columns.image_id, columns.label, columns.xmin,
                                columns.xmax,     columns.ymin,  columns.ymax};
  for (int i = 0; i < 6; ++i) {
    if (cols[i] < 0)
      fail(ErrorKind::Format, "box table is missing required column '" + names[i] + "'");
  }
  const int needed = *std::max_element(std::begin(cols), std::end(cols));

  BBoxTableResult result;
  result.records.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    try {
      if (static_cast<int>(row.size()) <= needed)
        fail(ErrorKind::Format, "too few fields");
      BBoxRecord box;
      box.image_id = row[cols[0]];
      box.class_name = row[cols[1]];
      box.xmin = csv::parse_double(row[cols[2]]);
      box.xmax = csv::parse_double(row[cols[3]]);
      box.ymin = csv::parse_double(row[cols[4]]);
      box.ymax = csv::parse_double(row[cols[5]]);
      if (box.image_id.empty())
        fail(ErrorKind::Validation, "empty image id");
      box.validate();
      result.records.push_back(std::move(box));
    } catch (const Error& e) {
      result.errors.push_back({line, e.what()});
    }
  }
  return result;
}

std::vector<BBoxRecord> parse_bbox_table(std::string_view text, const BBoxColumns& columns)
{
  BBoxTableResult result = parse_bbox_table_lenient(text, columns);
  if (!result.errors.empty()) {
    const auto& first = result.errors.front();
    fail(ErrorKind::Validation,
         "box table row at line " + std::to_string(first.line) + ": " + first.message);
  }
  return std::move(result.records);
}

std::vector<BBoxRecord> read_bbox_table(const fs::path& path, const BBoxColumns& columns)
{
  return parse_bbox_table(csv::read_text_file(path.string()), columns);
}

std::string format_bbox_table(std::span<const BBoxRecord> records)
{
  std::ostringstream out;
  csv::write_row(out, {"ImageID", "LabelName", "XMin", "XMax", "YMin", "YMax"});
  for (const auto& b : records) {
    csv::write_row(out, {b.image_id, b.class_name, csv::format_double(b.xmin),
                         csv::format_double(b.xmax), csv::format_double(b.ymin),
                         csv::format_double(b.ymax)});
  }
  return out.str();
}

// ---------------------------------------------------------------- masks

void InstanceMaskSummary::validate() const
{
  if (height < 1 || width < 1)
    fail(ErrorKind::Validation, "mask summary '" + image_id + "' has a zero image dimension");
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    if (inst.class_name.empty())
      fail(ErrorKind::Validation, "mask summary '" + image_id + "' instance " + std::to_string(i) +
                                    " has an empty class");
    if (inst.pixels.empty())
      fail(ErrorKind::Validation, "mask summary '" + image_id + "' instance " + std::to_string(i) +
                                    " has no pixels");
    for (const auto& [r, c] : inst.pixels) {
      if (r >= height || c >= width)
        fail(ErrorKind::Validation, "mask summary '" + image_id + "' instance " +
                                      std::to_string(i) + " has a pixel outside the image");
    }
  }
}

std::vector<InstanceMaskSummary> parse_mask_summaries(std::string_view jsonl)
{
  std::vector<InstanceMaskSummary> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos)
      end = jsonl.size();
    std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos)
      continue;
    const std::string where = "mask summary line " + std::to_string(line_no);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
      InstanceMaskSummary summary;
      summary.image_id = obj.at("image_id").get<std::string>();
      summary.height = obj.at("height").get<std::uint32_t>();
      summary.width = obj.at("width").get<std::uint32_t>();
      for (const auto& inst : obj.at("instances")) {
        MaskInstance mi;
        mi.class_name = inst.at("class").get<std::string>();
        for (const auto& px : inst.at("pixels")) {
          if (!px.is_array() || px.size() != 2)
            fail(ErrorKind::Format, where + ": pixel must be [row, col]");
          const auto r = px[0].get<std::int64_t>();
          const auto c = px[1].get<std::int64_t>();
          if (r < 0 || c < 0)
            fail(ErrorKind::Validation, where + ": negative pixel coordinate");
          mi.pixels.emplace_back(static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c));
        }
        summary.instances.push_back(std::move(mi));
      }
      summary.validate();
      out.push_back(std::move(summary));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Format, where + ": " + e.what());
    }
  }
  return out;
}

std::vector<InstanceMaskSummary> read_mask_summaries(const fs::path& path)
{
  return parse_mask_summaries(csv::read_text_file(path.string()));
}

std::vector<BBoxRecord> bbox_from_mask(const InstanceMaskSummary& summary)
{
  summary.validate();
  const double h = summary.height;
  const double w = summary.width;
  std::vector<BBoxRecord> boxes;
  boxes.reserve(summary.instances.size());
  for (const auto& inst : summary.instances) {
    std::uint32_t rmin = UINT32_MAX, rmax = 0, cmin = UINT32_MAX, cmax = 0;
    for (const auto& [r, c] : inst.pixels) {
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
    }
    auto span = [](std::uint32_t lo, std::uint32_t hi, double extent) {
      if (lo == hi)
        return std::pair{std::max(0.0, (lo - 0.5) / extent), std::min(1.0, (hi + 0.5) / extent)};
      return std::pair{lo / extent, hi / extent};
    };
    const auto [xmin, xmax] = span(cmin, cmax, w);
    const auto [ymin, ymax] = span(rmin, rmax, h);
    boxes.push_back({summary.image_id, inst.class_name, xmin, xmax, ymin, ymax});
  }
  return boxes;
}

} // namespace simsel
