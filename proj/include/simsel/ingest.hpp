#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace simsel {

/// One image's H x W x C feature tensor, row-major with the channel
/// innermost. Each (h, w) cell holds the C-dimensional representation of
/// one receptive field.
struct RepresentationGrid
{
  std::string image_id;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t channels = 0;
  std::vector<float> values;

  std::size_t cell_count() const { return std::size_t(height) * width; }

  std::span<const float> cell(std::size_t index) const
  {
    return {values.data() + index * channels, channels};
  }

  // Throws Validation/Data errors when an invariant does not hold.
  void validate() const;
};

struct ReprHeader
{
  std::uint32_t version = 1;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t channels = 0;

  std::size_t cell_count() const { return std::size_t(height) * width; }
};

inline constexpr std::uint32_t kReprVersion = 1;
inline constexpr std::size_t kReprHeaderBytes = 20;

std::string encode_representation(const RepresentationGrid& grid);
RepresentationGrid decode_representation(std::string_view bytes, std::string image_id = {});

// The image id defaults to the file stem.
RepresentationGrid read_representation(const std::filesystem::path& path,
                                       std::string image_id = {});
ReprHeader read_representation_header(const std::filesystem::path& path);
void write_representation(const std::filesystem::path& path, const RepresentationGrid& grid);

struct ManifestEntry
{
  std::string image_id;
  std::string feature_path;
  std::optional<bool> has_labels;
};

struct DatasetManifest
{
  std::vector<ManifestEntry> entries;
  // Relative feature paths are resolved against this directory.
  std::filesystem::path base_dir;

  std::size_t size() const { return entries.size(); }
  std::filesystem::path resolve(std::size_t index) const;
};

DatasetManifest parse_manifest(std::string_view text, std::filesystem::path base_dir = {});
DatasetManifest read_manifest(const std::filesystem::path& path);
std::string format_manifest(const DatasetManifest& manifest);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// A labeled bounding box in normalized [0, 1] image coordinates.
struct BBoxRecord
{
  std::string image_id;
  std::string class_name;
  double xmin = 0.0;
  double xmax = 0.0;
  double ymin = 0.0;
  double ymax = 0.0;

  void validate() const;
  bool operator==(const BBoxRecord&) const = default;
};

// Header names used to locate the required fields of a box table.
struct BBoxColumns
{
  std::string image_id = "ImageID";
  std::string label = "LabelName";
  std::string xmin = "XMin";
  std::string xmax = "XMax";
  std::string ymin = "YMin";
  std::string ymax = "YMax";
};

struct RowError
{
  std::size_t line = 0;
  std::string message;
};

struct BBoxTableResult
{
  std::vector<BBoxRecord> records;
  std::vector<RowError> errors;
};

// Every data row yields exactly one record or one RowError.
BBoxTableResult parse_bbox_table_lenient(std::string_view text, const BBoxColumns& columns = {});
// Strict variant: throws on the first invalid row.
std::vector<BBoxRecord> parse_bbox_table(std::string_view text, const BBoxColumns& columns = {});
std::vector<BBoxRecord> read_bbox_table(const std::filesystem::path& path,
                                        const BBoxColumns& columns = {});
std::string format_bbox_table(std::span<const BBoxRecord> records);

struct MaskInstance
{
  std::string class_name;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pixels; // (row, col)
};

struct InstanceMaskSummary
{
  std::string image_id;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<MaskInstance> instances;

  void validate() const;
};

std::vector<InstanceMaskSummary> parse_mask_summaries(std::string_view jsonl);
std::vector<InstanceMaskSummary> read_mask_summaries(const std::filesystem::path& path);

/// One box per instance spanning the min/max pixel row and column,
/// normalized by the image size. An axis on which the instance is a single
/// pixel wide is widened by half a pixel on both sides.
std::vector<BBoxRecord> bbox_from_mask(const InstanceMaskSummary& summary);

} // namespace simsel
