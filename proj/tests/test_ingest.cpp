#include "simsel/csv.hpp"
#include "simsel/error.hpp"
#include "simsel/ingest.hpp"
#include "simsel/rng.hpp"
#include "support.hpp"

#include <doctest.h>

#include <bit>
#include <cstring>

using namespace simsel;

namespace {

std::string repr_bytes(std::uint32_t h, std::uint32_t w, std::uint32_t c, std::vector<float> values,
                       const char* magic = "REPR", std::uint32_t version = 1)
{
  std::string out(magic, 4);
  for (std::uint32_t v : {version, h, w, c})
    for (int i = 0; i < 4; ++i)
      out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  for (float f : values) {
    const auto u = std::bit_cast<std::uint32_t>(f);
    for (int i = 0; i < 4; ++i)
      out.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
  }
  return out;
}

ErrorKind kind_of(auto&& fn)
{
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

} // namespace

TEST_CASE("read_representation decodes a minimal file")
{
  test::TempDir dir;
  csv::write_text_file(dir.str("a.repr"), repr_bytes(1, 1, 2, {1.0f, 2.0f}));
  const auto grid = read_representation(dir.path() / "a.repr");
  CHECK(grid.image_id == "a");
  CHECK(grid.height == 1);
  CHECK(grid.width == 1);
  CHECK(grid.channels == 2);
  CHECK(grid.values == std::vector<float>{1.0f, 2.0f});
}

TEST_CASE("read_representation reports malformed input")
{
  CHECK(kind_of([] { decode_representation(repr_bytes(2, 2, 1, {1, 2, 3})); }) ==
        ErrorKind::Truncation);
  CHECK(kind_of([] { decode_representation(repr_bytes(1, 1, 1, {1}, "RPER")); }) ==
        ErrorKind::Format);
  CHECK(kind_of([] { decode_representation(repr_bytes(1, 1, 1, {1}, "REPR", 2)); }) ==
        ErrorKind::Format);
  CHECK(kind_of([] { decode_representation("REP"); }) == ErrorKind::Format);

  try {
    decode_representation(repr_bytes(1, 1, 3, {1.0f, std::nanf(""), 2.0f}), "img");
    FAIL("expected a data error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
    CHECK(std::string(e.what()).find("index 1") != std::string::npos);
  }
  CHECK(kind_of([] { decode_representation(repr_bytes(1, 1, 1, {INFINITY})); }) == ErrorKind::Data);
  CHECK(kind_of([] { read_representation("/nonexistent/x.repr"); }) == ErrorKind::Io);
}

TEST_CASE("a 256 x 512 x 256 grid holds 131072 receptive-field vectors of depth 256")
{
  RepresentationGrid grid;
  grid.image_id = "big";
  grid.height = 256;
  grid.width = 512;
  grid.channels = 256;
  grid.values.assign(std::size_t(256) * 512 * 256, 0.25f);
  test::TempDir dir;
  write_representation(dir.path() / "big.repr", grid);
  const auto header = read_representation_header(dir.path() / "big.repr");
  CHECK(header.cell_count() == 256u * 512u);
  CHECK(header.channels == 256);
  const auto back = read_representation(dir.path() / "big.repr");
  CHECK(back.cell_count() == 131072);
  CHECK(back.cell(131071).size() == 256);
}

TEST_CASE("REPR round trip is byte identical")
{
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    RepresentationGrid g;
    g.height = 1 + uniform_index(rng, 5);
    g.width = 1 + uniform_index(rng, 5);
    g.channels = 1 + uniform_index(rng, 7);
    for (std::size_t i = 0; i < g.cell_count() * g.channels; ++i)
      g.values.push_back(static_cast<float>(standard_normal(rng) * 100.0));
    const std::string bytes = encode_representation(g);
    CHECK(encode_representation(decode_representation(bytes)) == bytes);
  }
}

TEST_CASE("manifest parsing")
{
  SUBCASE("entries keep file order")
  {
    const auto m = parse_manifest("image_id,feature_path\na,pa\nb,pb\n");
    REQUIRE(m.size() == 2);
    CHECK(m.entries[0].image_id == "a");
    CHECK(m.entries[0].feature_path == "pa");
    CHECK(m.entries[1].image_id == "b");
    CHECK_FALSE(m.entries[0].has_labels.has_value());
  }
  SUBCASE("duplicates are listed")
  {
    try {
      parse_manifest("image_id,feature_path\na,pa\na,pb\n");
      FAIL("expected duplicate error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Validation);
      CHECK(std::string(e.what()).find("a") != std::string::npos);
    }
  }
  SUBCASE("empty input")
  {
    CHECK(kind_of([] { parse_manifest(""); }) == ErrorKind::Validation);
    CHECK(kind_of([] { parse_manifest("image_id,feature_path\n"); }) == ErrorKind::Validation);
  }
  SUBCASE("label presence flag")
  {
    const auto m = parse_manifest("image_id,feature_path,has_labels\na,pa,1\nb,pb,0\nc,pc,\n");
    CHECK(m.entries[0].has_labels == true);
    CHECK(m.entries[1].has_labels == false);
    CHECK_FALSE(m.entries[2].has_labels.has_value());
    CHECK(format_manifest(m) == "image_id,feature_path,has_labels\na,pa,1\nb,pb,0\nc,pc,\n");
  }
  SUBCASE("2975 entries")
  {
    std::string text = "image_id,feature_path\n";
    for (int i = 0; i < 2975; ++i)
      text += "img" + std::to_string(i) + ",f" + std::to_string(i) + ".repr\n";
    CHECK(parse_manifest(text).size() == 2975);
  }
  SUBCASE("relative paths resolve against the manifest directory")
  {
    test::TempDir dir;
    csv::write_text_file(dir.str("m.csv"), "image_id,feature_path\na,sub/a.repr\nb,/abs/b.repr\n");
    const auto m = read_manifest(dir.path() / "m.csv");
    CHECK(m.resolve(0) == dir.path() / "sub/a.repr");
    CHECK(m.resolve(1) == std::filesystem::path("/abs/b.repr"));
  }
  SUBCASE("missing file names the path")
  {
    try {
      read_manifest("/no/such/manifest.csv");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("/no/such/manifest.csv") != std::string::npos);
    }
  }
}

TEST_CASE("bbox table parsing")
{
  const std::string header = "ImageID,Source,LabelName,Confidence,XMin,XMax,YMin,YMax,IsOccluded\n";
  SUBCASE("valid row with extra columns")
  {
    const auto boxes = parse_bbox_table(header + "img1,x,Car,1,0.1,0.5,0.2,0.6,0\n");
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0] == BBoxRecord{"img1", "Car", 0.1, 0.5, 0.2, 0.6});
  }
  SUBCASE("degenerate and out-of-range rows carry the line number")
  {
    try {
      parse_bbox_table(header + "img1,x,Car,1,0.1,0.5,0.2,0.6,0\nimg1,x,Car,1,0.5,0.5,0.2,0.6,0\n");
      FAIL("expected validation error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Validation);
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK(kind_of([&] { parse_bbox_table(header + "img1,x,Car,1,-0.1,0.5,0.2,0.6,0\n"); }) ==
          ErrorKind::Validation);
    CHECK(kind_of([&] { parse_bbox_table(header + "img1,x,Car,1,0.1,1.5,0.2,0.6,0\n"); }) ==
          ErrorKind::Validation);
  }
  SUBCASE("missing column")
  {
    CHECK(kind_of([] { parse_bbox_table("ImageID,LabelName,XMin,XMax,YMin\na,b,0,1,0\n"); }) ==
          ErrorKind::Format);
  }
  SUBCASE("column mapping")
  {
    BBoxColumns cols;
    cols.image_id = "id";
    cols.label = "cls";
    cols.xmin = "x0";
    cols.xmax = "x1";
    cols.ymin = "y0";
    cols.ymax = "y1";
    const auto boxes = parse_bbox_table("y0,y1,x0,x1,cls,id\n0.2,0.6,0.1,0.5,Car,img1\n", cols);
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0] == BBoxRecord{"img1", "Car", 0.1, 0.5, 0.2, 0.6});
  }
  SUBCASE("every row maps to one record or one error")
  {
    Rng rng(11);
    std::string text = header;
    const int rows = 300;
    for (int i = 0; i < rows; ++i) {
      const double a = uniform01(rng) * 1.4 - 0.2;
      const double b = uniform01(rng) * 1.4 - 0.2;
      text += "img" + std::to_string(i % 17) + ",x,Cls,1," + csv::format_double(a) + "," +
              csv::format_double(b) + ",0.1,0.9,0\n";
    }
    text += "bad,x,Cls,1,zero,0.5,0.1,0.9,0\n";
    const auto result = parse_bbox_table_lenient(text);
    CHECK(result.records.size() + result.errors.size() == rows + 1);
    CHECK(result.errors.back().line == rows + 2);
    for (std::size_t i = 1; i < result.errors.size(); ++i)
      CHECK(result.errors[i - 1].line < result.errors[i].line);
    for (const auto& b : result.records)
      CHECK_NOTHROW(b.validate());
  }
}

TEST_CASE("bbox_from_mask")
{
  SUBCASE("min/max of the instance pixels")
  {
    InstanceMaskSummary s{"m", 10, 10, {{"car", {{2, 3}, {4, 7}}}}};
    const auto boxes = bbox_from_mask(s);
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0].xmin == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(boxes[0].xmax == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(boxes[0].ymin == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(boxes[0].ymax == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(boxes[0].class_name == "car");
    CHECK(boxes[0].image_id == "m");
  }
  SUBCASE("single pixel is widened by half a pixel")
  {
    InstanceMaskSummary s{"m", 10, 10, {{"person", {{5, 5}}}}};
    const auto boxes = bbox_from_mask(s);
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0].xmin == doctest::Approx(0.45).epsilon(1e-12));
    CHECK(boxes[0].xmax == doctest::Approx(0.55).epsilon(1e-12));
    CHECK(boxes[0].ymin == doctest::Approx(0.45).epsilon(1e-12));
    CHECK(boxes[0].ymax == doctest::Approx(0.55).epsilon(1e-12));
  }
  SUBCASE("no instances")
  {
    CHECK(bbox_from_mask(InstanceMaskSummary{"m", 4, 4, {}}).empty());
  }
  SUBCASE("pixel outside the image")
  {
    InstanceMaskSummary s{"m", 4, 4, {{"car", {{4, 0}}}}};
    CHECK(kind_of([&] { bbox_from_mask(s); }) == ErrorKind::Validation);
  }
  SUBCASE("random masks always give valid boxes")
  {
    Rng rng(5);
    for (int trial = 0; trial < 500; ++trial) {
      InstanceMaskSummary s;
      s.image_id = "r";
      s.height = 1 + uniform_index(rng, 40);
      s.width = 1 + uniform_index(rng, 40);
      const auto instances = uniform_index(rng, 4);
      for (std::size_t i = 0; i < instances; ++i) {
        MaskInstance inst{"c" + std::to_string(i), {}};
        const auto pixels = 1 + uniform_index(rng, 5);
        for (std::size_t p = 0; p < pixels; ++p)
          inst.pixels.emplace_back(uniform_index(rng, s.height), uniform_index(rng, s.width));
        s.instances.push_back(std::move(inst));
      }
      const auto boxes = bbox_from_mask(s);
      REQUIRE(boxes.size() == s.instances.size());
      for (const auto& b : boxes)
        CHECK_NOTHROW(b.validate());
    }
  }
}

TEST_CASE("mask summaries are read from JSON lines")
{
  const std::string text =
    R"({"image_id":"a","height":10,"width":10,"instances":[{"class":"car","pixels":[[2,3],[4,7]]}]})"
    "\n\n"
    R"({"image_id":"b","height":4,"width":8,"instances":[]})"
    "\n";
  const auto summaries = parse_mask_summaries(text);
  REQUIRE(summaries.size() == 2);
  CHECK(summaries[0].instances[0].pixels.size() == 2);
  CHECK(summaries[1].width == 8);
  CHECK(kind_of([] { parse_mask_summaries(R"({"image_id":"a"})"); }) == ErrorKind::Format);
  CHECK(kind_of([] {
          parse_mask_summaries(
            R"({"image_id":"a","height":2,"width":2,"instances":[{"class":"x","pixels":[]}]})");
        }) == ErrorKind::Validation);
}

TEST_CASE("csv quoting survives a round trip")
{
  std::ostringstream out;
  csv::write_row(out, {"a,b", "say \"hi\"", "plain"});
  const auto table = csv::parse("h1,h2,h3\n" + out.str());
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0] == csv::Row{"a,b", "say \"hi\"", "plain"});
  CHECK(csv::parse_double(csv::format_double(0.1)) == 0.1);
  CHECK(csv::format_double(1e-300) == "1e-300");
}
