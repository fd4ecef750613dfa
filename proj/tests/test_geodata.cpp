#include <doctest.h>

#include <fstream>
#include <random>

#include "oracles.hpp"
#include "parcelsense/errors.hpp"
#include "parcelsense/geodata.hpp"
#include "temp_dir.hpp"

using namespace parcelsense;

TEST_CASE("land-use codes round trip and reject unknown codes") {
  for (LandUseLabel l : kAllLandUse) CHECK(parse_land_use(to_string(l)) == l);
  CHECK_FALSE(parse_land_use("X"));
  CHECK_FALSE(parse_land_use(""));
  CHECK_FALSE(parse_land_use("MM"));
}

TEST_CASE("load_raster reads 8-bit RGB and gray images") {
  TempDir dir("geo");
  RasterGrid rgb(2, 2, 3, 0);
  save_raster(dir / "rgb.png", rgb);
  const RasterGrid back = load_raster(dir / "rgb.png");
  CHECK(back.width == 2);
  CHECK(back.height == 2);
  CHECK(back.bands == 3);
  CHECK(back.pixels == std::vector<std::uint8_t>(12, 0));

  RasterGrid gray(1, 1, 1, 255);
  save_raster(dir / "gray.png", gray);
  const RasterGrid g = load_raster(dir / "gray.png");
  CHECK(g.bands == 1);
  CHECK(g.pixels == std::vector<std::uint8_t>{255});
}

TEST_CASE("load_raster rejects 16-bit, missing and malformed files") {
  TempDir dir("geo");
  ParcelMap m(2, 2);
  save_parcel_map(dir / "deep.png", m);
  CHECK_THROWS_WITH_AS(load_raster(dir / "deep.png"), doctest::Contains("unsupported bit depth"), DataError);
  CHECK_THROWS_AS(load_raster(dir / "missing.png"), DataError);
  std::ofstream(dir / "junk.png") << "not a png";
  CHECK_THROWS_AS(load_raster(dir / "junk.png"), DataError);
}

TEST_CASE("raster and parcel map round trips are bit exact") {
  TempDir dir("geo");
  std::mt19937 rng(3);
  for (int bands : {1, 3}) {
    RasterGrid r(13, 7, bands);
    for (auto& p : r.pixels) p = static_cast<std::uint8_t>(rng());
    save_raster(dir / "r.png", r);
    CHECK(load_raster(dir / "r.png") == r);
  }
  ParcelMap m(9, 11);
  for (auto& id : m.ids) id = static_cast<std::uint16_t>(rng());
  save_parcel_map(dir / "m.png", m);
  CHECK(load_parcel_map(dir / "m.png") == m);
}

TEST_CASE("load_parcel_map checks dimensions and channels") {
  TempDir dir("geo");
  ParcelMap m(2, 2);
  m.ids = {1, 1, 0, 2};
  save_parcel_map(dir / "m.png", m);
  const RasterGrid raster(2, 2, 3);
  const ParcelMap loaded = load_parcel_map(dir / "m.png", raster);
  const ParcelIndex index = build_parcel_records(loaded);
  REQUIRE(index.records.size() == 2);
  CHECK(index.records[0].pixel_count == 2);
  CHECK(index.records[1].pixel_count == 1);

  save_parcel_map(dir / "big.png", ParcelMap(3, 3));
  CHECK_THROWS_WITH_AS(load_parcel_map(dir / "big.png", raster), doctest::Contains("dimension mismatch"),
                       DataError);

  save_raster(dir / "rgb.png", RasterGrid(2, 2, 3));
  CHECK_THROWS_AS(load_parcel_map(dir / "rgb.png", raster), DataError);

  save_parcel_map(dir / "zero.png", ParcelMap(4, 4));
  CHECK(build_parcel_records(load_parcel_map(dir / "zero.png")).records.empty());
}

TEST_CASE("build_parcel_records computes tight boxes") {
  ParcelMap m(10, 10);
  m.at(0, 0) = 1;
  m.at(1, 0) = 1;
  m.at(4, 9) = 7;
  const ParcelIndex index = build_parcel_records(m);
  REQUIRE(index.records.size() == 2);
  CHECK(index.records[0].bbox == BoundingBox{0, 1, 0, 0});
  CHECK(index.records[0].pixel_count == 2);
  CHECK(index.records[1].id == 7);
  CHECK(index.records[1].bbox == BoundingBox{4, 4, 9, 9});
  CHECK(index.records[1].pixel_count == 1);

  const ParcelMap l = oracle::map_from_rows({"1.", "11"});
  const ParcelIndex li = build_parcel_records(l);
  CHECK(li.records[0].bbox == BoundingBox{0, 1, 0, 1});
  CHECK(li.records[0].pixel_count == 3);
}

TEST_CASE("labels attach to records and unmatched ids are reported") {
  const ParcelMap m = oracle::map_from_rows({"11.", "..2"});
  const LabelTable labels{{1, LandUseLabel::R}, {9, LandUseLabel::G}};
  const ParcelIndex index = build_parcel_records(m, &labels);
  CHECK(index.records[0].label == LandUseLabel::R);
  CHECK_FALSE(index.records[1].label);
  CHECK(index.unmatched_label_ids == std::vector<ParcelId>{9});
  CHECK(index.find(2) != nullptr);
  CHECK(index.find(3) == nullptr);
}

TEST_CASE("label CSV validation") {
  TempDir dir("geo");
  const LabelTable labels{{3, LandUseLabel::U}, {12, LandUseLabel::M}};
  save_labels(dir / "l.csv", labels);
  CHECK(load_labels(dir / "l.csv") == labels);

  std::ofstream(dir / "bad_code.csv") << "parcel_id,label\n1,Z\n";
  CHECK_THROWS_AS(load_labels(dir / "bad_code.csv"), DataError);
  std::ofstream(dir / "bad_header.csv") << "id,code\n1,M\n";
  CHECK_THROWS_AS(load_labels(dir / "bad_header.csv"), DataError);
  std::ofstream(dir / "dup.csv") << "parcel_id,label\n1,M\n1,G\n";
  CHECK_THROWS_AS(load_labels(dir / "dup.csv"), DataError);
  std::ofstream(dir / "short.csv") << "parcel_id,label\n1\n";
  CHECK_THROWS_AS(load_labels(dir / "short.csv"), DataError);
}

TEST_CASE("record properties hold on random maps") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    ParcelMap m(1 + static_cast<int>(rng() % 20), 1 + static_cast<int>(rng() % 20));
    for (auto& id : m.ids) id = static_cast<std::uint16_t>(rng() % 5);
    const ParcelIndex index = build_parcel_records(m);
    std::size_t nonzero = 0;
    for (auto id : m.ids) nonzero += id != 0;
    std::size_t total = 0;
    for (const auto& r : index.records) {
      total += r.pixel_count;
      bool left = false, right = false, top = false, bottom = false;
      for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
          if (m.at(x, y) != r.id) continue;
          CHECK(r.bbox.contains(x, y));
          left |= x == r.bbox.x_min;
          right |= x == r.bbox.x_max;
          top |= y == r.bbox.y_min;
          bottom |= y == r.bbox.y_max;
        }
      }
      CHECK((left && right && top && bottom));
    }
    CHECK(total == nonzero);
  }
}
